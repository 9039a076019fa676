#from distutils.core import setup
from setuptools import setup, find_packages

# To create build/ and dist/ files, do:
# python setup.py sdist
# python setup.py bdist_wheel

with open('README.rst') as f:
    long_description = f.read()

setup(
    name='acva-denoise',
    version='1.0',
    packages=find_packages(exclude=['tests', 'doc']),
    scripts=[],
    license='LICENSE.txt',
    description='Texture-preserving nonlocal PCA image denoiser with adaptive clustering and variation-adaptive filtering.',
    long_description=long_description,
    long_description_content_type='text/x-rst',
    python_requires='>=3.8',
    install_requires=[
        "numpy >= 1.20",
        "scipy >= 1.6",
        "Pillow >= 9.2",
        "PyWavelets >= 1.1",
    ],
    extras_require={
        'plots': ["matplotlib"],
        'test':  ["pytest"],
    },
    entry_points={
        'console_scripts': ['acva = acva.cli:main'],
    },
    classifiers=[
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Image Processing",
    ],
)
