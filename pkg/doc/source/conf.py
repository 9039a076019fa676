# Configuration file for the Sphinx documentation builder.
#
# This file only contains a selection of the most common options. For a full
# list see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Path setup --------------------------------------------------------------

# The package lives two levels above this directory.
import os
import sys
sys.path.insert(0, os.path.abspath('../../'))

# -- Configuration for ReadTheDocs setup -------------------------------------

# Check if we're running on Read the Docs' servers
read_the_docs_build = os.environ.get('READTHEDOCS', None) == 'True'

# Sort functions as they are, not in alphabetical order
autodoc_member_order = 'bysource'


# -- Project information -----------------------------------------------------

project = 'ACVA'
copyright = '2025, ACVA developers'
author = 'ACVA developers'

# Master document is `index.rst`
master_doc = 'index'

# -- General configuration ---------------------------------------------------

# Add any Sphinx extension module names here, as strings. They can be
# extensions coming with Sphinx (named 'sphinx.ext.*') or your custom
# ones.
extensions = [ 'sphinx.ext.autodoc',
               'sphinx.ext.coverage',
               'sphinx.ext.napoleon',
               'sphinx.ext.todo',
               'sphinx.ext.intersphinx',
               'sphinx.ext.viewcode',
               'sphinx.ext.autosectionlabel']

intersphinx_mapping = {'python': ('https://docs.python.org/3', None),
                       'numpy': ('https://numpy.org/doc/stable/', None),
                       'scipy': ('https://docs.scipy.org/doc/scipy/', None),
                       'matplotlib': ('https://matplotlib.org/stable/', None)}

# Generate summary of functions
autosummary_generate = True


# Add any paths that contain templates here, relative to this directory.
templates_path = ['_templates']

# List of patterns, relative to source directory, that match files and
# directories to ignore when looking for source files.
# This pattern also affects html_static_path and html_extra_path.
exclude_patterns = []

# Avoid documentation from these files
autodoc_mock_imports = ['numpy', 'scipy', 'PIL', 'pywt']

# Mock the compiled packages so that autodoc imports the modules without them
from unittest import mock
MOCK_MODULES = ['numpy', 'scipy', 'scipy.special', 'scipy.optimize', 'scipy.spatial', 'scipy.spatial.distance',
                'scipy.ndimage', 'PIL', 'PIL.Image', 'pywt']
for mod_name in MOCK_MODULES:
    sys.modules[mod_name] = mock.MagicMock()


# -- Options for HTML output -------------------------------------------------

# The theme to use for HTML and HTML Help pages.  See the documentation for
# a list of builtin themes.
#
html_theme = 'classic'

# Add any paths that contain custom static files (such as style sheets) here,
# relative to this directory. They are copied after the builtin static files,
# so a file named "default.css" will overwrite the builtin "default.css".
html_static_path = ['_static']
