import os
import numpy as np
import pytest
import acva.patching as PT
from synthetic import piecewise_texture


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: image-level runs of the whole denoiser")


@pytest.fixture
def texture_image():
    return piecewise_texture(128, seed = 0)


@pytest.fixture
def standard_image():
    """
    Loads a standard test image (e.g. 'house', 'mandrill', 'lena') from the directory named by the
    environment variable ACVA_TEST_IMAGES. The test is skipped when it is not available.
    """
    folder = os.environ.get('ACVA_TEST_IMAGES')
    def load(name):
        if folder is None:
            pytest.skip("ACVA_TEST_IMAGES not set")
        for ext in ('.pgm', '.png', '.tif', '.tiff', '.bmp'):
            for candidate in (name, name.lower(), name.capitalize()):
                path = os.path.join(folder, candidate + ext)
                if os.path.exists(path):
                    if name.lower() == 'lena_rgb':
                        return PT.read_rgb_image(path)
                    return PT.read_image(path)[0]
        pytest.skip("%s not found in %s" %(name, folder))
    return load
