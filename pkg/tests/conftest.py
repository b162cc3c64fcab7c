import logging

import numpy as np
import pytest

from sfp.image_core import save_image
from sfp.oracle import clean_scene


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def random_image(rng):
    def make(height=32, width=32, lo=0.0, hi=1.0):
        return rng.uniform(lo, hi, size=(height, width, 3))
    return make


@pytest.fixture
def scene_image():
    """A 48x48 procedural clean scene."""
    return clean_scene(48, seed=3)


@pytest.fixture
def image_dir(tmp_path):
    """Directory holding two small PNG scenes."""
    directory = tmp_path / 'images'
    directory.mkdir()
    save_image(clean_scene(32, seed=1), directory / 'a.png')
    save_image(clean_scene(32, seed=2), directory / 'b.png')
    return directory


@pytest.fixture(autouse=True)
def quiet_logging(monkeypatch):
    """Route CLI logging setup to a recorder instead of the log directory."""
    calls = []

    def setup_logging(program_name, **kwargs):
        calls.append((program_name, kwargs))
        return logging.getLogger(program_name)

    monkeypatch.setattr('sfp.__main__.setup_logging', setup_logging)
    return calls
