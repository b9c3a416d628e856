from pathlib import Path

import pytest

from dmalign.imaging import load_image, read_pgm
from dmalign.pipeline import EditEngine

FIXTURES = Path(__file__).parent / "fixtures"
SCENES = FIXTURES / "scenes"


@pytest.fixture(scope="session")
def beach_scene():
    return {
        "image": load_image(SCENES / "beach" / "image.png"),
        "sky": read_pgm(SCENES / "beach" / "sky.pgm"),
        "ship": read_pgm(SCENES / "beach" / "ship.pgm"),
        "sand": read_pgm(SCENES / "beach" / "sand.pgm"),
        "dir": SCENES / "beach",
    }


@pytest.fixture(scope="session")
def jacket_scene():
    return {
        "image": load_image(SCENES / "jacket" / "image.png"),
        "woman": read_pgm(SCENES / "jacket" / "woman.pgm"),
        "jacket": read_pgm(SCENES / "jacket" / "jacket.pgm"),
        "dir": SCENES / "jacket",
    }


@pytest.fixture(scope="session")
def motorcycle_scene():
    return {
        "image": load_image(SCENES / "motorcycle" / "image.png"),
        "motorcycle": read_pgm(SCENES / "motorcycle" / "motorcycle.pgm"),
        "man": read_pgm(SCENES / "motorcycle" / "man.pgm"),
        "dir": SCENES / "motorcycle",
    }


@pytest.fixture(scope="session")
def shipped_denoiser():
    return EditEngine.default().denoiser


@pytest.fixture(scope="session")
def shipped_aligner():
    return EditEngine.default().aligner_params
