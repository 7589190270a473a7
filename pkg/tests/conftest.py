import random

import pytest

from matproof.field import BLS12_381_R, TEST64, TOY97
from matproof.mle import FieldMatrix


def pytest_addoption(parser):
    parser.addoption("--skip-slow", action="store_true", help="skip real-curve and timing tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--skip-slow"):
        skip = pytest.mark.skip(reason="--skip-slow")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip)


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture(params=[TOY97, TEST64, BLS12_381_R], ids=lambda p: p.name)
def params(request):
    return request.param


@pytest.fixture
def example():
    """The 2x2 matrices of the hand-worked example, over the BLS12-381 scalar field."""
    w = FieldMatrix.from_ints([[1, 2], [3, 4]], BLS12_381_R)
    x = FieldMatrix.from_ints([[5, 6], [7, 8]], BLS12_381_R)
    y = FieldMatrix.from_ints([[19, 22], [43, 50]], BLS12_381_R)
    return w, x, y


def have_py_ecc():
    try:
        import py_ecc.optimized_bls12_381  # noqa: F401
    except ImportError:
        return False
    return True


needs_bls = pytest.mark.skipif(not have_py_ecc(), reason="py_ecc not installed")
