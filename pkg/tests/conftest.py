import numpy as np
import pytest

from app.common.models import AnnealParams
from app.services.sector_algebra import build_sector


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run full-size reproduction tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def small_sector():
    return build_sector(4, 0.5)


@pytest.fixture
def sector_n10():
    return build_sector(10, 0.7)


@pytest.fixture
def params():
    return AnnealParams(p=3, gamma=1.0, q=1.0, tau=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def make_symmetric(rng):
    def build(d):
        M = rng.normal(size=(d, d))
        return (M + M.T) / 2
    return build
