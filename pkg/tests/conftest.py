import numpy as np
import pytest

from rpforest.core.config import rpf_global_params
from rpforest.core.types import Dataset


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run Monte-Carlo checks")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte-Carlo acceptance check, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(autouse=True)
def _global_params():
    saved = dict(rpf_global_params)
    yield
    rpf_global_params.clear()
    rpf_global_params.update(saved)


@pytest.fixture
def four_points():
    """Responses [1, 1, 3, 3] at x = 0.1, 0.2, 0.8, 0.9"""
    return Dataset(np.array([1.0, 1.0, 3.0, 3.0]), np.array([[0.1], [0.2], [0.8], [0.9]]))


@pytest.fixture
def additive_data():
    rng = np.random.default_rng(11)
    x = rng.uniform(-1.0, 1.0, (120, 3))
    y = np.sin(np.pi * x[:, 0]) + x[:, 1] ** 2 + 0.1 * rng.standard_normal(120)
    return Dataset(y, x)


@pytest.fixture
def xor_data():
    rng = np.random.default_rng(5)
    x = rng.uniform(-1.0, 1.0, (200, 2))
    y = np.sign(x[:, 0]) * np.sign(x[:, 1])
    return Dataset(y, x)
