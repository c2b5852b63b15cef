import random

import pytest

from models import config
from models.builders import load_diagram


def pytest_addoption(parser):
    parser.addoption("--seed", type=int, default=config.DEFAULT_SEED, help="seed for randomized tests")
    parser.addoption("--runslow", action="store_true", default=False, help="run tests marked slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def seed(request):
    return request.config.getoption("--seed")


@pytest.fixture
def rng(seed):
    return random.Random(seed)


@pytest.fixture
def trefoil():
    return load_diagram("trefoil")


@pytest.fixture
def figure8():
    return load_diagram("figure8")


@pytest.fixture
def hopf():
    return load_diagram("hopf")
