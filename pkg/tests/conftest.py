import hypothesis
import numpy as np
import pytest

from app.core.world import World
from app.schemas import EngineConfig

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=200, deadline=None)
hypothesis.settings.load_profile("fast")


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run full experiments")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def make_world():
    """Factory for small empty worlds."""

    def _make(width=20, height=20, seed=0, **engine):
        return World(width, height, EngineConfig(**engine), np.random.default_rng(seed))

    return _make
