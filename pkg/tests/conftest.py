import numpy as np
import pytest


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run long validation tests (exchange-map radii)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def coupling_tables_ground():
    """Shared exchange tables for ground-state control couplings."""
    from donorgates.mace import default_coupling_tables
    return default_coupling_tables("1s")


@pytest.fixture(scope="session")
def coupling_tables_excited():
    from donorgates.mace import default_coupling_tables
    return default_coupling_tables("2ppm")


@pytest.fixture(scope="session")
def monolayer():
    from donorgates.presets import get_preset
    return get_preset("monolayer-inplane")
