import os

import pytest
from hypothesis import HealthCheck, settings

LONG = os.environ.get("SL4ZETA_LONG") == "1"

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def pytest_addoption(parser):
    parser.addoption("--long", action="store_true", default=False, help="run long-mode checks")


@pytest.fixture(scope="session")
def long_mode(request):
    return LONG or request.config.getoption("--long")


@pytest.fixture(scope="session")
def sl2():
    from sl4zeta.lattice import build_sl

    return build_sl(2)


@pytest.fixture(scope="session")
def sl3():
    from sl4zeta.lattice import build_sl

    return build_sl(3)


@pytest.fixture(scope="session")
def sl4():
    from sl4zeta.lattice import build_sl

    return build_sl(4)
