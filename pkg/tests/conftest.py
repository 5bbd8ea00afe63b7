import functools

import pytest
from hypothesis import HealthCheck, settings

from specdec.catalog import catalog_names, load_structure
from specdec.decimation import decimate

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CATALOG = catalog_names()


@functools.lru_cache(maxsize=None)
def structure(name):
    return load_structure(name)


@functools.lru_cache(maxsize=None)
def decimation(name):
    return decimate(structure(name))


@pytest.fixture(scope="session")
def sg():
    return structure("sierpinski-gasket"), decimation("sierpinski-gasket")


@pytest.fixture(scope="session")
def interval():
    return structure("unit-interval"), decimation("unit-interval")


@pytest.fixture(scope="session")
def vicsek():
    return structure("vicsek"), decimation("vicsek")


@pytest.fixture(scope="session")
def tree():
    return structure("three-branch-tree"), decimation("three-branch-tree")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.result_line(n))
