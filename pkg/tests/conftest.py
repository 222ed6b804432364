import pytest
from hypothesis import HealthCheck, settings

from apk.generators import gen_fibonacci_cps, gen_lattice
from apk.patternspace import Region

settings.register_profile("apk", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("apk")


@pytest.fixture(scope="session")
def fib_small():
    return gen_fibonacci_cps(Region((-500,), (500,)))


@pytest.fixture(scope="session")
def fib_big():
    return gen_fibonacci_cps(Region((-10_000,), (10_000,)))


@pytest.fixture(scope="session")
def ints():
    return gen_lattice(1, [[1]], Region((-1000,), (1000,)))


@pytest.fixture(scope="session")
def ints_small():
    return gen_lattice(1, [[1]], Region((-20,), (20,)))
