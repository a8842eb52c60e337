import random

import pytest

from ibcnfc import ibe, pkg
from ibcnfc.curve import CurvePoint
from ibcnfc.field import PrimeModulus, find_group_prime


@pytest.fixture(scope="session")
def m11() -> PrimeModulus:
    m = find_group_prime(2, 4)
    assert (m.p, m.q) == (11, 3)
    return m


@pytest.fixture(scope="session")
def m59() -> PrimeModulus:
    m = find_group_prime(3, 6)
    assert (m.p, m.q) == (59, 5)
    return m


@pytest.fixture(scope="session")
def toy():
    """(params, master) at p = 59, q = 5."""
    return ibe.setup(3, 6, random.Random(4))


@pytest.fixture(scope="session")
def prod():
    """(params, master) at 512-bit p, 160-bit q."""
    return ibe.setup(160, 512, random.Random(512))


@pytest.fixture(scope="session")
def prod_state(prod):
    params, master = prod
    return pkg.PkgState(params, master, frozenset({b"demo-token", b"second-token"}))


@pytest.fixture(scope="session")
def toy_state(toy):
    params, master = toy
    return pkg.PkgState(params, master, frozenset({b"demo-token"}))


def point(m: PrimeModulus, x: int, y: int) -> CurvePoint:
    return CurvePoint.from_ints(x, y, m)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
