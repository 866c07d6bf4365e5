import pytest

from homricci import builtin_space


@pytest.fixture(scope="session")
def g2():
    return builtin_space("G2_U2_long")


@pytest.fixture(scope="session")
def f4():
    return builtin_space("F4_SU3xSU2xU1")


@pytest.fixture(scope="session")
def e6():
    return builtin_space("E6_Sp3xSp1")
