import pytest

from perigid import ToleranceVault, fixtures


@pytest.fixture(scope="session")
def tol():
    return ToleranceVault()


@pytest.fixture(scope="session")
def catalog():
    return fixtures()


@pytest.fixture(scope="session")
def flex1(catalog):
    return catalog["flex1"]


@pytest.fixture(scope="session")
def flex2(catalog):
    return catalog["flex2"]


@pytest.fixture(scope="session")
def hexes(catalog):
    return catalog["hex"]


@pytest.fixture(scope="session")
def octagon(catalog):
    return catalog["octagon"]
