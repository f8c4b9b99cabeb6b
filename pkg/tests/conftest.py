import pytest

from twistorcount.lattice import build_diagonal_lattice, build_k3_lattice


@pytest.fixture(scope="session")
def k3():
    return build_k3_lattice()


@pytest.fixture(scope="session")
def i23():
    return build_diagonal_lattice(2, 3)


@pytest.fixture(scope="session")
def i12():
    return build_diagonal_lattice(1, 2)
