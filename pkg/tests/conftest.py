import pytest

from soergel.coxeter import make_graph


@pytest.fixture(scope="session")
def a1():
    return make_graph(["s"])


@pytest.fixture(scope="session")
def a1xa1():
    return make_graph(["s", "r"])


@pytest.fixture(scope="session")
def dihedral():
    return make_graph(["s", "r"], [("s", "r")])


@pytest.fixture(scope="session")
def mixed():
    # m(s,r) = 2, m(r,t) = m(s,t) = infinity
    return make_graph(["s", "r", "t"], [("r", "t"), ("s", "t")])


@pytest.fixture(scope="session")
def all_systems(a1, a1xa1, dihedral, mixed):
    return {"a1": a1, "a1xa1": a1xa1, "dihedral": dihedral, "mixed": mixed}
