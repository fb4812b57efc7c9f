import numpy as np
import pytest

from vectorheat import build_intrinsic_mesh, shapes


def make(shape):
    P, F = shape
    return build_intrinsic_mesh(F, P)


@pytest.fixture(scope="session")
def hexagon():
    return make(shapes.hexagon_fan())


@pytest.fixture(scope="session")
def ico2():
    return make(shapes.icosphere(2))


@pytest.fixture(scope="session")
def ico3():
    return make(shapes.icosphere(3))


@pytest.fixture(scope="session")
def grid10():
    return make(shapes.grid(10))


@pytest.fixture(scope="session")
def equilateral():
    return build_intrinsic_mesh([[0, 1, 2]], lengths={(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0})


def wrap(a):
    """Angle difference folded into [-pi, pi]."""
    return np.angle(np.exp(1j * np.asarray(a)))
