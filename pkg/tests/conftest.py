import numpy as np
import pytest

from flamefront.geometry import FrontState, build_frame, circle_markers
from flamefront.solver import PhysicalParams


@pytest.fixture
def theta6():
    return PhysicalParams(6.0)


@pytest.fixture
def star_frame():
    return build_frame(circle_markers(1.0, 256, modes=[(3, 0.15, 0.0)]))


def polar_front(n, radius=1.0, modes=(), psi=0.0, omega=0.0):
    return FrontState(circle_markers(radius, n, modes=modes), psi, omega)


def marker_angles(n):
    return 2.0 * np.pi * np.arange(n) / n
