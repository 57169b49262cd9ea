"""Shared fixtures: reference trap, cantilever and surface potentials."""

import math

import pytest

from cantibec.cantilever import reference_cantilever
from cantibec.constants import DEFAULT_CONSTANTS, cp_coefficient, dielectric_cp_coefficient
from cantibec.potential import HarmonicTrap, SurfaceSide, at_distance, cantilever_potential

TWO_PI = 2 * math.pi
C4 = cp_coefficient()
C4D = dielectric_cp_coefficient()


def trap(x_hz: float, y_hz: float, z_hz: float) -> HarmonicTrap:
    return HarmonicTrap(omega_x=TWO_PI * x_hz, omega_y=TWO_PI * y_hz, omega_z0=TWO_PI * z_hz)


@pytest.fixture
def constants():
    return DEFAULT_CONSTANTS


@pytest.fixture
def reference_trap():
    """0.8 x 10.4 x 10.5 kHz."""
    return trap(800, 10.4e3, 10.5e3)


@pytest.fixture
def coupling_trap():
    """0.8 x 10 x 10 kHz."""
    return trap(800, 10e3, 10e3)


@pytest.fixture
def reference_potential(reference_trap):
    """Reference trap 1.5 um from the metallized face, 130 C4 and 10 C4,d adsorbates."""
    p = cantilever_potential(
        reference_trap,
        cantilever_position=0.0,
        metallized_adsorbate=130 * C4,
        dielectric_adsorbate=10 * C4D,
    )
    return at_distance(p, SurfaceSide.METALLIZED, 1.5e-6)


@pytest.fixture
def cantilever():
    return reference_cantilever()
