"""Fundamental flexural mode of the cantilever as a damped driven oscillator."""

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from cantibec.constants import DEFAULT_CONSTANTS, PhysicalConstants, hz_to_angular


class Cantilever(BaseModel):
    """Mechanical oscillator driven by a piezo.

    Attributes:
        resonance: Mode frequency omega_m [rad/s]
        quality: Quality factor Q = omega_m / (2 kappa)
        effective_mass: Mode mass M [kg]
        environment_temperature: Temperature of the support [K]
        drive_efficiency: On-resonance amplitude per volt peak-to-peak [m/Vpp]
    """

    model_config = ConfigDict(frozen=True)

    resonance: float = Field(gt=0)
    quality: float = Field(default=3100.0, gt=0.5)
    effective_mass: float = Field(default=5e-12, gt=0)
    environment_temperature: float = Field(default=300.0, ge=0)
    drive_efficiency: float = Field(default=80e-9, ge=0)


def reference_cantilever(resonance_hz: float = 10e3, **overrides) -> Cantilever:
    """SiN cantilever with a 5 ng mode mass and Q = 3100."""
    return Cantilever(resonance=hz_to_angular(resonance_hz), **overrides)


def nanotube(resonance_hz: float = 20e3, **overrides) -> Cantilever:
    """Carbon-nanotube resonator with a 2e-17 g mode mass."""
    return Cantilever(resonance=hz_to_angular(resonance_hz), effective_mass=2e-20, **overrides)


def decay_rate(c: Cantilever) -> float:
    """Amplitude decay rate kappa [1/s]."""
    return c.resonance / (2 * c.quality)


def resonant_amplitude(c: Cantilever, drive_vpp: float) -> float:
    if drive_vpp < 0:
        raise ValueError(f"drive voltage must be non-negative, got {drive_vpp}")
    return c.drive_efficiency * drive_vpp


def driven_amplitude(c: Cantilever, drive_vpp: float, omega_p):
    """Steady-state amplitude at drive frequency ``omega_p``.

    Lorentzian amplitude response normalized so that a(omega_m) equals
    ``drive_efficiency * drive_vpp``. The FWHM of a^2 is omega_m / Q.

    Args:
        c: Cantilever
        drive_vpp: Piezo drive [Vpp]
        omega_p: Drive frequency [rad/s], scalar or array

    Returns:
        Amplitude [m], same shape as ``omega_p``
    """
    a_res = resonant_amplitude(c, drive_vpp)
    w = np.asarray(omega_p, dtype=float)
    wm = c.resonance
    amplitude = a_res * (wm**2 / c.quality) / np.sqrt((wm**2 - w**2) ** 2 + (wm * w / c.quality) ** 2)
    return amplitude if amplitude.ndim else float(amplitude)


def static_response(c: Cantilever, drive_vpp: float) -> float:
    """Zero-frequency limit a_res / Q."""
    return resonant_amplitude(c, drive_vpp) / c.quality


def thermal_amplitude(c: Cantilever, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """r.m.s. thermal amplitude sqrt(k_B T / (M omega_m^2))."""
    return math.sqrt(constants.boltzmann * c.environment_temperature / (c.effective_mass * c.resonance**2))


def ground_state_amplitude(c: Cantilever, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Zero-point amplitude sqrt(hbar / (2 M omega_m))."""
    return math.sqrt(constants.hbar / (2 * c.effective_mass * c.resonance))
