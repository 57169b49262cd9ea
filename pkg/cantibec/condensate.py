"""Bimodal cloud thermodynamics and condensate collective modes.

The condensate is treated in the Thomas-Fermi approximation of a 3D harmonic
trap. The thermal cloud is an ideal Bose gas above the ground state.
"""

import logging
import math

from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import minimize_scalar

from cantibec.constants import DEFAULT_CONSTANTS, PhysicalConstants
from cantibec.errors import ConvergenceError
from cantibec.potential import HarmonicTrap

logger = logging.getLogger(__name__)

CRITICAL_TEMPERATURE_PREFACTOR = 0.94

# Near-surface lifetime anchors (trap frequency [Hz], lifetime [s])
LIFETIME_ANCHORS = ((5e3, 55e-3), (10e3, 18e-3))
LIFETIME_RANGE_HZ = (3e3, 14e3)


class CondensateState(BaseModel):
    """Thermodynamic state of N atoms at temperature T in a harmonic trap."""

    model_config = ConfigDict(frozen=True)

    total_atoms: float = Field(gt=0)
    temperature: float = Field(ge=0)
    trap: HarmonicTrap
    critical_temperature: float = Field(gt=0)
    condensate_atoms: float = Field(ge=0)
    thermal_atoms: float = Field(ge=0)
    chemical_potential: float = Field(ge=0)
    tf_radius_z: float = Field(ge=0)
    mean_density: float = Field(ge=0)
    mean_square_density: float = Field(ge=0)
    thermal_mean_density: float = Field(ge=0)
    radial_energy_ratio: float = Field(gt=0, le=1)
    constants: PhysicalConstants = DEFAULT_CONSTANTS

    @property
    def condensate_fraction(self) -> float:
        return self.condensate_atoms / self.total_atoms

    @property
    def reduced_temperature(self) -> float:
        return self.temperature / self.critical_temperature


class LifetimeEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    lifetime: float = Field(gt=0)
    extrapolated: bool = False


def critical_temperature(
    total_atoms: float,
    trap: HarmonicTrap,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """k_B T_c = 0.94 hbar omega_bar N^(1/3)."""
    return (
        CRITICAL_TEMPERATURE_PREFACTOR * constants.hbar * trap.mean_frequency
        * total_atoms ** (1 / 3) / constants.boltzmann
    )


def oscillator_length(trap: HarmonicTrap, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    return math.sqrt(constants.hbar / (trap.atom_mass * trap.mean_frequency))


def chemical_potential(
    condensate_atoms: float,
    trap: HarmonicTrap,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """Thomas-Fermi chemical potential mu_c[N_c]."""
    if condensate_atoms <= 0:
        return 0.0
    a_bar = oscillator_length(trap, constants)
    return (
        0.5 * constants.hbar * trap.mean_frequency
        * (15 * condensate_atoms * constants.scattering_length / a_bar) ** 0.4
    )


def condensate_atoms_for_chemical_potential(
    mu: float,
    trap: HarmonicTrap,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """Inverse of :func:`chemical_potential`: the condensate size whose mu_c equals ``mu``."""
    if mu <= 0:
        return 0.0
    a_bar = oscillator_length(trap, constants)
    return a_bar / (15 * constants.scattering_length) * (2 * mu / (constants.hbar * trap.mean_frequency)) ** 2.5


def _thermal_mean_density(thermal_atoms: float, temperature: float, trap: HarmonicTrap, kb: float) -> float:
    if thermal_atoms <= 0 or temperature <= 0:
        return 0.0
    return (
        thermal_atoms * trap.mean_frequency**3
        * (trap.atom_mass / (2 * math.pi * kb * temperature)) ** 1.5
        / 2**1.5
    )


def _radial_ratio(condensate_atoms: float, trap: HarmonicTrap, constants: PhysicalConstants) -> float:
    """Variational Gaussian radial width with a 1D Thomas-Fermi axial profile.

    In units of hbar omega_perp and the radial oscillator length the energy
    per particle is 1/(2 s^2) + s^2/2 + (3/5) mu_1(s), where mu_1 is the
    chemical potential along x for the linear coupling g / (2 pi sigma^2).
    Kinetic over potential radial energy is then 1/s^4.
    """
    if condensate_atoms <= 0:
        return 1.0
    mass = trap.atom_mass
    omega_perp = trap.radial_frequency
    hbar = constants.hbar
    a_perp = math.sqrt(hbar / (mass * omega_perp))
    g = constants.coupling_constant

    def axial_mu(s: float) -> float:
        g1 = g / (2 * math.pi * (s * a_perp) ** 2)
        mu = (3 * condensate_atoms * g1 * trap.omega_x * math.sqrt(mass) / (4 * math.sqrt(2))) ** (2 / 3)
        return mu / (hbar * omega_perp)

    def energy(s: float) -> float:
        return 0.5 / s**2 + 0.5 * s**2 + 0.6 * axial_mu(s)

    # the interaction only ever widens the cloud, so s >= 1
    upper = 2.0
    while energy(upper * 1.01) < energy(upper):
        upper *= 2
        if upper > 1e4:
            raise ConvergenceError("radial width minimization did not bracket a minimum")
    result = minimize_scalar(energy, bounds=(1.0, upper), method="bounded", options={"xatol": 1e-10})
    if not result.success:
        raise ConvergenceError(f"radial width minimization failed: {result.message}")
    s = float(result.x)
    logger.debug(f"radial width {s:.6f} a_perp for N_c = {condensate_atoms:.4g}")
    return min(1.0, 1.0 / s**4)


def thermodynamics(
    total_atoms: float,
    temperature: float,
    trap: HarmonicTrap,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> CondensateState:
    """Split N atoms into condensate and thermal cloud and derive densities.

    Args:
        total_atoms: Atom number N
        temperature: Cloud temperature T [K]
        trap: Harmonic trap the cloud sits in
        constants: Physical constants

    Returns:
        CondensateState with all derived fields filled in

    Example:
        state = thermodynamics(2000, 0.0, HarmonicTrap(omega_x=..., omega_y=..., omega_z0=...))
    """
    if total_atoms <= 0:
        raise ValueError(f"atom number must be positive, got {total_atoms}")
    if temperature < 0:
        raise ValueError(f"temperature must be non-negative, got {temperature}")

    t_c = critical_temperature(total_atoms, trap, constants)
    thermal = min(total_atoms, total_atoms * (temperature / t_c) ** 3)
    condensed = total_atoms - thermal
    mu = chemical_potential(condensed, trap, constants)
    peak = mu / constants.coupling_constant

    return CondensateState(
        total_atoms=total_atoms,
        temperature=temperature,
        trap=trap,
        critical_temperature=t_c,
        condensate_atoms=condensed,
        thermal_atoms=thermal,
        chemical_potential=mu,
        tf_radius_z=math.sqrt(2 * mu / (trap.atom_mass * trap.omega_z0**2)),
        mean_density=4 / 7 * peak,
        mean_square_density=8 / 21 * peak**2,
        thermal_mean_density=_thermal_mean_density(thermal, temperature, trap, constants.boltzmann),
        radial_energy_ratio=_radial_ratio(condensed, trap, constants),
        constants=constants,
    )


def radial_energy_ratio(state: CondensateState) -> float:
    """E_kin,perp / E_pot,perp of the condensate, 1 for an ideal gas."""
    return state.radial_energy_ratio


def mode_spectrum(state: CondensateState) -> list[tuple[str, float]]:
    """Center-of-mass, m_l = 0 and |m_l| = 2 mode frequencies [rad/s]."""
    omega_z = state.trap.omega_z0
    return [
        ("com", omega_z),
        ("m0", 2 * omega_z),
        ("quadrupole", omega_z * math.sqrt(2 * (1 + radial_energy_ratio(state)))),
    ]


def three_body_rate(state: CondensateState) -> float:
    return state.constants.three_body_coefficient * state.mean_square_density


def collision_time(
    density: float,
    temperature: float,
    mass: float,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """Mean time between elastic collisions, 1/(sqrt(2) n sigma v_bar).

    Returns ``math.inf`` (collisionless) for zero density or temperature.
    """
    if density <= 0 or temperature <= 0:
        return math.inf
    cross_section = 8 * math.pi * constants.scattering_length**2
    mean_speed = math.sqrt(8 * constants.boltzmann * temperature / (math.pi * mass))
    return 1.0 / (math.sqrt(2) * density * cross_section * mean_speed)


def elastic_collision_time(state: CondensateState) -> float:
    """Elastic collision time of the thermal cloud; ``math.inf`` at T = 0."""
    if state.temperature == 0:
        logger.info("T = 0: cloud is collisionless")
        return math.inf
    return collision_time(state.thermal_mean_density, state.temperature, state.trap.atom_mass, state.constants)


def lifetime_budget(omega_z: float) -> LifetimeEstimate:
    """Near-surface background lifetime at trap frequency ``omega_z``.

    Power-law interpolation through the 5 kHz and 10 kHz anchors. Position
    noise heating scales as omega_z^4 and frequency noise as omega_z^2
    (see :func:`heating_scaling`); the measured lifetimes fall in between.
    """
    (f1, tau1), (f2, tau2) = LIFETIME_ANCHORS
    frequency = omega_z / (2 * math.pi)
    exponent = math.log(tau2 / tau1) / math.log(f2 / f1)
    lifetime = tau1 * (frequency / f1) ** exponent
    extrapolated = not (LIFETIME_RANGE_HZ[0] <= frequency <= LIFETIME_RANGE_HZ[1])
    if extrapolated:
        logger.warning(f"lifetime at {frequency:.4g} Hz is extrapolated outside {LIFETIME_RANGE_HZ} Hz")
    return LifetimeEstimate(lifetime=lifetime, extrapolated=extrapolated)


def depth_ratio(depth: float, state: CondensateState) -> float:
    """U_0 / mu_c."""
    if state.chemical_potential == 0:
        return math.inf
    return depth / state.chemical_potential


def heating_scaling(omega_z: float, omega_ref: float) -> tuple[float, float]:
    """(position-noise, frequency-noise) heating factors relative to ``omega_ref``."""
    ratio = omega_z / omega_ref
    return ratio**4, ratio**2
