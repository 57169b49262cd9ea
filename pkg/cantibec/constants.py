"""Physical constants and Casimir-Polder coefficients.

Everything inside the package is SI with angular frequencies in rad/s.
"""

from pydantic import BaseModel, ConfigDict, Field
from scipy import constants as sc

RB87_MASS = 86.909180527 * sc.atomic_mass  # [kg]


class PhysicalConstants(BaseModel):
    """Constants entering the potential, condensate and loss models."""

    model_config = ConfigDict(frozen=True)

    hbar: float = Field(default=sc.hbar, gt=0)
    boltzmann: float = Field(default=sc.Boltzmann, gt=0)
    light_speed: float = Field(default=sc.c, gt=0)
    vacuum_permittivity: float = Field(default=sc.epsilon_0, gt=0)
    rb87_mass: float = Field(default=RB87_MASS, gt=0)
    scattering_length: float = Field(default=5.4e-9, gt=0)
    polarizability: float = Field(default=5.26e-39, gt=0)  # F m^2
    three_body_coefficient: float = Field(default=1.8e-41, gt=0)  # m^6/s

    @property
    def planck(self) -> float:
        return 2 * sc.pi * self.hbar

    @property
    def coupling_constant(self) -> float:
        """Contact interaction g = 4 pi hbar^2 a_s / m."""
        return 4 * sc.pi * self.hbar**2 * self.scattering_length / self.rb87_mass


DEFAULT_CONSTANTS = PhysicalConstants()

# Dielectric face (SiN)
SIN_PERMITTIVITY = 4.0
SIN_PHI = 0.77


def cp_coefficient(constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Perfect-conductor coefficient C4 = 3 hbar c alpha / (32 pi^2 eps0), in J m^4."""
    return (
        3 * constants.hbar * constants.light_speed * constants.polarizability
        / (32 * sc.pi**2 * constants.vacuum_permittivity)
    )


def dielectric_cp_coefficient(
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
    permittivity: float = SIN_PERMITTIVITY,
    phi: float = SIN_PHI,
) -> float:
    """C4 reduced by (eps - 1)/(eps + 1) * Phi(eps) for a dielectric half space."""
    return cp_coefficient(constants) * (permittivity - 1) / (permittivity + 1) * phi


def hz_to_angular(frequency_hz: float) -> float:
    return 2 * sc.pi * frequency_hz
