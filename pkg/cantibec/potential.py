"""Combined magnetic + surface potential along the axis normal to the cantilever.

The magnetic trap is harmonic around ``z_t0``. Each cantilever face adds
``-C4/x**4 - C_ad/x**n`` where ``x`` is the distance from the atom to the
face, measured into the half space the face looks at. A cantilever
displacement shifts both faces rigidly.
"""

import logging
import math
from enum import StrEnum
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import brentq
from scipy.special import poch

from cantibec.constants import (
    DEFAULT_CONSTANTS,
    RB87_MASS,
    PhysicalConstants,
    cp_coefficient,
    dielectric_cp_coefficient,
)
from cantibec.errors import (
    ConvergenceError,
    NeverVanishesError,
    PotentialDomainError,
)
from cantibec.scan import ScanResult

logger = logging.getLogger(__name__)

GRID_STEP = 10e-9  # coarse bracketing grid [m]
ROOT_TOLERANCE = 1e-12  # [m]
CONTACT_RESOLUTION = 1e-9  # [m]


class SurfaceSide(StrEnum):
    """Cantilever faces."""
    METALLIZED = "metallized"
    DIELECTRIC = "dielectric"


class HarmonicTrap(BaseModel):
    """Magnetic trap, harmonic in all three directions.

    The z axis is normal to the cantilever; x is the weak axis of the cigar.
    """

    model_config = ConfigDict(frozen=True)

    omega_x: float = Field(gt=0)
    omega_y: float = Field(gt=0)
    omega_z0: float = Field(gt=0)
    center: float = 0.0
    atom_mass: float = Field(default=RB87_MASS, gt=0)

    @property
    def mean_frequency(self) -> float:
        return (self.omega_x * self.omega_y * self.omega_z0) ** (1 / 3)

    @property
    def radial_frequency(self) -> float:
        """Geometric mean of the two tight directions."""
        return math.sqrt(self.omega_y * self.omega_z0)

    @property
    def spring_constant(self) -> float:
        return self.atom_mass * self.omega_z0**2


class SurfaceSideModel(BaseModel):
    """One face of the cantilever.

    ``orientation`` is +1 when the face lies above the atoms it acts on and
    -1 when it lies below them.
    """

    model_config = ConfigDict(frozen=True)

    label: SurfaceSide
    position: float
    orientation: Literal[1, -1]
    cp_coefficient: float = Field(ge=0)
    adsorbate_coefficient: float = Field(default=0.0, ge=0)
    adsorbate_exponent: Literal[3, 4] = 4

    @property
    def outward(self) -> int:
        """Sign of dx/dz in the half space this face acts on."""
        return -self.orientation

    @property
    def is_active(self) -> bool:
        return self.cp_coefficient > 0 or self.adsorbate_coefficient > 0

    def distance(self, z, displacement: float = 0.0):
        return self.outward * (np.asarray(z, dtype=float) - (self.position + displacement))

    def terms(self) -> list[tuple[float, int]]:
        return [(self.cp_coefficient, 4), (self.adsorbate_coefficient, self.adsorbate_exponent)]


class CombinedPotential(BaseModel):
    """Harmonic trap plus one or two cantilever faces."""

    model_config = ConfigDict(frozen=True)

    trap: HarmonicTrap
    sides: tuple[SurfaceSideModel, ...] = Field(min_length=1, max_length=2)
    thickness: float = Field(default=0.0, ge=0)
    tunneling_depth_reduction: float = Field(default=0.0, ge=0)
    constants: PhysicalConstants = DEFAULT_CONSTANTS

    @model_validator(mode="after")
    def _check_slab(self) -> "CombinedPotential":
        if len(self.sides) == 2:
            a, b = self.sides
            if a.orientation == b.orientation:
                raise ValueError("the two faces of a slab must look in opposite directions")
            if not math.isclose(abs(a.position - b.position), self.thickness, rel_tol=1e-9, abs_tol=1e-15):
                raise ValueError("face positions must differ by the cantilever thickness")
        return self

    def side(self, label: SurfaceSide | str) -> SurfaceSideModel:
        for face in self.sides:
            if face.label == label:
                return face
        raise KeyError(f"no {label} face in this potential")

    def facing_side(self, displacement: float = 0.0) -> SurfaceSideModel:
        """The face whose half space contains the trap center."""
        for face in self.sides:
            if face.distance(self.trap.center, displacement) > 0:
                return face
        raise PotentialDomainError(f"trap center {self.trap.center:.6g} m lies inside the cantilever")

    def with_trap(self, **changes) -> "CombinedPotential":
        return self.model_copy(update={"trap": self.trap.model_copy(update=changes)})


class TrapCharacterization(BaseModel):
    """Minimum, frequency, barrier and depth of the deformed trap.

    ``depth`` is None and ``unbounded`` True when no surface acts on the
    atoms. All positional fields are None when the trap has vanished.
    """

    model_config = ConfigDict(frozen=True)

    exists: bool
    trap_minimum: float | None = None
    frequency: float | None = None
    barrier_position: float | None = None
    depth: float | None = None
    unbounded: bool = False

    @property
    def effective_depth(self) -> float:
        """Depth as a float, infinite for an unbounded trap and 0 when vanished."""
        if not self.exists:
            return 0.0
        if self.unbounded:
            return math.inf
        return self.depth


def cantilever_potential(
    trap: HarmonicTrap,
    cantilever_position: float,
    thickness: float = 450e-9,
    metallized_adsorbate: float = 0.0,
    dielectric_adsorbate: float = 0.0,
    metallized_exponent: Literal[3, 4] = 4,
    dielectric_exponent: Literal[3, 4] = 4,
    tunneling_depth_reduction: float = 0.0,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> CombinedPotential:
    """Build the two-sided cantilever model.

    The slab occupies ``[z_c - t, z_c]``. The metallized face sits at ``z_c``
    and looks up (+z); the dielectric face sits at ``z_c - t`` and looks down.

    Args:
        trap: Magnetic trap (its center fixes z_t0)
        cantilever_position: Metallized face position z_c [m]
        thickness: Slab thickness t [m]
        metallized_adsorbate: C_ad on the metallized face
        dielectric_adsorbate: C_ad on the dielectric face
        metallized_exponent: Power law of U_ad on the metallized face
        dielectric_exponent: Power law of U_ad on the dielectric face
        tunneling_depth_reduction: Subtracted from every trap depth [J]
        constants: Physical constants
    """
    metallized = SurfaceSideModel(
        label=SurfaceSide.METALLIZED,
        position=cantilever_position,
        orientation=-1,
        cp_coefficient=cp_coefficient(constants),
        adsorbate_coefficient=metallized_adsorbate,
        adsorbate_exponent=metallized_exponent,
    )
    dielectric = SurfaceSideModel(
        label=SurfaceSide.DIELECTRIC,
        position=cantilever_position - thickness,
        orientation=1,
        cp_coefficient=dielectric_cp_coefficient(constants),
        adsorbate_coefficient=dielectric_adsorbate,
        adsorbate_exponent=dielectric_exponent,
    )
    return CombinedPotential(
        trap=trap,
        sides=(metallized, dielectric),
        thickness=thickness,
        tunneling_depth_reduction=tunneling_depth_reduction,
        constants=constants,
    )


def _as_output(values: np.ndarray):
    return values if values.ndim else float(values)


def _facing_distances(p: CombinedPotential, z: np.ndarray, displacement: float):
    """Per-face distances plus the mask of points no face covers."""
    distances = [face.distance(z, displacement) for face in p.sides]
    covered = np.zeros(z.shape, dtype=bool)
    for dist in distances:
        covered |= dist > 0
    if not np.all(covered):
        bad = np.atleast_1d(z[~covered])[0]
        raise PotentialDomainError(
            f"z = {bad:.9g} m is inside the cantilever or on its surface "
            f"(displacement {displacement:.3g} m)"
        )
    return distances


def evaluate_potential(p: CombinedPotential, z, displacement: float = 0.0):
    """Total potential energy U(z) in joules.

    Args:
        p: Potential model
        z: Position(s) [m], scalar or array
        displacement: Rigid cantilever displacement [m]

    Raises:
        PotentialDomainError: z inside the slab or at a face
    """
    z = np.asarray(z, dtype=float)
    energy = 0.5 * p.trap.spring_constant * (z - p.trap.center) ** 2
    for face, dist in zip(p.sides, _facing_distances(p, z, displacement)):
        facing = dist > 0
        safe = np.where(facing, dist, 1.0)
        for coefficient, exponent in face.terms():
            if coefficient:
                energy = energy - np.where(facing, coefficient / safe**exponent, 0.0)
    if not np.all(np.isfinite(energy)):
        raise PotentialDomainError("potential is not finite (surface singularity)")
    return _as_output(energy)


def potential_derivatives(p: CombinedPotential, z, displacement: float = 0.0, order: int = 1):
    """Analytic derivative d^k U / dz^k for k in 1..3."""
    if order not in (1, 2, 3):
        raise ValueError(f"derivative order must be 1, 2 or 3, got {order}")
    z = np.asarray(z, dtype=float)
    k = p.trap.spring_constant
    if order == 1:
        value = k * (z - p.trap.center)
    elif order == 2:
        value = np.full(z.shape, k)
    else:
        value = np.zeros(z.shape)

    for face, dist in zip(p.sides, _facing_distances(p, z, displacement)):
        facing = dist > 0
        safe = np.where(facing, dist, 1.0)
        sign = face.outward**order
        for coefficient, exponent in face.terms():
            if not coefficient:
                continue
            # d^k/dx^k of -C x^-n is -C (-1)^k (n)_k x^-(n+k)
            term = -coefficient * (-1) ** order * poch(exponent, order) * safe ** -(exponent + order)
            value = value + np.where(facing, sign * term, 0.0)
    if not np.all(np.isfinite(value)):
        raise PotentialDomainError("derivative is not finite (surface singularity)")
    return _as_output(value)


def _refine_root(func, a: float, b: float) -> float:
    try:
        return brentq(func, a, b, xtol=ROOT_TOLERANCE)
    except (RuntimeError, ValueError) as e:
        raise ConvergenceError(f"root refinement failed in [{a:.6g}, {b:.6g}]: {e}") from e


def _stationary_points(p: CombinedPotential, displacement: float) -> tuple[list[float], list[float]]:
    """Minima and maxima (as distances from the facing face) between face and trap center."""
    face = p.facing_side(displacement)
    d0 = float(face.distance(p.trap.center, displacement))
    origin = face.position + displacement
    x_lo = min(CONTACT_RESOLUTION, d0 / 100)
    count = max(int(math.ceil((d0 - x_lo) / GRID_STEP)), 2) + 1
    x = np.linspace(x_lo, d0, count)

    def slope(xs):
        # dU/dx along the outward normal
        return face.outward * potential_derivatives(p, origin + face.outward * xs, displacement, order=1)

    values = slope(x)
    signs = np.sign(values)
    minima: list[float] = []
    maxima: list[float] = []
    for i in range(len(x) - 1):
        if signs[i] == 0:
            root = x[i]
        elif signs[i] * signs[i + 1] < 0:
            root = _refine_root(slope, x[i], x[i + 1])
        else:
            continue
        curvature = potential_derivatives(p, origin + face.outward * root, displacement, order=2)
        if curvature > 0:
            minima.append(root)
        elif curvature < 0:
            maxima.append(root)
    logger.debug(f"stationary points: {len(minima)} minima, {len(maxima)} maxima over {count} grid nodes")
    return minima, maxima


def characterize_trap(p: CombinedPotential, displacement: float = 0.0) -> TrapCharacterization:
    """Locate the trap minimum and barrier and compute frequency and depth.

    Args:
        p: Potential model
        displacement: Rigid cantilever displacement [m]

    Returns:
        TrapCharacterization with exists=False when no minimum/barrier pair remains.
    """
    face = p.facing_side(displacement)
    mass = p.trap.atom_mass
    if not face.is_active:
        return TrapCharacterization(
            exists=True,
            trap_minimum=p.trap.center,
            frequency=p.trap.omega_z0,
            unbounded=True,
        )

    minima, maxima = _stationary_points(p, displacement)
    if not minima:
        return TrapCharacterization(exists=False)
    x_t = max(minima)
    inner = [x for x in maxima if x < x_t]
    if not inner:
        return TrapCharacterization(exists=False)
    x_b = max(inner)

    origin = face.position + displacement
    z_t = origin + face.outward * x_t
    z_b = origin + face.outward * x_b
    curvature = potential_derivatives(p, z_t, displacement, order=2)
    depth = evaluate_potential(p, z_b, displacement) - evaluate_potential(p, z_t, displacement)
    depth = max(depth - p.tunneling_depth_reduction, 0.0)
    return TrapCharacterization(
        exists=True,
        trap_minimum=z_t,
        frequency=math.sqrt(curvature / mass),
        barrier_position=z_b,
        depth=depth,
    )


def at_distance(p: CombinedPotential, side: SurfaceSide | str, distance: float) -> CombinedPotential:
    """Move the trap center so the selected face is ``distance`` away."""
    face = p.side(side)
    return p.with_trap(center=face.position + face.outward * distance)


def vanishing_distance(
    p: CombinedPotential,
    side: SurfaceSide | str,
    resolution: float = CONTACT_RESOLUTION,
) -> float:
    """Largest trap-to-face distance at which the trap has vanished.

    Raises:
        NeverVanishesError: the trap survives down to contact resolution
    """
    face = p.side(side)
    if not face.is_active:
        raise NeverVanishesError(f"{face.label} face has no surface potential")

    def survives(d: float) -> bool:
        return characterize_trap(at_distance(p, side, d)).exists

    if survives(resolution):
        raise NeverVanishesError(f"trap survives at {resolution:.1e} m from the {face.label} face")

    lo, hi = resolution, 0.25e-6
    while not survives(hi):
        lo, hi = hi, hi * 2
        if hi > 1e-3:
            raise ConvergenceError(f"trap does not reappear within 1 mm of the {face.label} face")

    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if survives(mid):
            hi = mid
        else:
            lo = mid
    logger.debug(f"{face.label} vanishing distance {lo * 1e9:.1f} nm")
    return lo


def effective_thickness(p: CombinedPotential) -> float:
    """Width of the window where the trap has vanished on either face."""
    return (
        p.thickness
        + vanishing_distance(p, SurfaceSide.METALLIZED)
        + vanishing_distance(p, SurfaceSide.DIELECTRIC)
    )


def trap_for_frequency(p: CombinedPotential, omega_z: float, displacement: float = 0.0) -> CombinedPotential:
    """Retune omega_z0 so the trap seen by the atoms has frequency ``omega_z``."""

    def mismatch(omega_z0: float) -> float:
        char = characterize_trap(p.with_trap(omega_z0=omega_z0), displacement)
        return (char.frequency if char.exists else 0.0) - omega_z

    if mismatch(omega_z) >= 0:
        return p.with_trap(omega_z0=omega_z)
    hi = 1.5 * omega_z
    while mismatch(hi) < 0:
        hi *= 1.5
        if hi > 10 * omega_z:
            raise ConvergenceError(f"no trap frequency reaches {omega_z:.6g} rad/s at this distance")
    try:
        omega_z0 = brentq(mismatch, omega_z, hi, rtol=1e-10)
    except (RuntimeError, ValueError) as e:
        raise ConvergenceError(f"trap frequency matching failed: {e}") from e
    return p.with_trap(omega_z0=omega_z0)


def potential_profile(p: CombinedPotential, positions, displacement: float = 0.0) -> ScanResult:
    """U(z)/h along a grid of positions, skipping points inside the slab."""
    planck = p.constants.planck
    abscissa, observable = [], []
    for z in positions:
        try:
            energy = evaluate_potential(p, float(z), displacement)
        except PotentialDomainError:
            continue
        abscissa.append(float(z))
        observable.append(energy / planck)
    char = characterize_trap(p, displacement)
    metadata: dict[str, str | float | int] = {"exists": int(char.exists), "unbounded": int(char.unbounded)}
    if char.exists:
        metadata["trap_minimum_m"] = char.trap_minimum
        metadata["frequency_hz"] = char.frequency / (2 * math.pi)
        if not char.unbounded:
            metadata["barrier_position_m"] = char.barrier_position
            metadata["depth_hz"] = char.depth / planck
    return ScanResult(
        kind="potential",
        abscissa_label="z_m",
        observable_label="u_over_h_hz",
        abscissa=abscissa,
        observable=observable,
        metadata=metadata,
    )
