"""Cantilever position and adsorbate coefficients from two-sided loss curves.

Loss curves are recorded against nominal distances that assume the
metallized face at z = 0 and the dielectric face at z = -t. The true face
position z_c and the adsorbate coefficients follow from three observations:
the chi = 0 onset on each side and the measured coupling asymmetry beta.
"""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import brentq

from cantibec.condensate import CondensateState
from cantibec.constants import DEFAULT_CONSTANTS, PhysicalConstants
from cantibec.coupling_dynamics import modulation_transfer
from cantibec.errors import (
    ConvergenceError,
    NeverVanishesError,
    TargetUnreachableError,
)
from cantibec.potential import (
    CombinedPotential,
    SurfaceSide,
    at_distance,
    characterize_trap,
    vanishing_distance,
)
from cantibec.surface_loss import LossCurve, LossModelConfig, loss_curve, onset_distance

logger = logging.getLogger(__name__)

BETA_TOLERANCE = 0.02
POSITIONING_RMS = 6e-9  # [m]
BETA_UNCERTAINTY = 0.6
TRANSFER_AMPLITUDE = 10e-9  # small-signal cantilever amplitude for beta [m]
MAX_DISTANCE = 50e-6  # [m]
QUADRATURE_PANELS = 16
CONTINUUM_SPACINGS = 10


class AdsorbatePatch(BaseModel):
    """Rectangular patch of surface dipoles, approximated by a line along its length.

    The dipoles point along the surface normal. ``patch_center`` is the
    lateral offset of the patch center from the point below the atoms.
    """

    model_config = ConfigDict(frozen=True)

    dipole_count: float = Field(default=8e6, ge=0)
    dipole_moment: float = Field(default=1e-29, gt=0)  # C m
    patch_length: float = Field(default=10e-6, gt=0)
    patch_width: float = Field(default=1e-6, gt=0)
    patch_center: float = 0.0


class AdsorbateField(BaseModel):
    model_config = ConfigDict(frozen=True)

    energy: float
    coefficient: float
    field_squared: float
    continuum: bool = False


class CalibrationResult(BaseModel):
    """Converged calibration.

    ``cantilever_position`` is the true metallized face position relative to
    its nominal position at z = 0.
    """

    model_config = ConfigDict(frozen=True)

    cantilever_position: float
    metallized_adsorbate: float
    dielectric_adsorbate: float
    predicted_beta: float
    iterations: int
    d_uncertainty: float
    metallized_onset: float
    dielectric_onset: float
    metallized_exponent: int
    dielectric_exponent: int


def adsorbate_potential(
    patch: AdsorbatePatch,
    distance: float,
    nodes: int = 32,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> AdsorbateField:
    """U_ad = -(alpha/2)|E|^2 of the dipole line at height ``distance`` above it.

    The field of the line is integrated with composite Gauss-Legendre
    quadrature (``QUADRATURE_PANELS`` panels of ``nodes`` points each).

    Args:
        patch: Dipole patch
        distance: Height of the atoms above the surface [m]
        nodes: Gauss-Legendre points per panel
        constants: Physical constants (polarizability, permittivity)

    Returns:
        Energy [J], the equivalent C_ad = -U_ad d^4 and |E|^2. ``continuum`` is
        set when the distance is within ten dipole spacings of the surface.
    """
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    if patch.dipole_count == 0:
        return AdsorbateField(energy=0.0, coefficient=0.0, field_squared=0.0)

    coulomb = 1 / (4 * math.pi * constants.vacuum_permittivity)
    line_density = patch.dipole_count * patch.dipole_moment / patch.patch_length
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(
        patch.patch_center - patch.patch_length / 2,
        patch.patch_center + patch.patch_length / 2,
        QUADRATURE_PANELS + 1,
    )
    e_z = 0.0
    e_x = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        s = 0.5 * (a + b) + half * x
        r2 = s**2 + distance**2
        r = np.sqrt(r2)
        e_z += half * np.sum(w * (3 * distance**2 / r2 - 1) / r**3)
        e_x += half * np.sum(w * (-3 * distance * s / r**5))
    e_z *= coulomb * line_density
    e_x *= coulomb * line_density
    field_squared = e_z**2 + e_x**2
    energy = -0.5 * constants.polarizability * field_squared

    spacing = math.sqrt(patch.patch_length * patch.patch_width / patch.dipole_count)
    continuum = distance < CONTINUUM_SPACINGS * spacing
    if continuum:
        logger.warning(f"d = {distance:.3g} m is within {CONTINUUM_SPACINGS} dipole spacings; line approximation is coarse")
    return AdsorbateField(
        energy=float(energy),
        coefficient=float(-energy * distance**4),
        field_squared=float(field_squared),
        continuum=continuum,
    )


def with_adsorbate(p: CombinedPotential, side: SurfaceSide | str, coefficient: float) -> CombinedPotential:
    """Copy of ``p`` with the adsorbate coefficient of one face replaced."""
    sides = tuple(
        face.model_copy(update={"adsorbate_coefficient": coefficient}) if face.label == side else face
        for face in p.sides
    )
    return p.model_copy(update={"sides": sides})


def with_cantilever_position(p: CombinedPotential, position: float) -> CombinedPotential:
    """Move the slab so the metallized face sits at ``position``."""
    shift = position - p.side(SurfaceSide.METALLIZED).position
    sides = tuple(face.model_copy(update={"position": face.position + shift}) for face in p.sides)
    return p.model_copy(update={"sides": sides})


def _depth_at(p: CombinedPotential, side: SurfaceSide | str, distance: float) -> float:
    return characterize_trap(at_distance(p, side, distance)).effective_depth


def distance_for_depth(p: CombinedPotential, side: SurfaceSide | str, depth: float) -> float:
    """Trap-to-face distance at which the trap depth equals ``depth``.

    Raises:
        TargetUnreachableError: no distance up to 50 um gives that depth
    """
    face = p.side(side)
    if not face.is_active:
        raise TargetUnreachableError(f"{face.label} face has no surface potential; depth is unbounded")
    lo = vanishing_distance(p, side)
    hi = max(2 * lo, 1e-6)
    while _depth_at(p, side, hi) < depth:
        hi *= 1.5
        if hi > MAX_DISTANCE:
            raise TargetUnreachableError(
                f"depth {depth:.4g} J not reached on the {face.label} side",
                attainable=(0.0, _depth_at(p, side, MAX_DISTANCE)),
            )
    try:
        return brentq(lambda d: _depth_at(p, side, d) - depth, lo, hi, xtol=1e-11)
    except (RuntimeError, ValueError) as e:
        raise ConvergenceError(f"depth matching failed on the {face.label} side: {e}") from e


def transfer_ratio(p: CombinedPotential, side: SurfaceSide | str, distance: float,
                   amplitude: float = TRANSFER_AMPLITUDE) -> float:
    """|dz_t| / a at small cantilever amplitude."""
    return abs(modulation_transfer(at_distance(p, side, distance), amplitude).delta_z_t) / amplitude


def predicted_beta(
    p_met: CombinedPotential,
    p_diel: CombinedPotential,
    depth: float,
    met_side: SurfaceSide | str = SurfaceSide.METALLIZED,
    diel_side: SurfaceSide | str = SurfaceSide.DIELECTRIC,
) -> float:
    """Ratio of the coupling dz_t/a on the two sides in traps of equal depth.

    Args:
        p_met: Model used for the metallized side
        p_diel: Model used for the dielectric side
        depth: Matched trap depth U_0 [J]
        met_side: Face of ``p_met`` to use
        diel_side: Face of ``p_diel`` to use
    """
    d_met = distance_for_depth(p_met, met_side, depth)
    d_diel = distance_for_depth(p_diel, diel_side, depth)
    beta = transfer_ratio(p_met, met_side, d_met) / transfer_ratio(p_diel, diel_side, d_diel)
    logger.debug(f"beta = {beta:.4f} at d_met = {d_met * 1e6:.3f} um, d_diel = {d_diel * 1e6:.3f} um")
    return beta


def _coefficient_scale(p: CombinedPotential, side: SurfaceSide | str) -> float:
    face = p.side(side)
    # C4 converted to the units of the face's power law at 1 um
    return face.cp_coefficient * (1e-6) ** (face.adsorbate_exponent - 4) if face.cp_coefficient else 1e-55


def coefficient_for_vanishing_distance(
    p: CombinedPotential,
    side: SurfaceSide | str,
    distance: float,
    resolution: float = 1e-9,
    rtol: float = 1e-3,
) -> float:
    """Adsorbate coefficient whose vanishing distance on ``side`` equals ``distance``.

    Brackets by factors of 4, then bisects in log space.

    Raises:
        TargetUnreachableError: even C_ad = 0 vanishes farther out than ``distance``
    """
    def vanishes_at(coefficient: float) -> float:
        try:
            return vanishing_distance(with_adsorbate(p, side, coefficient), side, resolution)
        except NeverVanishesError:
            return 0.0

    floor = vanishes_at(0.0)
    if floor >= distance:
        raise TargetUnreachableError(
            f"{side} side vanishes at {floor:.4g} m without adsorbates, beyond {distance:.4g} m",
            attainable=(floor, math.inf),
        )
    lo = hi = _coefficient_scale(p, side)
    if vanishes_at(hi) < distance:
        while vanishes_at(hi) < distance:
            lo, hi = hi, hi * 4
            if hi > 1e12 * _coefficient_scale(p, side):
                raise ConvergenceError(f"no adsorbate coefficient moves the {side} vanishing distance to {distance:.4g} m")
    else:
        while vanishes_at(lo) >= distance:
            lo, hi = lo / 4, lo
            if lo < 1e-12 * _coefficient_scale(p, side):
                return 0.0

    while math.log(hi / lo) > rtol:
        mid = math.sqrt(lo * hi)
        if vanishes_at(mid) < distance:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


def nominal_loss_curve(
    p: CombinedPotential,
    nominal_distances,
    side: SurfaceSide | str,
    state: CondensateState,
    cfg: LossModelConfig,
) -> LossCurve:
    """chi against nominal distance for a slab whose metallized face is at p's true position.

    Nominal distances assume the metallized face at z = 0.
    """
    side = SurfaceSide(side)
    z_c = p.side(SurfaceSide.METALLIZED).position
    shift = -z_c if side == SurfaceSide.METALLIZED else z_c
    nominal = [float(d) for d in nominal_distances]
    curve = loss_curve(p, [d + shift for d in nominal], state, cfg, side)
    return curve.model_copy(update={"distances": nominal})


class _Trial(BaseModel):
    dielectric_adsorbate: float
    metallized_adsorbate: float
    cantilever_position: float
    beta: float


def _trial(
    p: CombinedPotential,
    dielectric_adsorbate: float,
    met_onset: float,
    diel_onset: float,
    depth: float,
    resolution: float,
) -> _Trial:
    """One pass through the loop for a given dielectric coefficient."""
    p = with_adsorbate(p, SurfaceSide.DIELECTRIC, dielectric_adsorbate)
    z_c = vanishing_distance(p, SurfaceSide.DIELECTRIC, resolution) - diel_onset
    metallized = coefficient_for_vanishing_distance(p, SurfaceSide.METALLIZED, met_onset - z_c, resolution)
    p = with_adsorbate(p, SurfaceSide.METALLIZED, metallized)
    beta = predicted_beta(p, p, depth)
    logger.debug(
        f"C_diel = {dielectric_adsorbate:.4g}: z_c = {z_c * 1e9:.1f} nm, C_met = {metallized:.4g}, beta = {beta:.4f}"
    )
    return _Trial(
        dielectric_adsorbate=dielectric_adsorbate,
        metallized_adsorbate=metallized,
        cantilever_position=z_c,
        beta=beta,
    )


def calibrate(
    loss_met: LossCurve,
    loss_diel: LossCurve,
    beta_measured: float,
    p: CombinedPotential,
    depth: float | None = None,
    beta_tolerance: float = BETA_TOLERANCE,
    beta_uncertainty: float = BETA_UNCERTAINTY,
    positioning_rms: float = POSITIONING_RMS,
    resolution: float = 1e-9,
    max_iterations: int = 60,
) -> CalibrationResult:
    """Infer z_c and both adsorbate coefficients.

    For a trial dielectric coefficient the dielectric onset fixes z_c, the
    metallized onset then fixes the metallized coefficient, and the model
    predicts beta at matched depth. Beta falls as the dielectric coefficient
    grows, so the dielectric coefficient is bisected until beta agrees with
    the measurement.

    Args:
        loss_met: Metallized-side curve against nominal distance
        loss_diel: Dielectric-side curve against nominal distance
        beta_measured: Measured coupling ratio
        p: Model supplying the trap, thickness and power laws; its face
            positions and adsorbate coefficients are ignored
        depth: Matched depth for beta [J]; defaults to h x 50 kHz
        beta_tolerance: Relative beta agreement at convergence
        beta_uncertainty: Absolute beta uncertainty carried into d_uncertainty
        positioning_rms: Trap positioning reproducibility [m]
        resolution: Vanishing-distance resolution [m]
        max_iterations: Cap on bisection steps

    Raises:
        TargetUnreachableError: beta_measured outside the attainable range
        ConvergenceError: no agreement within ``max_iterations``
    """
    if beta_measured <= 0:
        raise ValueError(f"measured beta must be positive, got {beta_measured}")
    depth = depth if depth is not None else p.constants.planck * 50e3
    p = with_cantilever_position(p, 0.0)
    met_onset = onset_distance(loss_met)
    diel_onset = onset_distance(loss_diel)
    logger.info(f"onsets: metallized {met_onset * 1e9:.1f} nm, dielectric {diel_onset * 1e9:.1f} nm")

    def run(coefficient: float) -> _Trial | None:
        try:
            return _trial(p, coefficient, met_onset, diel_onset, depth, resolution)
        except TargetUnreachableError as e:
            logger.debug(f"C_diel = {coefficient:.4g} unreachable: {e}")
            return None

    history: list[_Trial] = []
    iterations = 0

    def converged(trial: _Trial) -> bool:
        return abs(trial.beta - beta_measured) <= beta_tolerance * beta_measured

    low = run(0.0)
    iterations += 1
    if low is None:
        raise TargetUnreachableError("metallized onset closer than the Casimir-Polder vanishing distance")
    history.append(low)
    if low.beta < beta_measured * (1 - beta_tolerance):
        raise TargetUnreachableError(
            f"measured beta {beta_measured:.3g} exceeds the largest attainable value",
            attainable=(0.0, low.beta),
        )

    best = low
    if not converged(low):
        lo = 0.0
        hi = _coefficient_scale(p, SurfaceSide.DIELECTRIC)
        while True:
            trial = run(hi)
            iterations += 1
            if trial is None or trial.beta < beta_measured:
                if trial is not None:
                    history.append(trial)
                break
            history.append(trial)
            lo, hi = hi, hi * 4
            if iterations > max_iterations:
                raise TargetUnreachableError(
                    f"measured beta {beta_measured:.3g} below every attainable value",
                    attainable=(trial.beta, low.beta),
                )
        best = min(history, key=lambda t: abs(t.beta - beta_measured))
        while not converged(best):
            if iterations >= max_iterations:
                raise ConvergenceError(f"beta did not converge in {max_iterations} iterations")
            mid = 0.5 * (lo + hi)
            trial = run(mid)
            iterations += 1
            if trial is None or trial.beta < beta_measured:
                hi = mid
            else:
                lo = mid
            if trial is not None:
                history.append(trial)
                if abs(trial.beta - beta_measured) < abs(best.beta - beta_measured):
                    best = trial

    uncertainty = _distance_uncertainty(history, best, positioning_rms, beta_uncertainty)
    logger.info(
        f"calibrated in {iterations} iterations: z_c = {best.cantilever_position * 1e9:.1f} nm, "
        f"beta = {best.beta:.3f}"
    )
    return CalibrationResult(
        cantilever_position=best.cantilever_position,
        metallized_adsorbate=best.metallized_adsorbate,
        dielectric_adsorbate=best.dielectric_adsorbate,
        predicted_beta=best.beta,
        iterations=iterations,
        d_uncertainty=uncertainty,
        metallized_onset=met_onset,
        dielectric_onset=diel_onset,
        metallized_exponent=p.side(SurfaceSide.METALLIZED).adsorbate_exponent,
        dielectric_exponent=p.side(SurfaceSide.DIELECTRIC).adsorbate_exponent,
    )


def _distance_uncertainty(history: list[_Trial], best: _Trial, positioning_rms: float, beta_uncertainty: float) -> float:
    """Positioning noise and beta uncertainty propagated through dz_c/dbeta, in quadrature."""
    others = [t for t in history if t is not best and t.beta != best.beta]
    slope = 0.0
    if others:
        nearest = min(others, key=lambda t: abs(t.beta - best.beta))
        slope = (nearest.cantilever_position - best.cantilever_position) / (nearest.beta - best.beta)
    return math.hypot(positioning_rms, slope * beta_uncertainty)


def calibration_report(result: CalibrationResult, cp_met: float, cp_diel: float) -> str:
    """Key-value block; coefficients are also given in units of the face's C4."""
    rows = [
        ("cantilever_position_nm", result.cantilever_position * 1e9),
        ("metallized_adsorbate", result.metallized_adsorbate),
        ("metallized_adsorbate_over_c4", result.metallized_adsorbate / cp_met if cp_met else math.nan),
        ("dielectric_adsorbate", result.dielectric_adsorbate),
        ("dielectric_adsorbate_over_c4d", result.dielectric_adsorbate / cp_diel if cp_diel else math.nan),
        ("predicted_beta", result.predicted_beta),
        ("iterations", result.iterations),
        ("d_uncertainty_nm", result.d_uncertainty * 1e9),
        ("metallized_onset_nm", result.metallized_onset * 1e9),
        ("dielectric_onset_nm", result.dielectric_onset * 1e9),
        ("metallized_exponent", result.metallized_exponent),
        ("dielectric_exponent", result.dielectric_exponent),
    ]
    lines = []
    for key, value in rows:
        text = str(value) if isinstance(value, int) else f"{value:.8e}"
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"
