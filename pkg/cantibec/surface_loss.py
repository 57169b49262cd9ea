"""Static surface-induced atom loss: remaining fraction chi(d) and temperature fits.

With an undriven cantilever the atoms see a trap of depth U_0. The part of the
Boltzmann distribution above U_0 is lost when the trap is moved in, and the
remaining cloud evaporates over the hold time at rate Gamma(eta).
"""

import csv
import functools
import io
import logging
import math
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import minimize_scalar

from cantibec.condensate import (
    CondensateState,
    condensate_atoms_for_chemical_potential,
    elastic_collision_time,
    thermodynamics,
)
from cantibec.errors import (
    OutputError,
    PhysicsError,
    TargetUnreachableError,
    UnconstrainedFitError,
)
from cantibec.parallel import parallel_map
from cantibec.potential import (
    CombinedPotential,
    SurfaceSide,
    TrapCharacterization,
    at_distance,
    characterize_trap,
)
from cantibec.scan import FLAG_OK, format_number, write_text

logger = logging.getLogger(__name__)

CROSS_DIMENSIONAL_MIXING = 2.7  # collisions per rethermalization
RAW_RATE_VALID_ETA = 4.0
ONSET_THRESHOLD = 0.02

FLAG_VANISHED = "vanished"


class LossModelConfig(BaseModel):
    """Which refinements of the truncated-Boltzmann loss model to apply."""

    model_config = ConfigDict(frozen=True)

    bimodal: bool = False
    rate_cutoff: bool = False
    hold_time: float = Field(default=1e-3, ge=0)


class LossCurve(BaseModel):
    """Remaining fraction chi against trap-to-surface distance on one side."""

    side: SurfaceSide = SurfaceSide.METALLIZED
    distances: list[float]
    remaining_fraction: list[float]
    flags: list[str] = Field(default_factory=list)
    metadata: dict[str, str | float | int] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self) -> "LossCurve":
        n = len(self.distances)
        if len(self.remaining_fraction) != n:
            raise ValueError("distances and remaining_fraction differ in length")
        if self.flags and len(self.flags) != n:
            raise ValueError("flags and distances differ in length")
        if any(not 0.0 <= chi <= 1.0 for chi in self.remaining_fraction):
            raise ValueError("remaining fraction outside [0, 1]")
        if not self.flags:
            self.flags = [FLAG_OK] * n
        return self


class TemperatureFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    temperature: float
    reduced_temperature: float
    residual: float
    points: int


def truncation_factor(eta: float) -> float:
    """f(eta) = 2^(-5/2) (1 - 1/eta + 3/(2 eta^2)), positive for every eta > 0."""
    return 2**-2.5 * (1 - 1 / eta + 1.5 / eta**2)


def evaporation_rate(eta: float, tau_el: float, cutoff: bool = False) -> float:
    """One-dimensional evaporation rate Gamma(eta) [1/s].

    Args:
        eta: Truncation parameter U_0 / (k_B T)
        tau_el: Elastic collision time [s]
        cutoff: Cap the rate at the cross-dimensional mixing rate

    Raises:
        ValueError: eta <= 0 without cutoff (the raw form has no meaning there)
    """
    if tau_el <= 0:
        raise ValueError(f"collision time must be positive, got {tau_el}")
    if math.isinf(tau_el) or math.isinf(eta):
        return 0.0
    if eta <= 0:
        if not cutoff:
            raise ValueError(f"raw evaporation rate undefined for eta = {eta:.4g}; enable the rate cutoff")
        return 1.0 / (CROSS_DIMENSIONAL_MIXING * tau_el)

    weight = truncation_factor(eta) * math.exp(-eta)
    if not cutoff:
        return weight / tau_el
    if weight == 0:
        return 0.0
    return 1.0 / (tau_el * (1.0 / weight + CROSS_DIMENSIONAL_MIXING))


def _thermal_survival(eta: float, tau_el: float, cfg: LossModelConfig) -> float:
    if eta <= 0:
        return 0.0
    if math.isinf(eta):
        return 1.0
    rate = evaporation_rate(eta, tau_el, cfg.rate_cutoff)
    return -math.expm1(-eta) * math.exp(-rate * cfg.hold_time)


def remaining_fraction(char: TrapCharacterization, state: CondensateState, cfg: LossModelConfig) -> float:
    """Fraction chi of the atoms left after moving the trap in and holding it.

    The simple model treats the whole cloud as thermal. The bimodal model
    lowers the thermal barrier by mu_c and truncates the condensate to the
    atom number whose chemical potential equals U_0.
    """
    if not char.exists:
        return 0.0
    if char.unbounded:
        return 1.0
    depth = char.depth
    kt = state.constants.boltzmann * state.temperature
    tau_el = elastic_collision_time(state)

    if not cfg.bimodal:
        if depth <= 0:
            return 0.0
        eta = depth / kt if kt > 0 else math.inf
        return _thermal_survival(eta, tau_el, cfg)

    mu = state.chemical_potential
    n = state.total_atoms
    thermal = 0.0
    if state.thermal_atoms > 0:
        eta = (depth - mu) / kt if kt > 0 else math.inf
        thermal = state.thermal_atoms * _thermal_survival(eta, tau_el, cfg)
    condensed = state.condensate_atoms
    if depth < mu:
        condensed = condensate_atoms_for_chemical_potential(depth, state.trap, state.constants)
    return min(1.0, max(0.0, (thermal + condensed) / n))


def _characterize_at(p: CombinedPotential, side: SurfaceSide, distance: float) -> tuple[TrapCharacterization, str]:
    try:
        char = characterize_trap(at_distance(p, side, distance))
    except PhysicsError as e:
        logger.warning(f"characterization failed at d = {distance:.4g} m: {e}")
        return TrapCharacterization(exists=False), e.category
    return char, FLAG_OK if char.exists else FLAG_VANISHED


def characterize_family(
    p: CombinedPotential,
    distances,
    side: SurfaceSide | str = SurfaceSide.METALLIZED,
    workers: int = 1,
) -> tuple[list[TrapCharacterization], list[str]]:
    """Characterize the trap at each distance from ``side``.

    Returns the characterizations and a flag per point (``ok``, ``vanished``
    or the error category of a failed characterization).
    """
    side = SurfaceSide(side)
    results = parallel_map(functools.partial(_characterize_at, p, side), [float(d) for d in distances], workers)
    return [char for char, _ in results], [flag for _, flag in results]


def fractions_for(chars: list[TrapCharacterization], state: CondensateState, cfg: LossModelConfig) -> list[float]:
    return [remaining_fraction(c, state, cfg) for c in chars]


def _warn_raw_rate(chars: list[TrapCharacterization], state: CondensateState, cfg: LossModelConfig) -> None:
    if cfg.rate_cutoff or cfg.hold_time == 0 or state.temperature == 0:
        return
    kt = state.constants.boltzmann * state.temperature
    low = [c for c in chars if c.exists and not c.unbounded and 0 < c.depth < RAW_RATE_VALID_ETA * kt]
    if low:
        logger.warning(f"{len(low)} points have eta < {RAW_RATE_VALID_ETA:g}, outside the raw evaporation rate validity")


def _check_monotone(distances: list[float]) -> None:
    steps = np.diff(distances)
    if len(distances) and not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValueError("distance grid must be strictly monotone")


def loss_curve(
    p: CombinedPotential,
    distances,
    state: CondensateState,
    cfg: LossModelConfig,
    side: SurfaceSide | str = SurfaceSide.METALLIZED,
    workers: int = 1,
) -> LossCurve:
    """chi(d) with the trap center moved to each distance from ``side``.

    Points where the characterization fails are reported as chi = 0 and
    flagged with the error category.
    """
    distances = [float(d) for d in distances]
    _check_monotone(distances)
    side = SurfaceSide(side)
    chars, flags = characterize_family(p, distances, side, workers)
    _warn_raw_rate(chars, state, cfg)
    chi = fractions_for(chars, state, cfg)
    logger.info(f"loss curve on the {side} side: {len(distances)} points, {flags.count(FLAG_VANISHED)} vanished")
    return LossCurve(
        side=side,
        distances=distances,
        remaining_fraction=chi,
        flags=flags,
        metadata={
            "total_atoms": state.total_atoms,
            "temperature_k": state.temperature,
            "critical_temperature_k": state.critical_temperature,
            "hold_time_s": cfg.hold_time,
            "bimodal": int(cfg.bimodal),
            "rate_cutoff": int(cfg.rate_cutoff),
        },
    )


def fit_temperature(
    measured: LossCurve,
    p: CombinedPotential,
    total_atoms: float,
    cfg: LossModelConfig,
    bounds: tuple[float, float] | None = None,
    grid_points: int = 48,
    workers: int = 1,
) -> TemperatureFit:
    """Least-squares temperature reproducing a measured chi(d).

    The trap is characterized once per distance; only the loss model is
    re-evaluated for each trial temperature. A coarse logarithmic scan picks
    the basin and a bounded Brent search refines it.

    Args:
        measured: Measured curve (distances relative to ``measured.side``)
        p: Potential model used to regenerate the curve
        total_atoms: Atom number N
        cfg: Loss model refinements and hold time
        bounds: Temperature search interval [K]; defaults to (0.05, 4) T_c
        grid_points: Size of the coarse scan
        workers: Processes for the characterization

    Raises:
        UnconstrainedFitError: fewer than 5 points or a flat residual
    """
    if len(measured.distances) < 5:
        raise UnconstrainedFitError(f"temperature fit needs at least 5 points, got {len(measured.distances)}")
    chars, _ = characterize_family(p, measured.distances, measured.side, workers)
    target = np.asarray(measured.remaining_fraction)

    def residual(temperature: float) -> float:
        state = thermodynamics(total_atoms, temperature, p.trap, p.constants)
        model = np.asarray(fractions_for(chars, state, cfg))
        return float(np.sum((model - target) ** 2))

    t_c = thermodynamics(total_atoms, 0.0, p.trap, p.constants).critical_temperature
    lo, hi = bounds or (0.05 * t_c, 4.0 * t_c)
    grid = np.geomspace(lo, hi, grid_points)
    values = np.array([residual(t) for t in grid])
    if np.ptp(values) <= 1e-12:
        raise UnconstrainedFitError("residual is flat over the temperature interval")

    best = int(np.argmin(values))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, len(grid) - 1)]
    result = minimize_scalar(residual, bounds=(a, b), method="bounded", options={"xatol": 1e-7 * t_c})
    temperature, value = float(result.x), float(result.fun)
    if values[best] < value:
        temperature, value = float(grid[best]), float(values[best])
    logger.info(f"fitted T = {temperature:.4g} K = {temperature / t_c:.3f} T_c, residual {value:.3g}")
    return TemperatureFit(
        temperature=temperature,
        reduced_temperature=temperature / t_c,
        residual=value,
        points=len(measured.distances),
    )


def onset_distance(curve: LossCurve, threshold: float = ONSET_THRESHOLD) -> float:
    """Distance where the curve leaves chi = 0.

    The running maximum of chi, taken outward from the surface, gives a
    monotone envelope. The result is the interpolated crossing of
    ``threshold`` after the last envelope point below it.

    Raises:
        TargetUnreachableError: the curve never drops below or never rises above threshold
    """
    order = np.argsort(curve.distances)
    d = np.asarray(curve.distances)[order]
    envelope = np.maximum.accumulate(np.asarray(curve.remaining_fraction)[order])
    below = np.nonzero(envelope < threshold)[0]
    if len(below) == 0:
        raise TargetUnreachableError(f"loss curve never drops below chi = {threshold:g}")
    i = int(below[-1])
    if i == len(d) - 1:
        raise TargetUnreachableError(f"loss curve never recovers above chi = {threshold:g}")
    d0, d1 = d[i], d[i + 1]
    e0, e1 = envelope[i], envelope[i + 1]
    return float(d0 + (threshold - e0) * (d1 - d0) / (e1 - e0))


def loss_curve_csv_text(curve: LossCurve) -> str:
    buffer = io.StringIO()
    buffer.write(f"# side={curve.side}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["d_m", "chi", "flag"])
    for d, chi, flag in zip(curve.distances, curve.remaining_fraction, curve.flags):
        writer.writerow([format_number(d), format_number(chi), flag])
    return buffer.getvalue()


def write_loss_curve(curve: LossCurve, path: Path) -> Path:
    return write_text(Path(path), loss_curve_csv_text(curve))


def read_loss_curve(path: Path) -> LossCurve:
    """Read a ``d_m,chi,flag`` CSV written by :func:`write_loss_curve`.

    A ``# side=...`` comment selects the surface side (metallized by default).
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot read {path}: {e}") from e

    side = SurfaceSide.METALLIZED
    rows = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            if key.strip() == "side":
                side = SurfaceSide(value.strip())
            continue
        if line.strip():
            rows.append(line)
    reader = csv.DictReader(rows)
    distances, chi, flags = [], [], []
    try:
        for row in reader:
            distances.append(float(row["d_m"]))
            chi.append(float(row["chi"]))
            flags.append((row.get("flag") or FLAG_OK).strip())
        return LossCurve(side=side, distances=distances, remaining_fraction=chi, flags=flags)
    except (KeyError, TypeError, ValueError) as e:
        raise OutputError(f"malformed loss curve {path}: {e}") from e


