"""Atom-cantilever coupling through the surface potential.

A vibrating cantilever shifts the surface potential rigidly, which modulates
the trap position, frequency and depth. The quasi-static transfer gives the
modulation amplitudes; the ensemble simulation follows non-interacting
classical test particles in the time-dependent potential and counts the
ones that leave over the instantaneous barrier.
"""

import functools
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from cantibec.cantilever import Cantilever, driven_amplitude, resonant_amplitude
from cantibec.condensate import CondensateState, lifetime_budget, thermodynamics
from cantibec.errors import (
    CantibecError,
    ConvergenceError,
    OverDrivenError,
    TimeStepError,
    TrapVanishedError,
)
from cantibec.parallel import parallel_map
from cantibec.potential import (
    CombinedPotential,
    SurfaceSide,
    TrapCharacterization,
    at_distance,
    characterize_trap,
    evaluate_potential,
    potential_derivatives,
    trap_for_frequency,
)
from cantibec.scan import FLAG_OK, ScanResult, fit_lorentzian, linear_fit

logger = logging.getLogger(__name__)

MIN_STEPS_PER_PERIOD = 50
BARRIER_TABLE_POINTS = 9
MAX_REJECTIONS = 100_000
SATURATION_CONTRAST = 0.9
STATISTICAL_MINIMUM = 100


class EnsembleConfig(BaseModel):
    """Test-particle ensemble settings.

    ``time_step`` overrides ``steps_per_period``; either way the step must
    resolve the fastest of trap and drive frequency with at least 50 steps.
    """

    model_config = ConfigDict(frozen=True)

    particle_count: int = Field(default=2000, ge=1)
    steps_per_period: int = Field(default=64, ge=MIN_STEPS_PER_PERIOD)
    time_step: float | None = Field(default=None, gt=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    record_energy: bool = False


class ModulationTransfer(BaseModel):
    """Half peak-to-peak modulation of trap position, frequency and depth."""

    model_config = ConfigDict(frozen=True)

    delta_z_t: float
    delta_omega_z: float
    delta_depth: float


class Ensemble(BaseModel):
    """Positions [m] and velocities [m/s] of the test particles."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    z: np.ndarray
    v: np.ndarray
    condensed: np.ndarray

    @property
    def size(self) -> int:
        return len(self.z)


class EvolutionResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    survivor_fraction: float = Field(ge=0, le=1)
    dynamic_survivors: float = Field(ge=0, le=1)
    background_factor: float = Field(ge=0, le=1)
    steps: int
    time_step: float
    energy_times: list[float] = Field(default_factory=list)
    energy_history: list[float] = Field(default_factory=list)


class Contrast(BaseModel):
    model_config = ConfigDict(frozen=True)

    contrast: float
    snr: float
    negative: bool = False


class DetectionEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    tof_displacement: float
    zero_point_motion: float
    minimum_resolvable_amplitude: float | None = None


class CouplingSetup(BaseModel):
    """Everything a driven-ensemble scan needs besides its grid.

    ``potential`` already has the trap at the working distance from ``side``.
    ``noise`` is the atom-number noise sigma entering the SNR.
    """

    model_config = ConfigDict(frozen=True)

    potential: CombinedPotential
    cantilever: Cantilever
    state: CondensateState
    ensemble: EnsembleConfig = EnsembleConfig()
    side: SurfaceSide = SurfaceSide.METALLIZED
    hold_time: float = Field(default=3e-3, gt=0)
    drive_vpp: float = Field(default=1.5, ge=0)
    noise: float = Field(default=32.0, gt=0)
    background: bool = True


# ==============================================================================
# Quasi-static transfer
# ==============================================================================


def _characterize_stroke(p: CombinedPotential, amplitude: float) -> tuple[TrapCharacterization, TrapCharacterization]:
    face = p.facing_side(0.0)
    distance = float(face.distance(p.trap.center))
    if abs(amplitude) >= distance:
        raise OverDrivenError(f"amplitude {amplitude:.3g} m reaches the trap center at {distance:.3g} m")
    ends = []
    for displacement in (amplitude, -amplitude):
        char = characterize_trap(p, displacement)
        if not char.exists:
            raise OverDrivenError(f"trap vanishes at cantilever displacement {displacement:.3g} m")
        ends.append(char)
    return ends[0], ends[1]


def modulation_transfer(p: CombinedPotential, amplitude: float) -> ModulationTransfer:
    """Quasi-static modulation for cantilever amplitude ``amplitude``.

    Each output is half the difference between the trap characterized at
    displacement +a and at -a.

    Raises:
        OverDrivenError: the trap vanishes at one end of the stroke
    """
    if amplitude == 0:
        return ModulationTransfer(delta_z_t=0.0, delta_omega_z=0.0, delta_depth=0.0)
    plus, minus = _characterize_stroke(p, amplitude)
    depth_plus = 0.0 if plus.unbounded else plus.depth
    depth_minus = 0.0 if minus.unbounded else minus.depth
    return ModulationTransfer(
        delta_z_t=0.5 * (plus.trap_minimum - minus.trap_minimum),
        delta_omega_z=0.5 * (plus.frequency - minus.frequency),
        delta_depth=0.5 * (depth_plus - depth_minus),
    )


# ==============================================================================
# Ensemble
# ==============================================================================


def _particle_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def _sample_thermal(rng, p, displacement, z_t, u_lo, u_hi, outward, kt, mass, well_depth, u_t):
    sigma_v = math.sqrt(kt / mass)
    for _ in range(MAX_REJECTIONS):
        u = rng.uniform(u_lo, u_hi)
        z = z_t + outward * u
        energy = evaluate_potential(p, z, displacement) - u_t
        if rng.random() >= math.exp(-energy / kt):
            continue
        v = rng.normal(0.0, sigma_v)
        if energy + 0.5 * mass * v**2 >= well_depth:
            continue
        return z, v
    raise ConvergenceError("thermal rejection sampling failed; trap too shallow for the cloud temperature")


def _sample_condensed(rng, z_t, radius, u_lo, outward):
    if radius == 0:
        return z_t
    for _ in range(MAX_REJECTIONS):
        w = rng.uniform(-1.0, 1.0)
        if rng.random() >= (1 - w * w) ** 2 or radius * w <= u_lo:
            continue
        return z_t + outward * radius * w
    raise ConvergenceError("condensate sampling failed; Thomas-Fermi radius exceeds the well")


def sample_ensemble(
    p: CombinedPotential,
    state: CondensateState,
    cfg: EnsembleConfig,
    displacement: float = 0.0,
    char: TrapCharacterization | None = None,
) -> Ensemble:
    """Classical surrogate of the bimodal cloud.

    Thermal particles follow the Boltzmann distribution of the full potential,
    truncated to total energies below the barrier. Condensed particles sit
    at rest with the z marginal of the Thomas-Fermi profile. Particle ``i``
    draws from its own stream seeded by ``(seed, i)``.

    Raises:
        TrapVanishedError: no trap to fill
    """
    char = char or characterize_trap(p, displacement)
    if not char.exists:
        raise TrapVanishedError("cannot populate a vanished trap")
    if cfg.particle_count < STATISTICAL_MINIMUM:
        logger.warning(f"{cfg.particle_count} particles is below {STATISTICAL_MINIMUM}; statistics will be poor")

    face = p.facing_side(displacement)
    outward = face.outward
    z_t = char.trap_minimum
    mass = p.trap.atom_mass
    kt = state.constants.boltzmann * state.temperature
    u_t = evaluate_potential(p, z_t, displacement)

    # u is the displacement from z_t away from the facing surface
    contact = float(face.distance(z_t, displacement))
    u_lo = -0.999 * contact
    well_depth = math.inf
    if not char.unbounded:
        u_lo = outward * (char.barrier_position - z_t)
        well_depth = char.depth + p.tunneling_depth_reduction

    n = cfg.particle_count
    n_condensed = int(round(n * state.condensate_atoms / state.total_atoms))
    sigma = math.sqrt(kt / (mass * char.frequency**2)) if kt > 0 else 0.0
    u_lo_thermal = max(u_lo, -12 * sigma)
    u_hi_thermal = 12 * sigma

    z = np.empty(n)
    v = np.zeros(n)
    condensed = np.zeros(n, dtype=bool)
    for i in range(n):
        rng = _particle_rng(cfg.seed, i)
        if i < n_condensed or kt == 0:
            z[i] = _sample_condensed(rng, z_t, state.tf_radius_z, u_lo, outward)
            condensed[i] = True
        else:
            z[i], v[i] = _sample_thermal(
                rng, p, displacement, z_t, u_lo_thermal, u_hi_thermal, outward, kt, mass, well_depth, u_t
            )
    logger.debug(f"sampled {n} particles, {int(condensed.sum())} condensed")
    return Ensemble(z=z, v=v, condensed=condensed)


# ==============================================================================
# Time evolution
# ==============================================================================


def _time_step(cfg: EnsembleConfig, omega_max: float) -> float:
    period = 2 * math.pi / omega_max
    dt = cfg.time_step if cfg.time_step is not None else period / cfg.steps_per_period
    if dt > period / MIN_STEPS_PER_PERIOD * (1 + 1e-12):
        raise TimeStepError(
            f"time step {dt:.3g} s exceeds 1/{MIN_STEPS_PER_PERIOD} of the shortest period {period:.3g} s"
        )
    return dt


def _barrier_table(p: CombinedPotential, amplitude: float) -> tuple[np.ndarray, np.ndarray] | None:
    """Barrier position tabulated over the cantilever stroke, None when unbounded."""
    amplitude = abs(amplitude)
    displacements = np.linspace(-amplitude, amplitude, BARRIER_TABLE_POINTS) if amplitude else np.zeros(1)
    barriers = []
    for displacement in displacements:
        char = characterize_trap(p, float(displacement))
        if not char.exists:
            raise OverDrivenError(f"trap vanishes at cantilever displacement {displacement:.3g} m")
        if char.unbounded:
            return None
        barriers.append(char.barrier_position)
    return displacements, np.asarray(barriers)


def evolve_ensemble(
    p: CombinedPotential,
    c: Cantilever,
    drive_vpp: float,
    omega_p: float,
    particles: Ensemble,
    hold_time: float,
    cfg: EnsembleConfig,
    amplitude: float | None = None,
    background: bool = True,
) -> EvolutionResult:
    """Integrate every particle in U(z, t) with the cantilever at a(omega_p) sin(omega_p t).

    Velocity Verlet with a fixed step. A particle is lost once it is on the
    surface side of the instantaneous barrier and stays frozen from then on.
    The dynamic survivor fraction is multiplied by the background survival
    exp(-t_h / tau) of the near-surface lifetime.

    Args:
        p: Potential with the trap at its working distance
        c: Cantilever
        drive_vpp: Piezo drive [Vpp]
        omega_p: Drive frequency [rad/s]
        particles: Initial ensemble
        hold_time: Interaction time t_h [s]
        cfg: Ensemble settings
        amplitude: Cantilever amplitude [m], overrides the driven response
        background: Apply the background lifetime factor

    Raises:
        TimeStepError: step too coarse for trap or drive frequency
        OverDrivenError: the trap vanishes within the stroke
    """
    if amplitude is None:
        amplitude = driven_amplitude(c, drive_vpp, omega_p)
    rest = characterize_trap(p, 0.0)
    if not rest.exists:
        raise TrapVanishedError("no trap at the working distance")
    omega_z = rest.frequency
    dt = _time_step(cfg, max(omega_z, omega_p))
    steps = int(math.ceil(hold_time / dt - 1e-9))
    table = _barrier_table(p, amplitude)
    outward = p.facing_side(0.0).outward
    mass = p.trap.atom_mass

    def displacement_at(t: float) -> float:
        return amplitude * math.sin(omega_p * t)

    def lost(z: np.ndarray, disp: float) -> np.ndarray:
        if table is None:
            return np.zeros(z.shape, dtype=bool)
        barrier = np.interp(disp, table[0], table[1])
        return outward * (z - barrier) <= 0

    z = particles.z.copy()
    v = particles.v.copy()
    alive = ~lost(z, 0.0)
    acc = np.zeros_like(z)
    if alive.any():
        acc[alive] = -np.atleast_1d(potential_derivatives(p, z[alive], 0.0, order=1)) / mass

    record_every = max(1, int(round(2 * math.pi / omega_z / dt)))
    energy_times: list[float] = []
    energy_history: list[float] = []
    window: list[float] = []

    for step in range(1, steps + 1):
        t = step * dt
        disp = displacement_at(t)
        idx = np.nonzero(alive)[0]
        if len(idx) == 0:
            break
        z[idx] += v[idx] * dt + 0.5 * acc[idx] * dt * dt
        gone = lost(z[idx], disp)
        alive[idx[gone]] = False
        idx = idx[~gone]
        if len(idx) == 0:
            break
        new_acc = -np.atleast_1d(potential_derivatives(p, z[idx], disp, order=1)) / mass
        v[idx] += 0.5 * (acc[idx] + new_acc) * dt
        acc[idx] = new_acc

        if cfg.record_energy:
            energy = 0.5 * mass * v[idx] ** 2 + np.atleast_1d(evaluate_potential(p, z[idx], disp))
            window.append(float(np.mean(energy)))
            if len(window) == record_every:
                energy_times.append(t)
                energy_history.append(float(np.mean(window)))
                window.clear()

    dynamic = float(np.count_nonzero(alive)) / particles.size
    factor = math.exp(-hold_time / lifetime_budget(omega_z).lifetime) if background else 1.0
    logger.debug(
        f"evolved {particles.size} particles for {steps} steps at a = {amplitude:.3g} m, "
        f"omega_p = {omega_p:.6g} rad/s: {dynamic:.4f} survive"
    )
    return EvolutionResult(
        survivor_fraction=dynamic * factor,
        dynamic_survivors=dynamic,
        background_factor=factor,
        steps=steps,
        time_step=dt,
        energy_times=energy_times,
        energy_history=energy_history,
    )


def energy_drift(times, energies) -> float:
    """Secular energy drift over the record relative to the initial energy.

    The least-squares slope of E(t) times the record duration, divided by |E_0|.
    """
    times = np.asarray(times, dtype=float)
    energies = np.asarray(energies, dtype=float)
    if len(times) < 2:
        raise ValueError("energy drift needs at least two samples")
    slope = linear_fit(times, energies).slope
    return abs(slope * (times[-1] - times[0]) / energies[0])


# ==============================================================================
# Observables
# ==============================================================================


def contrast_and_snr(remaining: float, reference: float, sigma: float) -> Contrast:
    """C = (N_r - N_a)/N_r and SNR = (N_r - N_a)/sigma; negative contrast is flagged."""
    if reference <= 0:
        raise ValueError(f"reference atom number must be positive, got {reference}")
    if sigma <= 0:
        raise ValueError(f"noise must be positive, got {sigma}")
    signal = reference - remaining
    negative = signal < 0
    if negative:
        logger.info(f"negative contrast: N_a = {remaining:.4g} exceeds N_r = {reference:.4g}")
    return Contrast(contrast=signal / reference, snr=signal / sigma, negative=negative)


def detection_estimates(
    total_atoms: float,
    omega_z: float,
    alpha: float,
    tof: float,
    mass: float,
    hbar: float,
    transfer_ratio: float | None = None,
    hold_time: float | None = None,
) -> DetectionEstimate:
    """Time-of-flight displacement of a coherent c.o.m. state |alpha>.

    The released cloud moves by sqrt(2 hbar omega_z / (m N)) alpha t. With a
    transfer ratio dz_t/a and a hold time the minimum resolvable cantilever
    amplitude is reported too.
    """
    if total_atoms < 1:
        raise ValueError(f"atom number must be at least 1, got {total_atoms}")
    velocity = math.sqrt(2 * hbar * omega_z / (mass * total_atoms)) * alpha
    minimum = None
    if transfer_ratio is not None and hold_time is not None:
        minimum = minimum_resolvable_amplitude(transfer_ratio, total_atoms, omega_z, hold_time, mass, hbar)
    return DetectionEstimate(
        tof_displacement=velocity * tof,
        zero_point_motion=math.sqrt(hbar / (2 * mass * total_atoms * omega_z)),
        minimum_resolvable_amplitude=minimum,
    )


def minimum_resolvable_amplitude(
    transfer_ratio: float,
    total_atoms: float,
    omega_z: float,
    hold_time: float,
    mass: float,
    hbar: float,
) -> float:
    """Cantilever amplitude that drives the c.o.m. mode to alpha = 1 within ``hold_time``.

    Resonant linear response grows alpha(t) = dz_t omega_z t / (4 x_zpf) with
    x_zpf = sqrt(hbar / (2 m N omega_z)) and dz_t = transfer_ratio * a.
    """
    if transfer_ratio <= 0 or hold_time <= 0:
        raise ValueError("transfer ratio and hold time must be positive")
    x_zpf = math.sqrt(hbar / (2 * mass * total_atoms * omega_z))
    return 4 * x_zpf / (transfer_ratio * omega_z * hold_time)


# ==============================================================================
# Scans
# ==============================================================================


def _reference_and_driven(setup: CouplingSetup, p: CombinedPotential, state: CondensateState,
                          omega_p: float, amplitude: float | None) -> tuple[float, float]:
    """(driven, undriven) remaining atom numbers from the same seeded ensemble."""
    particles = sample_ensemble(p, state, setup.ensemble)
    driven = evolve_ensemble(
        p, setup.cantilever, setup.drive_vpp, omega_p, particles, setup.hold_time, setup.ensemble,
        amplitude=amplitude, background=setup.background,
    )
    reference = evolve_ensemble(
        p, setup.cantilever, 0.0, omega_p, particles, setup.hold_time, setup.ensemble,
        amplitude=0.0, background=setup.background,
    )
    if reference.survivor_fraction == 0:
        raise TrapVanishedError("no atoms survive the hold time even without drive")
    n = state.total_atoms
    return driven.survivor_fraction * n, reference.survivor_fraction * n


def _binomial_error(remaining: float, total: float, particles: int) -> float:
    f = min(max(remaining / total, 0.0), 1.0)
    return total * math.sqrt(f * (1 - f) / particles)


def _resonance_point(setup: CouplingSetup, omega_p: float) -> tuple[float, float, str]:
    try:
        particles = sample_ensemble(setup.potential, setup.state, setup.ensemble)
        result = evolve_ensemble(
            setup.potential, setup.cantilever, setup.drive_vpp, omega_p, particles,
            setup.hold_time, setup.ensemble, background=setup.background,
        )
    except CantibecError as e:
        logger.warning(f"resonance point {omega_p / (2 * math.pi):.6g} Hz failed: {e}")
        return math.nan, math.nan, f"{e.category}@{omega_p / (2 * math.pi):.6g}"
    n = setup.state.total_atoms
    remaining = result.survivor_fraction * n
    return remaining, _binomial_error(remaining, n, setup.ensemble.particle_count), FLAG_OK


def resonance_scan(setup: CouplingSetup, omega_p_grid, fit: bool = True, workers: int = 1) -> ScanResult:
    """Remaining atoms N_a against drive frequency, with an optional Lorentzian dip fit."""
    grid = [float(w) for w in omega_p_grid]
    points = parallel_map(functools.partial(_resonance_point, setup), grid, workers)
    observable = [n for n, _, _ in points]
    result = ScanResult(
        kind="resonance",
        abscissa_label="drive_frequency_hz",
        observable_label="remaining_atoms",
        abscissa=[w / (2 * math.pi) for w in grid],
        observable=observable,
        stderr=[s for _, s, _ in points],
        flags=[f for _, _, f in points],
        metadata={"cantilever_resonance_hz": setup.cantilever.resonance / (2 * math.pi)},
    )
    if fit:
        result.fit = fit_lorentzian(*result.usable_points(), dip=True)
        if result.fit is None:
            result.notes.append("fit-rejected")
    return result


def _amplitude_point(setup: CouplingSetup, amplitude: float) -> tuple[float, float, str]:
    try:
        driven, reference = _reference_and_driven(
            setup, setup.potential, setup.state, setup.cantilever.resonance, amplitude
        )
    except CantibecError as e:
        logger.warning(f"amplitude point {amplitude:.3g} m failed: {e}")
        return math.nan, math.nan, f"{e.category}@{amplitude:.6g}"
    c = contrast_and_snr(driven, reference, setup.noise)
    error = _binomial_error(driven, setup.state.total_atoms, setup.ensemble.particle_count) / reference
    return c.contrast, error, FLAG_OK


def amplitude_scan(setup: CouplingSetup, amplitudes, workers: int = 1) -> ScanResult:
    """Contrast C against cantilever amplitude on resonance, with a linear fit below saturation."""
    grid = [float(a) for a in amplitudes]
    if any(a < 0 for a in grid):
        raise ValueError("amplitudes must be non-negative")
    points = parallel_map(functools.partial(_amplitude_point, setup), grid, workers)
    contrast = [c for c, _, _ in points]
    result = ScanResult(
        kind="amplitude",
        abscissa_label="amplitude_m",
        observable_label="contrast",
        abscissa=grid,
        observable=contrast,
        stderr=[s for _, s, _ in points],
        flags=[f for _, _, f in points],
    )
    linear = [(a, c) for a, c in zip(*result.usable_points()) if c < SATURATION_CONTRAST]
    if len(linear) >= 2:
        result.linear = linear_fit([a for a, _ in linear], [c for _, c in linear])
    return result


def _distance_point(setup: CouplingSetup, observable: str, distance: float) -> tuple[float, str]:
    try:
        p = at_distance(setup.potential, setup.side, distance)
        amplitude = resonant_amplitude(setup.cantilever, setup.drive_vpp)
        driven, reference = _reference_and_driven(setup, p, setup.state, setup.cantilever.resonance, amplitude)
    except CantibecError as e:
        logger.warning(f"distance point {distance:.4g} m failed: {e}")
        return math.nan, f"{e.category}@{distance:.6g}"
    c = contrast_and_snr(driven, reference, setup.noise)
    return (c.snr if observable == "snr" else c.contrast), FLAG_OK


def distance_scan(setup: CouplingSetup, distances, observable: str = "contrast", workers: int = 1) -> ScanResult:
    """Contrast or SNR against trap-to-surface distance at resonant drive."""
    if observable not in ("contrast", "snr"):
        raise ValueError(f"unknown observable {observable!r}")
    grid = [float(d) for d in distances]
    points = parallel_map(functools.partial(_distance_point, setup, observable), grid, workers)
    return ScanResult(
        kind="distance",
        abscissa_label="distance_m",
        observable_label=observable,
        abscissa=grid,
        observable=[o for o, _ in points],
        flags=[f for _, f in points],
        metadata={"side": str(setup.side)},
    )


def _spectrum_point(setup: CouplingSetup, point: tuple[float, float]) -> tuple[float, str]:
    omega_z, distance = point
    try:
        p = trap_for_frequency(at_distance(setup.potential, setup.side, distance), omega_z)
        state = thermodynamics(setup.state.total_atoms, setup.state.temperature, p.trap, setup.state.constants)
        amplitude = resonant_amplitude(setup.cantilever, setup.drive_vpp)
        driven, reference = _reference_and_driven(setup, p, state, setup.cantilever.resonance, amplitude)
    except CantibecError as e:
        logger.warning(f"spectrum point {omega_z / (2 * math.pi):.6g} Hz failed: {e}")
        return math.nan, f"{e.category}@{omega_z / (2 * math.pi):.6g}"
    return contrast_and_snr(driven, reference, setup.noise).snr, FLAG_OK


def spectrum_scan(setup: CouplingSetup, omega_z_grid, distances, workers: int = 1) -> ScanResult:
    """SNR against trap frequency at a fixed cantilever drive.

    Each trap frequency comes with its own distance so that the reference
    atom number stays roughly constant across the scan.
    """
    grid = [float(w) for w in omega_z_grid]
    distances = [float(d) for d in distances]
    if len(grid) != len(distances):
        raise ValueError("spectrum scan needs one distance per trap frequency")
    points = parallel_map(functools.partial(_spectrum_point, setup), list(zip(grid, distances)), workers)
    return ScanResult(
        kind="spectrum",
        abscissa_label="trap_frequency_hz",
        observable_label="snr",
        abscissa=[w / (2 * math.pi) for w in grid],
        observable=[o for o, _ in points],
        flags=[f for _, f in points],
        metadata={"cantilever_resonance_hz": setup.cantilever.resonance / (2 * math.pi)},
    )
