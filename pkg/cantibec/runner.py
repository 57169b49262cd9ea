"""Run scenarios and write their CSV, config and report files.

Each run writes into its output directory:

    <name>.csv      the result table
    <name>.cfg      the serialized scenario (enough to regenerate the run)
    <name>.report   key = value summary with the inputs hash and versions

Nothing time-dependent goes into any of them, so identical inputs give
byte-identical files.
"""

import csv
import hashlib
import io
import logging
import math
import platform
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np
from pydantic import BaseModel

import cantibec
from cantibec.calibration import (
    AdsorbatePatch,
    adsorbate_potential,
    calibrate,
    calibration_report,
    nominal_loss_curve,
    predicted_beta,
)
from cantibec.cantilever import ground_state_amplitude, nanotube, resonant_amplitude, thermal_amplitude
from cantibec.condensate import (
    LIFETIME_ANCHORS,
    depth_ratio,
    elastic_collision_time,
    heating_scaling,
    lifetime_budget,
    mode_spectrum,
    three_body_rate,
)
from cantibec.constants import cp_coefficient, dielectric_cp_coefficient, hz_to_angular
from cantibec.coupling_dynamics import (
    amplitude_scan,
    detection_estimates,
    distance_scan,
    minimum_resolvable_amplitude,
    modulation_transfer,
    resonance_scan,
    spectrum_scan,
)
from cantibec.errors import ConfigValidationError, OutputError, TrapVanishedError
from cantibec.parallel import worker_count
from cantibec.potential import SurfaceSide, characterize_trap, effective_thickness, potential_profile
from cantibec.scan import FLAG_OK, ScanResult, format_number, scan_csv_text, write_text
from cantibec.scenario import Scenario, ScanKind, scan_grid, serialize_config
from cantibec.surface_loss import (
    LossCurve,
    loss_curve,
    loss_curve_csv_text,
    read_loss_curve,
)

logger = logging.getLogger(__name__)

VERSIONED_PACKAGES = ("numpy", "scipy", "pydantic")


class RunOutcome(BaseModel):
    name: str
    kind: ScanKind
    outputs: list[str]
    summary: dict[str, str]


def inputs_hash(s: Scenario) -> str:
    return hashlib.sha256(serialize_config(s).encode("utf-8")).hexdigest()


def _package_version(name: str) -> str:
    try:
        return version(name)
    except PackageNotFoundError:
        return "unknown"


def _footer(s: Scenario) -> list[tuple[str, str]]:
    rows = [
        ("name", s.name),
        ("kind", str(s.kind)),
        ("seed", str(s.scenario.seed)),
        ("inputs_sha256", inputs_hash(s)),
        ("cantibec", cantibec.__version__),
    ]
    rows += [(name, _package_version(name)) for name in VERSIONED_PACKAGES]
    rows.append(("python", platform.python_version()))
    return rows


def _value_text(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_number(value)
    return str(value)


def _table_csv_text(rows: list[tuple[str, object]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["quantity", "value"])
    for key, value in rows:
        writer.writerow([key, _value_text(value)])
    return buffer.getvalue()


def _scan_summary(result: ScanResult) -> dict[str, str]:
    summary = {
        "points": str(len(result.abscissa)),
        "abscissa": result.abscissa_label,
        "observable": result.observable_label,
    }
    summary.update({key: _value_text(value) for key, value in result.metadata.items()})
    if result.fit is not None:
        summary["fit_center"] = format_number(result.fit.center)
        summary["fit_fwhm"] = format_number(result.fit.fwhm)
    if result.linear is not None:
        summary["linear_slope"] = format_number(result.linear.slope)
        summary["linear_r2"] = format_number(result.linear.r_squared)
    failed = [f for f in result.flags if f != FLAG_OK]
    if failed:
        summary["failed_points"] = " ".join(failed)
    if result.notes:
        summary["notes"] = " ".join(result.notes)
    return summary


def _curve_summary(curve: LossCurve) -> dict[str, str]:
    summary = {"points": str(len(curve.distances)), "side": str(curve.side)}
    summary.update({key: _value_text(value) for key, value in curve.metadata.items()})
    flagged = [f for f in curve.flags if f != FLAG_OK]
    if flagged:
        summary["flagged_points"] = str(len(flagged))
    return summary


# ==============================================================================
# Kinds
# ==============================================================================


def _distance_grid(s: Scenario) -> list[float]:
    return [d * 1e-6 for d in scan_grid(s.scan.d_start_um, s.scan.d_stop_um, s.scan.d_step_nm * 1e-3)]


def _run_potential(s: Scenario, workers: int) -> tuple[str, dict[str, str], dict[str, str]]:
    positions = np.linspace(s.scan.z_start_um, s.scan.z_stop_um, s.scan.z_points) * 1e-6
    result = potential_profile(s.potential_model(), positions)
    return scan_csv_text(result), _scan_summary(result), {}


def _run_loss_curve(s: Scenario, workers: int):
    curve = loss_curve(
        s.potential_model(), _distance_grid(s), s.state_model(), s.loss_model(), s.trap.side, workers
    )
    return loss_curve_csv_text(curve), _curve_summary(curve), {}


def _run_resonance(s: Scenario, workers: int):
    sc = s.scan
    detunings = scan_grid(sc.detuning_start_hz, sc.detuning_stop_hz, sc.detuning_step_hz)
    grid = [hz_to_angular(s.cantilever.resonance_hz + delta) for delta in detunings]
    result = resonance_scan(s.coupling_setup(), grid, fit=sc.fit, workers=workers)
    return scan_csv_text(result), _scan_summary(result), {}


def _run_amplitude(s: Scenario, workers: int):
    sc = s.scan
    amplitudes = [a * 1e-9 for a in scan_grid(sc.amplitude_start_nm, sc.amplitude_stop_nm, sc.amplitude_step_nm)]
    result = amplitude_scan(s.coupling_setup(), amplitudes, workers=workers)
    return scan_csv_text(result), _scan_summary(result), {}


def _run_distance(s: Scenario, workers: int):
    result = distance_scan(s.coupling_setup(), _distance_grid(s), observable=s.scan.observable, workers=workers)
    return scan_csv_text(result), _scan_summary(result), {}


def _run_spectrum(s: Scenario, workers: int):
    sc = s.scan
    if not sc.trap_frequencies_hz:
        raise ConfigValidationError("spectrum scan needs trap_frequencies_hz and distances_um", "scan.trap_frequencies_hz")
    grid = [hz_to_angular(f) for f in sc.trap_frequencies_hz]
    result = spectrum_scan(s.coupling_setup(), grid, [d * 1e-6 for d in sc.distances_um], workers=workers)
    return scan_csv_text(result), _scan_summary(result), {}


def _measured_curves(s: Scenario) -> tuple[LossCurve, LossCurve, dict[str, str]]:
    """Curves from files, or synthesized from the scenario's own surface model."""
    sc = s.scan
    extra: dict[str, str] = {}
    curves = []
    for side, path in ((SurfaceSide.METALLIZED, sc.metallized_curve), (SurfaceSide.DIELECTRIC, sc.dielectric_curve)):
        if path:
            curve = read_loss_curve(Path(path))
        else:
            curve = nominal_loss_curve(s.potential_model(), _distance_grid(s), side, s.state_model(), s.loss_model())
            extra[f"{s.name}.{side}.csv"] = loss_curve_csv_text(curve)
        curves.append(curve)
    return curves[0], curves[1], extra


def _run_calibrate(s: Scenario, workers: int):
    constants = s.constants_model()
    p = s.potential_model()
    depth = constants.planck * s.scan.depth_khz * 1e3
    loss_met, loss_diel, extra = _measured_curves(s)
    beta = s.scan.beta
    if beta is None:
        beta = predicted_beta(p, p, depth)
        logger.info(f"no measured beta given; using the model's {beta:.4f}")
    result = calibrate(loss_met, loss_diel, beta, p, depth=depth, beta_tolerance=s.scan.beta_tolerance)
    block = calibration_report(result, cp_coefficient(constants), dielectric_cp_coefficient(constants))
    rows = [tuple(line.split(" = ", 1)) for line in block.splitlines()]
    rows.insert(0, ("beta_measured", beta))
    summary = {key: _value_text(value) for key, value in rows}
    return _table_csv_text(rows), summary, extra


def _run_estimates(s: Scenario, workers: int):
    constants = s.constants_model()
    h = constants.planck
    p = s.potential_model()
    state = s.state_model()
    char = characterize_trap(p)
    if not char.exists:
        raise TrapVanishedError(f"no trap at {s.trap.distance_um} um from the {s.trap.side} face")
    cantilever = s.cantilever_model()
    amplitude = resonant_amplitude(cantilever, s.cantilever.drive_vpp)
    transfer = modulation_transfer(p, amplitude)
    omega_z = char.frequency
    sc = s.scan
    detection = detection_estimates(
        sc.detection_atoms, hz_to_angular(sc.detection_frequency_hz), sc.alpha, sc.tof_ms * 1e-3,
        constants.rb87_mass, constants.hbar,
    )
    ratio = abs(transfer.delta_z_t) / amplitude if amplitude > 0 else math.nan
    minimum = (
        minimum_resolvable_amplitude(ratio, state.total_atoms, omega_z, s.ensemble.hold_time_ms * 1e-3,
                                     constants.rb87_mass, constants.hbar)
        if ratio > 0 else math.nan
    )
    modes = dict(mode_spectrum(state))
    lifetime = lifetime_budget(omega_z)
    position_noise, frequency_noise = heating_scaling(omega_z, hz_to_angular(LIFETIME_ANCHORS[0][0]))
    patch = AdsorbatePatch(
        dipole_count=sc.dipoles,
        dipole_moment=sc.dipole_moment,
        patch_length=sc.patch_length_um * 1e-6,
        patch_width=sc.patch_width_um * 1e-6,
    )
    adsorbate = adsorbate_potential(patch, s.trap.distance_um * 1e-6, constants=constants)
    tube = nanotube(environment_temperature=s.cantilever.temperature_k)

    depth = char.effective_depth
    rows: list[tuple[str, object]] = [
        ("trap_frequency_hz", omega_z / (2 * math.pi)),
        ("trap_minimum_shift_nm", abs(p.trap.center - char.trap_minimum) * 1e9),
        ("trap_depth_hz", depth / h),
        ("depth_over_chemical_potential", depth_ratio(depth, state)),
        ("effective_thickness_um", effective_thickness(p) * 1e6),
        ("drive_amplitude_nm", amplitude * 1e9),
        ("delta_z_t_nm", transfer.delta_z_t * 1e9),
        ("delta_omega_z_hz", transfer.delta_omega_z / (2 * math.pi)),
        ("delta_depth_hz", transfer.delta_depth / h),
        ("critical_temperature_nk", state.critical_temperature * 1e9),
        ("condensate_atoms", state.condensate_atoms),
        ("chemical_potential_hz", state.chemical_potential / h),
        ("tf_radius_z_nm", state.tf_radius_z * 1e9),
        ("mean_density_cm3", state.mean_density * 1e-6),
        ("three_body_rate_hz", three_body_rate(state)),
        ("elastic_collision_time_ms", elastic_collision_time(state) * 1e3),
        ("quadrupole_over_omega_z", modes["quadrupole"] / modes["com"]),
        ("background_lifetime_ms", lifetime.lifetime * 1e3),
        ("background_lifetime_extrapolated", lifetime.extrapolated),
        ("position_noise_heating_factor", position_noise),
        ("frequency_noise_heating_factor", frequency_noise),
        ("cantilever_thermal_amplitude_nm", thermal_amplitude(cantilever, constants) * 1e9),
        ("cantilever_ground_state_amplitude_m", ground_state_amplitude(cantilever, constants)),
        ("nanotube_thermal_amplitude_um", thermal_amplitude(tube, constants) * 1e6),
        ("nanotube_ground_state_amplitude_nm", ground_state_amplitude(tube, constants) * 1e9),
        ("tof_displacement_m", detection.tof_displacement),
        ("zero_point_motion_m", detection.zero_point_motion),
        ("minimum_resolvable_amplitude_nm", minimum * 1e9),
        ("adsorbate_equivalent_c4", adsorbate.coefficient / cp_coefficient(constants)),
    ]
    summary = {key: _value_text(value) for key, value in rows}
    return _table_csv_text(rows), summary, {}


RUNNERS = {
    ScanKind.POTENTIAL: _run_potential,
    ScanKind.LOSS_CURVE: _run_loss_curve,
    ScanKind.RESONANCE: _run_resonance,
    ScanKind.AMPLITUDE: _run_amplitude,
    ScanKind.DISTANCE: _run_distance,
    ScanKind.SPECTRUM: _run_spectrum,
    ScanKind.CALIBRATE: _run_calibrate,
    ScanKind.ESTIMATES: _run_estimates,
}


def run_scenario(s: Scenario, output_dir: Path | None = None, workers: int | None = None) -> RunOutcome:
    """Run one scenario and write its files.

    Args:
        s: Validated scenario
        output_dir: Overrides ``[scenario] output``
        workers: Overrides ``[scenario] workers``; capped by CANTIBEC_THREADS

    Returns:
        Output paths and the key-value summary written to the report

    Raises:
        CantibecError: physics failures (exit 2) and I/O failures (exit 3)
    """
    directory = Path(output_dir) if output_dir is not None else Path(s.scenario.output)
    workers = worker_count(workers if workers is not None else s.scenario.workers)
    logger.info(f"running {s.name} ({s.kind}) with {workers} worker(s) into {directory}")

    body, summary, extra = RUNNERS[s.kind](s, workers)

    outputs = [write_text(directory / f"{s.name}.csv", body)]
    for filename, text in extra.items():
        outputs.append(write_text(directory / filename, text))
    outputs.append(write_text(directory / f"{s.name}.cfg", serialize_config(s)))

    lines = [f"{key} = {value}" for key, value in summary.items()]
    lines.append("")
    lines += [f"{key} = {value}" for key, value in _footer(s)]
    outputs.append(write_text(directory / f"{s.name}.report", "\n".join(lines) + "\n"))

    logger.info(f"wrote {len(outputs)} files for {s.name}")
    return RunOutcome(name=s.name, kind=s.kind, outputs=[str(path) for path in outputs], summary=summary)


def _read_report(path: Path) -> dict[str, str]:
    values = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        key, sep, value = line.partition(" = ")
        if sep:
            values[key.strip()] = value.strip()
    return values


def report(output_dir: Path) -> str:
    """One block per run found in ``output_dir``.

    Raises:
        OutputError: the directory is missing or holds no reports
    """
    directory = Path(output_dir)
    if not directory.is_dir():
        raise OutputError(f"{directory} is not a directory")
    reports = sorted(directory.glob("*.report"))
    if not reports:
        raise OutputError(f"no .report files in {directory}")

    blocks = []
    for path in reports:
        try:
            values = _read_report(path)
        except OSError as e:
            raise OutputError(f"cannot read {path}: {e}") from e
        name = values.get("name", path.stem)
        tables = sorted(p.name for p in directory.glob(f"{name}*.csv"))
        head = f"{name}: kind={values.get('kind', '?')} seed={values.get('seed', '?')}"
        lines = [head, f"  inputs_sha256 = {values.get('inputs_sha256', '?')}", f"  tables = {', '.join(tables)}"]
        for key in ("points", "fit_center", "fit_fwhm", "linear_r2", "trap_depth_hz",
                    "cantilever_position_nm", "predicted_beta", "flags"):
            if key in values:
                lines.append(f"  {key} = {values[key]}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
