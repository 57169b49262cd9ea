"""Scenario configuration: flat ``key = value`` files with ``[section]`` headers.

Units are part of the key names (``omega_z_hz``, ``d_start_um``,
``temperature_nk`` ...). They are converted to SI and rad/s exactly once,
by the ``*_model`` helpers on :class:`Scenario`.
"""

import configparser
import logging
import math
import re
from enum import StrEnum
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from cantibec.cantilever import Cantilever
from cantibec.condensate import CondensateState, critical_temperature, thermodynamics
from cantibec.constants import PhysicalConstants, cp_coefficient, dielectric_cp_coefficient, hz_to_angular
from cantibec.coupling_dynamics import CouplingSetup, EnsembleConfig
from cantibec.errors import ConfigParseError, ConfigValidationError
from cantibec.potential import (
    CombinedPotential,
    HarmonicTrap,
    SurfaceSide,
    at_distance,
    cantilever_potential,
    trap_for_frequency,
)
from cantibec.surface_loss import LossModelConfig

logger = logging.getLogger(__name__)


class ScanKind(StrEnum):
    """What a scenario computes."""
    POTENTIAL = "potential"
    LOSS_CURVE = "loss-curve"
    RESONANCE = "resonance"
    AMPLITUDE = "amplitude"
    DISTANCE = "distance"
    SPECTRUM = "spectrum"
    CALIBRATE = "calibrate"
    ESTIMATES = "estimates"


class Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class ScenarioSection(Section):
    name: str = Field(default="scenario", min_length=1, description="Run name, used for output file names")
    kind: ScanKind = Field(description="One of: " + ", ".join(k.value for k in ScanKind))
    seed: int = Field(default=0, ge=0, lt=2**64, description="Random seed for ensemble sampling")
    output: str = Field(default="output", description="Output directory")
    workers: int = Field(default=1, ge=1, description="Worker processes for grid scans")

    @field_validator("name")
    @classmethod
    def _file_safe(cls, value: str) -> str:
        if not re.fullmatch(r"[A-Za-z0-9_.-]+", value):
            raise ValueError("name may only contain letters, digits, '_', '.' and '-'")
        return value


class ConstantsSection(Section):
    scattering_length_nm: float = Field(default=5.4, gt=0, description="s-wave scattering length a_s")
    polarizability: float = Field(default=5.26e-39, gt=0, description="Ground-state polarizability [F m^2]")
    three_body_coefficient: float = Field(default=1.8e-41, gt=0, description="Three-body loss coefficient L [m^6/s]")


class TrapSection(Section):
    omega_x_hz: float = Field(default=800.0, gt=0, description="Axial trap frequency / 2 pi")
    omega_y_hz: float = Field(default=10.4e3, gt=0, description="Radial trap frequency parallel to the surface / 2 pi")
    omega_z_hz: float = Field(default=10.5e3, gt=0, description="Unperturbed trap frequency normal to the surface / 2 pi")
    distance_um: float = Field(default=1.5, gt=0, description="Trap-to-surface distance d")
    side: SurfaceSide = Field(default=SurfaceSide.METALLIZED, description="Face the atoms look at")
    frequency_at_distance: bool = Field(
        default=False, description="omega_z_hz is the frequency seen at distance_um rather than the bare trap"
    )


class SurfaceSection(Section):
    cantilever_position_nm: float = Field(default=0.0, description="Metallized face position z_c")
    thickness_nm: float = Field(default=450.0, ge=0, description="Cantilever thickness t")
    metallized_adsorbate_c4: float = Field(
        default=130.0, ge=0, description="Metallized C_ad in units of C4 (C4 per um for exponent 3)"
    )
    dielectric_adsorbate_c4d: float = Field(
        default=10.0, ge=0, description="Dielectric C_ad in units of C4,d (C4,d per um for exponent 3)"
    )
    metallized_exponent: int = Field(default=4, ge=3, le=4, description="Power law of the metallized adsorbate potential")
    dielectric_exponent: int = Field(default=4, ge=3, le=4, description="Power law of the dielectric adsorbate potential")
    tunneling_reduction_hz: float = Field(default=0.0, ge=0, description="Trap depth reduction for tunneling / h")


class CondensateSection(Section):
    atoms: float = Field(default=2000.0, gt=0, description="Total atom number N")
    temperature_nk: float | None = Field(default=None, ge=0, description="Cloud temperature (default 500 nK)")
    temperature_over_tc: float | None = Field(default=None, ge=0, description="Cloud temperature in units of T_c")

    @model_validator(mode="after")
    def _one_temperature(self) -> "CondensateSection":
        if self.temperature_nk is not None and self.temperature_over_tc is not None:
            raise ValueError("give either temperature_nk or temperature_over_tc, not both")
        return self


class LossSection(Section):
    hold_time_ms: float = Field(default=1.0, ge=0, description="Hold time t_h at the surface")
    bimodal: bool = Field(default=False, description="Separate condensate and thermal components")
    rate_cutoff: bool = Field(default=False, description="Cap evaporation at the cross-dimensional mixing rate")


class CantileverSection(Section):
    resonance_hz: float = Field(default=10e3, gt=0, description="Cantilever resonance omega_m / 2 pi")
    quality: float = Field(default=3100.0, gt=0.5, description="Quality factor Q")
    mass_ng: float = Field(default=5.0, gt=0, description="Effective mode mass M")
    temperature_k: float = Field(default=300.0, ge=0, description="Environment temperature")
    efficiency_nm_per_vpp: float = Field(default=80.0, ge=0, description="On-resonance amplitude per Vpp")
    drive_vpp: float = Field(default=1.5, ge=0, description="Piezo drive")


class EnsembleSection(Section):
    particles: int = Field(default=2000, ge=1, description="Test particles")
    steps_per_period: int = Field(default=64, ge=50, description="Integrator steps per shortest period")
    hold_time_ms: float = Field(default=3.0, gt=0, description="Driven interaction time")
    noise_atoms: float = Field(default=32.0, gt=0, description="Atom-number noise sigma for the SNR")
    background: bool = Field(default=True, description="Apply the near-surface background lifetime")


class ScanSection(Section):
    z_start_um: float = Field(default=0.2, description="potential: first z")
    z_stop_um: float = Field(default=3.0, description="potential: last z")
    z_points: int = Field(default=281, ge=2, description="potential: number of z points")
    d_start_um: float = Field(default=0.5, gt=0, description="loss-curve, distance: first d")
    d_stop_um: float = Field(default=3.0, gt=0, description="loss-curve, distance: last d")
    d_step_nm: float = Field(default=20.0, gt=0, description="loss-curve, distance: d step")
    detuning_start_hz: float = Field(default=-12.0, description="resonance: first drive detuning from omega_m / 2 pi")
    detuning_stop_hz: float = Field(default=12.0, description="resonance: last detuning")
    detuning_step_hz: float = Field(default=1.0, gt=0, description="resonance: detuning step")
    fit: bool = Field(default=True, description="resonance: fit a Lorentzian dip")
    amplitude_start_nm: float = Field(default=0.0, ge=0, description="amplitude: first cantilever amplitude")
    amplitude_stop_nm: float = Field(default=120.0, ge=0, description="amplitude: last amplitude")
    amplitude_step_nm: float = Field(default=20.0, gt=0, description="amplitude: amplitude step")
    observable: Literal["contrast", "snr"] = Field(default="contrast", description="distance: contrast or snr")
    trap_frequencies_hz: list[float] = Field(default_factory=list, description="spectrum: comma-separated omega_z / 2 pi")
    distances_um: list[float] = Field(default_factory=list, description="spectrum: comma-separated d per trap frequency")
    metallized_curve: str = Field(default="", description="calibrate: metallized loss-curve CSV (empty: synthesize)")
    dielectric_curve: str = Field(default="", description="calibrate: dielectric loss-curve CSV (empty: synthesize)")
    beta: float | None = Field(default=None, gt=0, description="calibrate: measured beta (unset: the model's own)")
    beta_tolerance: float = Field(default=0.02, gt=0, description="calibrate: relative beta agreement")
    depth_khz: float = Field(default=50.0, gt=0, description="calibrate: matched trap depth / h for beta")
    alpha: float = Field(default=1.0, ge=0, description="estimates: coherent-state amplitude")
    tof_ms: float = Field(default=4.0, ge=0, description="estimates: time of flight")
    detection_atoms: float = Field(default=100.0, ge=1, description="estimates: atoms in the detection trap")
    detection_frequency_hz: float = Field(default=100.0, gt=0, description="estimates: detection trap frequency")
    dipoles: float = Field(default=8e6, ge=0, description="estimates: adsorbed dipoles in the patch")
    dipole_moment: float = Field(default=1e-29, gt=0, description="estimates: dipole moment [C m]")
    patch_length_um: float = Field(default=10.0, gt=0, description="estimates: patch length")
    patch_width_um: float = Field(default=1.0, gt=0, description="estimates: patch width")

    @field_validator("trap_frequencies_hz", "distances_um", mode="before")
    @classmethod
    def _comma_lists(cls, value: Any) -> Any:
        return _split_list(value)

    @model_validator(mode="after")
    def _check_lists(self) -> "ScanSection":
        if len(self.trap_frequencies_hz) != len(self.distances_um):
            raise ValueError("trap_frequencies_hz and distances_um need the same length")
        if any(f <= 0 for f in self.trap_frequencies_hz) or any(d <= 0 for d in self.distances_um):
            raise ValueError("spectrum frequencies and distances must be positive")
        return self


SECTIONS = {
    "scenario": ScenarioSection,
    "constants": ConstantsSection,
    "trap": TrapSection,
    "surface": SurfaceSection,
    "condensate": CondensateSection,
    "loss": LossSection,
    "cantilever": CantileverSection,
    "ensemble": EnsembleSection,
    "scan": ScanSection,
}


class Scenario(BaseModel):
    """A complete, validated run description."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scenario: ScenarioSection
    constants: ConstantsSection = ConstantsSection()
    trap: TrapSection = TrapSection()
    surface: SurfaceSection = SurfaceSection()
    condensate: CondensateSection = CondensateSection()
    loss: LossSection = LossSection()
    cantilever: CantileverSection = CantileverSection()
    ensemble: EnsembleSection = EnsembleSection()
    scan: ScanSection = ScanSection()

    @property
    def name(self) -> str:
        return self.scenario.name

    @property
    def kind(self) -> ScanKind:
        return self.scenario.kind

    def constants_model(self) -> PhysicalConstants:
        return PhysicalConstants(
            scattering_length=self.constants.scattering_length_nm * 1e-9,
            polarizability=self.constants.polarizability,
            three_body_coefficient=self.constants.three_body_coefficient,
        )

    def trap_model(self) -> HarmonicTrap:
        constants = self.constants_model()
        return HarmonicTrap(
            omega_x=hz_to_angular(self.trap.omega_x_hz),
            omega_y=hz_to_angular(self.trap.omega_y_hz),
            omega_z0=hz_to_angular(self.trap.omega_z_hz),
            atom_mass=constants.rb87_mass,
        )

    def potential_model(self) -> CombinedPotential:
        """Cantilever potential with the trap at ``distance_um`` from ``side``."""
        constants = self.constants_model()
        s = self.surface
        c4 = cp_coefficient(constants)
        c4d = dielectric_cp_coefficient(constants)
        p = cantilever_potential(
            self.trap_model(),
            cantilever_position=s.cantilever_position_nm * 1e-9,
            thickness=s.thickness_nm * 1e-9,
            metallized_adsorbate=s.metallized_adsorbate_c4 * c4 * 1e-6 ** (s.metallized_exponent - 4),
            dielectric_adsorbate=s.dielectric_adsorbate_c4d * c4d * 1e-6 ** (s.dielectric_exponent - 4),
            metallized_exponent=s.metallized_exponent,
            dielectric_exponent=s.dielectric_exponent,
            tunneling_depth_reduction=s.tunneling_reduction_hz * constants.planck,
            constants=constants,
        )
        p = at_distance(p, self.trap.side, self.trap.distance_um * 1e-6)
        if self.trap.frequency_at_distance:
            p = trap_for_frequency(p, hz_to_angular(self.trap.omega_z_hz))
        return p

    def temperature(self) -> float:
        c = self.condensate
        if c.temperature_over_tc is not None:
            return c.temperature_over_tc * critical_temperature(c.atoms, self.trap_model(), self.constants_model())
        return (c.temperature_nk if c.temperature_nk is not None else 500.0) * 1e-9

    def state_model(self) -> CondensateState:
        return thermodynamics(self.condensate.atoms, self.temperature(), self.trap_model(), self.constants_model())

    def loss_model(self) -> LossModelConfig:
        return LossModelConfig(
            bimodal=self.loss.bimodal,
            rate_cutoff=self.loss.rate_cutoff,
            hold_time=self.loss.hold_time_ms * 1e-3,
        )

    def cantilever_model(self) -> Cantilever:
        c = self.cantilever
        return Cantilever(
            resonance=hz_to_angular(c.resonance_hz),
            quality=c.quality,
            effective_mass=c.mass_ng * 1e-12,
            environment_temperature=c.temperature_k,
            drive_efficiency=c.efficiency_nm_per_vpp * 1e-9,
        )

    def ensemble_model(self) -> EnsembleConfig:
        return EnsembleConfig(
            particle_count=self.ensemble.particles,
            steps_per_period=self.ensemble.steps_per_period,
            seed=self.scenario.seed,
        )

    def coupling_setup(self) -> CouplingSetup:
        return CouplingSetup(
            potential=self.potential_model(),
            cantilever=self.cantilever_model(),
            state=self.state_model(),
            ensemble=self.ensemble_model(),
            side=self.trap.side,
            hold_time=self.ensemble.hold_time_ms * 1e-3,
            drive_vpp=self.cantilever.drive_vpp,
            noise=self.ensemble.noise_atoms,
            background=self.ensemble.background,
        )


# ==============================================================================
# Text format
# ==============================================================================


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    """Line number of every ``key = value`` per section."""
    lines: dict[tuple[str, str], int] = {}
    section = ""
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        header = re.fullmatch(r"\[([^\]]+)\]", stripped)
        if header:
            section = header.group(1).strip()
            lines[(section, "")] = number
            continue
        match = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", stripped)
        if match:
            lines[(section, match.group(1).strip())] = number
    return lines


def parse_config(text: str) -> Scenario:
    """Parse and validate scenario text.

    Raises:
        ConfigParseError: malformed text, with the offending line
        ConfigValidationError: unknown section or key, or a violated constraint
    """
    parser = configparser.ConfigParser(
        interpolation=None,
        comment_prefixes=("#", ";"),
        inline_comment_prefixes=("#", ";"),
        strict=True,
        empty_lines_in_values=False,
    )
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigParseError("key outside any [section]", e.lineno) from e
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as e:
        raise ConfigParseError(e.message.split(": ", 1)[-1], e.lineno) from e
    except configparser.ParsingError as e:
        line = e.errors[0][0] if e.errors else None
        raise ConfigParseError("expected 'key = value'", line) from e
    except configparser.Error as e:
        raise ConfigParseError(str(e)) from e

    lines = _key_lines(text)
    data: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in SECTIONS:
            line = lines.get((section, ""))
            raise ConfigValidationError(f"unknown section [{section}]" + (f" (line {line})" if line else ""), section)
        data[section] = dict(parser.items(section))
    if "scenario" not in data:
        raise ConfigValidationError("missing [scenario] section", "scenario")

    try:
        scenario = Scenario.model_validate(data)
        logger.debug(f"parsed scenario {scenario.name!r} ({scenario.kind})")
        return scenario
    except ValidationError as e:
        error = e.errors()[0]
        loc = [str(part) for part in error["loc"]]
        key = ".".join(loc[:2])
        line = lines.get((loc[0], loc[1])) if len(loc) > 1 else None
        where = f" (line {line})" if line else ""
        message = "unknown key" if error["type"] == "extra_forbidden" else error["msg"]
        raise ConfigValidationError(f"{key}: {message}{where}", key) from e


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ", ".join(_format_value(v) for v in value)
    return str(value)


def serialize_config(s: Scenario) -> str:
    """Inverse of :func:`parse_config`; unset optional keys are omitted."""
    blocks = []
    for section in SECTIONS:
        values = getattr(s, section).model_dump(mode="python")
        lines = [f"[{section}]"]
        for key, value in values.items():
            if value is None:
                continue
            if isinstance(value, list) and not value:
                continue
            lines.append(f"{key} = {_format_value(value)}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def _constraint_text(field) -> str:
    parts = []
    for item in field.metadata:
        for attr, symbol in (("gt", ">"), ("ge", ">="), ("lt", "<"), ("le", "<=")):
            bound = getattr(item, attr, None)
            if bound is not None:
                parts.append(f"{symbol} {bound}")
        if getattr(item, "min_length", None):
            parts.append(f"min length {item.min_length}")
    return ", ".join(parts)


def config_schema() -> str:
    """Every section and key with type, default, constraint and meaning."""
    out = []
    for section, model in SECTIONS.items():
        out.append(f"[{section}]")
        for key, field in model.model_fields.items():
            annotation = getattr(field.annotation, "__name__", None) or str(field.annotation)
            if field.is_required():
                default = "required"
            elif field.default_factory is not None:
                default = "default: (empty)"
            else:
                default = f"default: {_format_value(field.default) if field.default is not None else '(unset)'}"
            constraint = _constraint_text(field)
            text = f"  {key} ({annotation}; {default}"
            text += f"; {constraint})" if constraint else ")"
            if field.description:
                text += f"  {field.description}"
            out.append(text)
        out.append("")
    return "\n".join(out)


# ==============================================================================
# Builder
# ==============================================================================


class ScenarioBuilder:
    """Fluent construction of scenarios."""

    def __init__(self, name: str, kind: ScanKind = ScanKind.POTENTIAL):
        """Start a scenario.

        Args:
            name: Run name (letters, digits, '_', '.', '-')
            kind: Initial scan kind; the scan methods below replace it
        """
        self.sections: dict[str, dict[str, Any]] = {name: {} for name in SECTIONS}
        self.sections["scenario"].update(name=name, kind=kind)

    def _set(self, section: str, **values) -> "ScenarioBuilder":
        self.sections[section].update({k: v for k, v in values.items() if v is not None})
        return self

    def named(self, name: str) -> "ScenarioBuilder":
        return self._set("scenario", name=name)

    def seed(self, seed: int) -> "ScenarioBuilder":
        return self._set("scenario", seed=seed)

    def output(self, path: str, workers: int | None = None) -> "ScenarioBuilder":
        return self._set("scenario", output=path, workers=workers)

    def trap(self, x_hz: float, y_hz: float, z_hz: float) -> "ScenarioBuilder":
        """Trap frequencies / 2 pi."""
        return self._set("trap", omega_x_hz=x_hz, omega_y_hz=y_hz, omega_z_hz=z_hz)

    def at_distance(self, d_um: float, side: SurfaceSide | str = SurfaceSide.METALLIZED,
                    frequency_at_distance: bool | None = None) -> "ScenarioBuilder":
        return self._set("trap", distance_um=d_um, side=SurfaceSide(side), frequency_at_distance=frequency_at_distance)

    def metallized(self, adsorbate_c4: float, exponent: int | None = None) -> "ScenarioBuilder":
        return self._set("surface", metallized_adsorbate_c4=adsorbate_c4, metallized_exponent=exponent)

    def dielectric(self, adsorbate_c4d: float, exponent: int | None = None) -> "ScenarioBuilder":
        return self._set("surface", dielectric_adsorbate_c4d=adsorbate_c4d, dielectric_exponent=exponent)

    def slab(self, thickness_nm: float | None = None, position_nm: float | None = None) -> "ScenarioBuilder":
        return self._set("surface", thickness_nm=thickness_nm, cantilever_position_nm=position_nm)

    def condensate(
        self,
        atoms: float,
        temperature_nk: float | None = None,
        over_tc: float | None = None,
    ) -> "ScenarioBuilder":
        """Atom number and temperature, absolute or in units of T_c."""
        self.sections["condensate"] = {"atoms": atoms}
        return self._set("condensate", temperature_nk=temperature_nk, temperature_over_tc=over_tc)

    def loss(self, hold_time_ms: float, bimodal: bool = False, rate_cutoff: bool = False) -> "ScenarioBuilder":
        return self._set("loss", hold_time_ms=hold_time_ms, bimodal=bimodal, rate_cutoff=rate_cutoff)

    def cantilever(self, resonance_hz: float, drive_vpp: float | None = None, **values) -> "ScenarioBuilder":
        return self._set("cantilever", resonance_hz=resonance_hz, drive_vpp=drive_vpp, **values)

    def ensemble(self, particles: int, hold_time_ms: float, **values) -> "ScenarioBuilder":
        return self._set("ensemble", particles=particles, hold_time_ms=hold_time_ms, **values)

    def _scan(self, kind: ScanKind, **values) -> "ScenarioBuilder":
        self.sections["scenario"]["kind"] = kind
        return self._set("scan", **values)

    def potential(self, z_start_um: float, z_stop_um: float, points: int = 281) -> "ScenarioBuilder":
        return self._scan(ScanKind.POTENTIAL, z_start_um=z_start_um, z_stop_um=z_stop_um, z_points=points)

    def loss_curve(self, d_start_um: float, d_stop_um: float, d_step_nm: float) -> "ScenarioBuilder":
        return self._scan(ScanKind.LOSS_CURVE, d_start_um=d_start_um, d_stop_um=d_stop_um, d_step_nm=d_step_nm)

    def resonance(self, start_hz: float, stop_hz: float, step_hz: float, fit: bool = True) -> "ScenarioBuilder":
        """Drive detunings from the cantilever resonance."""
        return self._scan(
            ScanKind.RESONANCE,
            detuning_start_hz=start_hz,
            detuning_stop_hz=stop_hz,
            detuning_step_hz=step_hz,
            fit=fit,
        )

    def amplitude(self, start_nm: float, stop_nm: float, step_nm: float) -> "ScenarioBuilder":
        return self._scan(
            ScanKind.AMPLITUDE, amplitude_start_nm=start_nm, amplitude_stop_nm=stop_nm, amplitude_step_nm=step_nm
        )

    def distance(self, d_start_um: float, d_stop_um: float, d_step_nm: float,
                 observable: str = "contrast") -> "ScenarioBuilder":
        return self._scan(
            ScanKind.DISTANCE, d_start_um=d_start_um, d_stop_um=d_stop_um, d_step_nm=d_step_nm, observable=observable
        )

    def spectrum(self, trap_frequencies_hz: list[float], distances_um: list[float]) -> "ScenarioBuilder":
        return self._scan(ScanKind.SPECTRUM, trap_frequencies_hz=trap_frequencies_hz, distances_um=distances_um)

    def calibrate(self, beta: float | None = None, **values) -> "ScenarioBuilder":
        return self._scan(ScanKind.CALIBRATE, beta=beta, **values)

    def estimates(self, **values) -> "ScenarioBuilder":
        return self._scan(ScanKind.ESTIMATES, **values)

    def build(self) -> Scenario:
        """Validate and return the scenario.

        Raises:
            ConfigValidationError: a value violates its constraint
        """
        data = {section: values for section, values in self.sections.items() if values or section == "scenario"}
        try:
            return Scenario.model_validate(data)
        except ValidationError as e:
            error = e.errors()[0]
            key = ".".join(str(part) for part in error["loc"][:2])
            raise ConfigValidationError(f"{key}: {error['msg']}", key) from e

    def to_config(self) -> str:
        return serialize_config(self.build())


def create_scenario(name: str, kind: ScanKind = ScanKind.POTENTIAL) -> ScenarioBuilder:
    """Create a new scenario builder.

    Example:
        scenario = (
            create_scenario("reference")
            .trap(800, 10.4e3, 10.5e3)
            .at_distance(1.5)
            .metallized(130)
            .estimates()
            .build()
        )
    """
    return ScenarioBuilder(name, kind)


def scan_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic grid from start to stop."""
    if step <= 0:
        raise ValueError("grid step must be positive")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise ConfigValidationError(f"empty grid from {start} to {stop}", "scan")
    return [start + i * step for i in range(count)]
