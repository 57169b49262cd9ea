from pathlib import Path

import pytest

from cantibec.condensate import critical_temperature
from cantibec.constants import cp_coefficient
from cantibec.errors import ConfigParseError, ConfigValidationError
from cantibec.potential import SurfaceSide
from cantibec.scenario import (
    SECTIONS,
    ScanKind,
    config_schema,
    create_scenario,
    parse_config,
    scan_grid,
    serialize_config,
)

SHIPPED = Path(__file__).parent.parent / "scenarios" / "reference_trap.cfg"

MINIMAL = "[scenario]\nkind = potential\n"


def test_minimal_config_takes_defaults():
    s = parse_config(MINIMAL)
    assert s.name == "scenario"
    assert s.kind == ScanKind.POTENTIAL
    assert s.trap.omega_z_hz == 10.5e3
    assert s.surface.metallized_adsorbate_c4 == 130.0
    assert s.condensate.atoms == 2000.0
    assert s.temperature() == pytest.approx(500e-9)


def test_constraint_violation_names_key_and_line():
    text = "[scenario]\nkind = potential\n\n[trap]\nomega_z_hz = -1\n"
    with pytest.raises(ConfigValidationError) as info:
        parse_config(text)
    assert info.value.key == "trap.omega_z_hz"
    assert "(line 5)" in str(info.value)


def test_unknown_key():
    with pytest.raises(ConfigValidationError) as info:
        parse_config(MINIMAL + "[trap]\nomega_w_hz = 3\n")
    assert info.value.key == "trap.omega_w_hz"
    assert "unknown key (line 4)" in str(info.value)


def test_unknown_section():
    with pytest.raises(ConfigValidationError) as info:
        parse_config(MINIMAL + "[laser]\npower_mw = 3\n")
    assert info.value.key == "laser"
    assert "unknown section [laser] (line 3)" in str(info.value)


def test_missing_scenario_section():
    with pytest.raises(ConfigValidationError) as info:
        parse_config("[trap]\nomega_x_hz = 800\n")
    assert info.value.key == "scenario"


def test_kind_is_required():
    with pytest.raises(ConfigValidationError) as info:
        parse_config("[scenario]\nname = x\n")
    assert info.value.key == "scenario.kind"


def test_key_outside_section():
    with pytest.raises(ConfigParseError) as info:
        parse_config("kind = potential\n")
    assert info.value.line == 1
    assert str(info.value).startswith("line 1: ")


def test_malformed_line():
    with pytest.raises(ConfigParseError) as info:
        parse_config(MINIMAL + "nonsense\n")
    assert info.value.line == 3


def test_duplicate_key():
    with pytest.raises(ConfigParseError) as info:
        parse_config(MINIMAL + "kind = estimates\n")
    assert info.value.line == 3
    assert "already exists" in str(info.value)


def test_name_must_be_file_safe():
    with pytest.raises(ConfigValidationError) as info:
        parse_config("[scenario]\nname = my run\nkind = potential\n")
    assert info.value.key == "scenario.name"


def test_both_temperatures_is_an_error():
    text = MINIMAL + "[condensate]\ntemperature_nk = 100\ntemperature_over_tc = 0.5\n"
    with pytest.raises(ConfigValidationError) as info:
        parse_config(text)
    assert info.value.key == "condensate"


def test_spectrum_lists_need_equal_length():
    text = "[scenario]\nkind = spectrum\n[scan]\ntrap_frequencies_hz = 5000, 10000\ndistances_um = 1.5\n"
    with pytest.raises(ConfigValidationError) as info:
        parse_config(text)
    assert info.value.key == "scan"


def test_spectrum_lists_are_comma_separated():
    text = "[scenario]\nkind = spectrum\n[scan]\ntrap_frequencies_hz = 5000, 10000\ndistances_um = 1.9, 1.5\n"
    s = parse_config(text)
    assert s.scan.trap_frequencies_hz == [5000.0, 10000.0]
    assert s.scan.distances_um == [1.9, 1.5]


def test_shipped_config_round_trips():
    original = parse_config(SHIPPED.read_text())
    assert original.name == "reference-trap"
    assert original.kind == ScanKind.ESTIMATES
    assert parse_config(serialize_config(original)) == original


def test_serialized_config_omits_unset_values():
    text = serialize_config(parse_config(MINIMAL))
    assert "temperature_nk" not in text
    assert "trap_frequencies_hz" not in text
    assert "side = metallized" in text
    assert "background = true" in text


def test_builder_round_trip():
    s = (
        create_scenario("built")
        .trap(800, 10e3, 10e3)
        .at_distance(1.7, "dielectric")
        .metallized(200)
        .dielectric(11)
        .condensate(1500, over_tc=0.6)
        .loss(2.0, bimodal=True)
        .loss_curve(0.5, 1.5, 10)
        .build()
    )
    assert s.kind == ScanKind.LOSS_CURVE
    assert s.trap.side == SurfaceSide.DIELECTRIC
    assert parse_config(serialize_config(s)) == s


def test_builder_reports_the_bad_key():
    with pytest.raises(ConfigValidationError) as info:
        create_scenario("bad").trap(800, -1, 10e3).build()
    assert info.value.key == "trap.omega_y_hz"


def test_schema_lists_every_section():
    schema = config_schema()
    for section in SECTIONS:
        assert f"[{section}]" in schema
    assert "  omega_z_hz (float; default: 10500.0; > 0)" in schema
    assert "  kind (ScanKind; required)" in schema


def test_potential_model_converts_units():
    s = parse_config(MINIMAL)
    c4 = cp_coefficient(s.constants_model())
    p = s.potential_model()
    metallized = p.side(SurfaceSide.METALLIZED)
    assert metallized.adsorbate_coefficient == pytest.approx(130 * c4)
    assert metallized.adsorbate_exponent == 4
    assert p.thickness == pytest.approx(450e-9)
    assert p.trap.center == pytest.approx(1.5e-6)


def test_potential_model_exponent_three_is_per_micron():
    s = parse_config(MINIMAL + "[surface]\nmetallized_adsorbate_c4 = 2\nmetallized_exponent = 3\n")
    c4 = cp_coefficient(s.constants_model())
    metallized = s.potential_model().side(SurfaceSide.METALLIZED)
    assert metallized.adsorbate_exponent == 3
    assert metallized.adsorbate_coefficient == pytest.approx(2 * c4 * 1e6)


def test_temperature_in_units_of_critical_temperature():
    s = parse_config(MINIMAL + "[condensate]\ntemperature_over_tc = 0.5\n")
    t_c = critical_temperature(2000, s.trap_model(), s.constants_model())
    assert s.temperature() == pytest.approx(0.5 * t_c)
    assert s.state_model().reduced_temperature == pytest.approx(0.5)


def test_scan_grid():
    grid = scan_grid(0.5, 1.0, 0.1)
    assert len(grid) == 6
    assert grid[-1] == pytest.approx(1.0)
    assert scan_grid(1.0, 1.0, 0.1) == [1.0]
    with pytest.raises(ValueError):
        scan_grid(0.0, 1.0, 0.0)
    with pytest.raises(ConfigValidationError):
        scan_grid(1.0, 0.5, 0.1)
