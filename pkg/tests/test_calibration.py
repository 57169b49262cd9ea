import numpy as np
import pytest

from cantibec.calibration import (
    AdsorbatePatch,
    adsorbate_potential,
    calibrate,
    calibration_report,
    coefficient_for_vanishing_distance,
    distance_for_depth,
    nominal_loss_curve,
    predicted_beta,
    with_adsorbate,
    with_cantilever_position,
)
from cantibec.condensate import thermodynamics
from cantibec.errors import TargetUnreachableError
from cantibec.potential import SurfaceSide, at_distance, cantilever_potential, characterize_trap, vanishing_distance
from cantibec.surface_loss import LossCurve, LossModelConfig, onset_distance
from tests.conftest import C4, C4D, trap


@pytest.fixture
def slab():
    return cantilever_potential(trap(800, 10e3, 10e3), 0.0, metallized_adsorbate=130 * C4, dielectric_adsorbate=10 * C4D)


def test_adsorbate_patch_coefficient():
    field = adsorbate_potential(AdsorbatePatch(), 1.5e-6)
    assert field.energy < 0
    assert 200 * C4 / 3 < field.coefficient < 600 * C4
    assert not field.continuum


def test_adsorbate_patch_near_field_is_flagged(caplog):
    field = adsorbate_potential(AdsorbatePatch(), 5e-9)
    assert field.continuum
    assert "dipole spacings" in caplog.text


def test_empty_patch():
    field = adsorbate_potential(AdsorbatePatch(dipole_count=0), 1e-6)
    assert (field.energy, field.coefficient, field.field_squared) == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        adsorbate_potential(AdsorbatePatch(), 0.0)


def test_adsorbate_quadrature_converges():
    coarse = adsorbate_potential(AdsorbatePatch(), 1e-6, nodes=16)
    fine = adsorbate_potential(AdsorbatePatch(), 1e-6, nodes=64)
    assert coarse.energy == pytest.approx(fine.energy, rel=1e-6)


def test_model_editing(slab):
    moved = with_cantilever_position(slab, 40e-9)
    assert moved.side(SurfaceSide.METALLIZED).position == pytest.approx(40e-9)
    assert moved.side(SurfaceSide.DIELECTRIC).position == pytest.approx(40e-9 - 450e-9)
    edited = with_adsorbate(slab, SurfaceSide.DIELECTRIC, 3 * C4D)
    assert edited.side(SurfaceSide.DIELECTRIC).adsorbate_coefficient == 3 * C4D
    assert edited.side(SurfaceSide.METALLIZED).adsorbate_coefficient == 130 * C4


def test_distance_for_depth(slab):
    depth = slab.constants.planck * 50e3
    d = distance_for_depth(slab, SurfaceSide.METALLIZED, depth)
    assert characterize_trap(at_distance(slab, SurfaceSide.METALLIZED, d)).depth == pytest.approx(depth, rel=1e-6)


def test_predicted_beta():
    p = cantilever_potential(trap(800, 10e3, 10e3), 0.0, metallized_adsorbate=201 * C4, dielectric_adsorbate=11 * C4D)
    assert 2.6 < predicted_beta(p, p, p.constants.planck * 50e3) < 3.8


def test_beta_of_identical_faces_is_one(slab):
    depth = slab.constants.planck * 50e3
    assert predicted_beta(slab, slab, depth, SurfaceSide.METALLIZED, SurfaceSide.METALLIZED) == 1.0


def test_coefficient_for_vanishing_distance(slab):
    target = vanishing_distance(slab, SurfaceSide.METALLIZED)
    bare = with_adsorbate(slab, SurfaceSide.METALLIZED, 0.0)
    recovered = coefficient_for_vanishing_distance(bare, SurfaceSide.METALLIZED, target)
    assert recovered == pytest.approx(130 * C4, rel=0.05)


def test_vanishing_distance_inside_casimir_polder_reach(slab):
    with pytest.raises(TargetUnreachableError):
        coefficient_for_vanishing_distance(slab, SurfaceSide.METALLIZED, 0.3e-6)


def test_nominal_curves_shift_with_the_slab(slab):
    state = thermodynamics(2000, 100e-9, slab.trap)
    cfg = LossModelConfig(hold_time=0.0)
    grid = np.arange(0.3e-6, 1.5e-6 + 1e-12, 10e-9)
    centred = nominal_loss_curve(slab, grid, SurfaceSide.METALLIZED, state, cfg)
    shifted = nominal_loss_curve(with_cantilever_position(slab, 40e-9), grid, SurfaceSide.METALLIZED, state, cfg)
    assert onset_distance(shifted) - onset_distance(centred) == pytest.approx(40e-9, abs=5e-9)
    assert shifted.distances == centred.distances


@pytest.fixture
def synthetic_curves(slab):
    """Curves of a slab displaced by 40 nm, with the beta it predicts."""
    truth = with_cantilever_position(slab, 40e-9)
    state = thermodynamics(2000, 100e-9, slab.trap)
    cfg = LossModelConfig(hold_time=0.0)
    grid = np.arange(0.3e-6, 1.5e-6 + 1e-12, 5e-9)
    met = nominal_loss_curve(truth, grid, SurfaceSide.METALLIZED, state, cfg)
    diel = nominal_loss_curve(truth, grid, SurfaceSide.DIELECTRIC, state, cfg)
    beta = predicted_beta(truth, truth, slab.constants.planck * 50e3)
    return met, diel, beta


@pytest.mark.slow
def test_calibration_closes_the_loop(slab, synthetic_curves):
    met, diel, beta = synthetic_curves
    result = calibrate(met, diel, beta, slab, beta_tolerance=0.002)
    assert abs(result.cantilever_position - 40e-9) < 50e-9
    assert result.metallized_adsorbate == pytest.approx(130 * C4, rel=0.1)
    assert result.predicted_beta == pytest.approx(beta, rel=0.002)
    assert result.d_uncertainty >= 6e-9
    report = calibration_report(result, C4, C4D)
    assert "cantilever_position_nm = " in report
    assert "metallized_exponent = 4" in report


@pytest.mark.slow
def test_unreachable_beta(slab, synthetic_curves):
    met, diel, _ = synthetic_curves
    with pytest.raises(TargetUnreachableError) as info:
        calibrate(met, diel, 100.0, slab)
    assert info.value.attainable is not None


@pytest.mark.slow
def test_cubic_metallized_adsorbate_gives_a_similar_position(slab, synthetic_curves):
    met, diel, beta = synthetic_curves
    quartic = calibrate(met, diel, beta, slab)
    cubic_slab = cantilever_potential(
        trap(800, 10e3, 10e3),
        0.0,
        metallized_adsorbate=130 * C4 / 1e-6,
        dielectric_adsorbate=10 * C4D,
        metallized_exponent=3,
    )
    cubic = calibrate(met, diel, beta, cubic_slab)
    assert cubic.metallized_exponent == 3
    assert cubic.predicted_beta == pytest.approx(beta, rel=0.02)
    assert abs(cubic.cantilever_position - quartic.cantilever_position) < 160e-9


def test_calibration_needs_positive_beta(slab):
    curve = LossCurve(distances=[0.5e-6, 0.6e-6, 0.7e-6], remaining_fraction=[0.0, 0.5, 1.0])
    with pytest.raises(ValueError):
        calibrate(curve, curve, 0.0, slab)
