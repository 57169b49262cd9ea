import math

import numpy as np
import pytest
from pydantic import ValidationError

from cantibec.errors import ConvergenceError, NeverVanishesError, PotentialDomainError
from cantibec.potential import (
    CombinedPotential,
    SurfaceSide,
    SurfaceSideModel,
    at_distance,
    cantilever_potential,
    characterize_trap,
    effective_thickness,
    evaluate_potential,
    potential_derivatives,
    potential_profile,
    trap_for_frequency,
    vanishing_distance,
)
from tests.conftest import C4, C4D, TWO_PI, trap


def test_slab_faces(reference_potential):
    met = reference_potential.side(SurfaceSide.METALLIZED)
    diel = reference_potential.side(SurfaceSide.DIELECTRIC)
    assert met.position == 0.0
    assert diel.position == pytest.approx(-450e-9)
    assert (met.orientation, met.outward) == (-1, 1)
    assert (diel.orientation, diel.outward) == (1, -1)
    assert reference_potential.trap.center == pytest.approx(1.5e-6)


def test_inside_slab_is_rejected(reference_potential):
    for z in (0.0, -100e-9, -450e-9):
        with pytest.raises(PotentialDomainError):
            evaluate_potential(reference_potential, z)
    with pytest.raises(PotentialDomainError):
        potential_derivatives(reference_potential, np.array([1e-6, -200e-9]))


def test_displacement_moves_the_slab(reference_potential):
    # 50 nm above the rest position of the metallized face, inside once displaced by 60 nm
    evaluate_potential(reference_potential, 50e-9)
    with pytest.raises(PotentialDomainError):
        evaluate_potential(reference_potential, 50e-9, displacement=60e-9)


def test_far_field_is_harmonic(reference_potential):
    k = reference_potential.trap.spring_constant
    z = 20e-6
    harmonic = 0.5 * k * (z - 1.5e-6) ** 2
    assert evaluate_potential(reference_potential, z) == pytest.approx(harmonic, rel=1e-6)


@pytest.mark.parametrize("z", [0.6e-6, 0.9e-6, 1.2e-6, 2.5e-6, -1.0e-6, -2.0e-6])
@pytest.mark.parametrize("order", [1, 2, 3])
def test_derivatives_match_finite_differences(reference_potential, z, order):
    h, rel = (1e-10, 1e-6) if order < 3 else (1e-9, 1e-4)
    scale = reference_potential.trap.spring_constant * 1e-6 ** (2 - order)

    def f(x):
        if order == 1:
            return evaluate_potential(reference_potential, x)
        return potential_derivatives(reference_potential, x, order=order - 1)

    numeric = (f(z + h) - f(z - h)) / (2 * h)
    analytic = potential_derivatives(reference_potential, z, order=order)
    assert analytic == pytest.approx(numeric, rel=rel, abs=rel * scale)


def test_derivative_order_is_checked(reference_potential):
    with pytest.raises(ValueError):
        potential_derivatives(reference_potential, 1e-6, order=4)


def test_vectorized_evaluation(reference_potential):
    z = np.array([0.8e-6, 1.5e-6, 2.2e-6])
    values = evaluate_potential(reference_potential, z)
    assert values.shape == (3,)
    for zi, vi in zip(z, values):
        assert evaluate_potential(reference_potential, float(zi)) == pytest.approx(vi)


def test_characterization_agrees_with_grid_scan(reference_potential):
    char = characterize_trap(reference_potential)
    assert char.exists and not char.unbounded

    z = np.arange(0.1e-6, 1.7e-6, 0.1e-9)
    u = evaluate_potential(reference_potential, z)
    i_min = int(np.argmin(u))
    below = z < z[i_min]
    i_max = int(np.argmax(np.where(below, u, -np.inf)))
    assert abs(char.trap_minimum - z[i_min]) < 1e-9
    assert abs(char.barrier_position - z[i_max]) < 1e-9
    assert char.depth == pytest.approx(u[i_max] - u[i_min], rel=1e-4)


def test_reference_trap_anchors(reference_potential):
    char = characterize_trap(reference_potential)
    h = reference_potential.constants.planck
    shift = 1.5e-6 - char.trap_minimum
    assert 8e-9 < shift < 32e-9
    assert 100e3 < char.depth / h < 300e3
    assert char.frequency < reference_potential.trap.omega_z0


def test_tunneling_reduction_lowers_depth(reference_potential):
    h = reference_potential.constants.planck
    base = characterize_trap(reference_potential).depth
    reduced = characterize_trap(reference_potential.model_copy(update={"tunneling_depth_reduction": h * 10e3}))
    assert reduced.depth == pytest.approx(base - h * 10e3, rel=1e-9)


def test_trap_vanishes_close_to_the_surface(reference_potential):
    char = characterize_trap(at_distance(reference_potential, SurfaceSide.METALLIZED, 0.3e-6))
    assert not char.exists
    assert char.trap_minimum is None
    assert char.effective_depth == 0.0


def test_inactive_face_gives_unbounded_trap(reference_trap):
    face = SurfaceSideModel(label=SurfaceSide.METALLIZED, position=0.0, orientation=-1, cp_coefficient=0.0)
    p = CombinedPotential(trap=reference_trap.model_copy(update={"center": 1e-6}), sides=(face,))
    char = characterize_trap(p)
    assert char.exists and char.unbounded
    assert char.depth is None
    assert math.isinf(char.effective_depth)
    assert char.frequency == reference_trap.omega_z0
    with pytest.raises(NeverVanishesError):
        vanishing_distance(p, SurfaceSide.METALLIZED)


def test_slab_validation(reference_trap):
    met = SurfaceSideModel(label=SurfaceSide.METALLIZED, position=0.0, orientation=-1, cp_coefficient=C4)
    diel = SurfaceSideModel(label=SurfaceSide.DIELECTRIC, position=-300e-9, orientation=1, cp_coefficient=C4D)
    with pytest.raises(ValidationError):
        CombinedPotential(trap=reference_trap, sides=(met, diel), thickness=450e-9)
    same = diel.model_copy(update={"orientation": -1, "position": -450e-9})
    with pytest.raises(ValidationError):
        CombinedPotential(trap=reference_trap, sides=(met, same), thickness=450e-9)


def test_effective_thickness_cp_only():
    p = cantilever_potential(trap(800, 10e3, 10e3), 0.0)
    t_eff = effective_thickness(p)
    assert 1.2e-6 < t_eff < 1.6e-6
    assert t_eff > p.thickness


def test_effective_thickness_with_adsorbates():
    p = cantilever_potential(
        trap(800, 10e3, 10e3), 0.0, metallized_adsorbate=200 * C4, dielectric_adsorbate=10 * C4D
    )
    assert 1.9e-6 < effective_thickness(p) < 2.5e-6


def test_adsorbates_push_the_vanishing_distance_out():
    bare = cantilever_potential(trap(800, 10e3, 10e3), 0.0)
    dressed = cantilever_potential(trap(800, 10e3, 10e3), 0.0, metallized_adsorbate=130 * C4)
    assert vanishing_distance(dressed, SurfaceSide.METALLIZED) > vanishing_distance(bare, SurfaceSide.METALLIZED)
    assert vanishing_distance(dressed, SurfaceSide.DIELECTRIC) == vanishing_distance(bare, SurfaceSide.DIELECTRIC)


def test_exponent_three_adsorbate():
    c3 = 130 * C4 / 1e-6
    bare = cantilever_potential(trap(800, 10e3, 10e3), 0.0)
    dressed = cantilever_potential(trap(800, 10e3, 10e3), 0.0, metallized_adsorbate=c3, metallized_exponent=3)
    z = 1.2e-6
    assert evaluate_potential(dressed, z) - evaluate_potential(bare, z) == pytest.approx(-c3 / z**3, rel=1e-9)
    force = potential_derivatives(dressed, z) - potential_derivatives(bare, z)
    assert force == pytest.approx(3 * c3 / z**4, rel=1e-9)


def test_trap_for_frequency_matches_target(reference_potential):
    target = TWO_PI * 10e3
    tuned = trap_for_frequency(reference_potential, target)
    assert characterize_trap(tuned).frequency == pytest.approx(target, rel=1e-8)
    assert tuned.trap.omega_z0 > target


def test_trap_for_frequency_gives_up_when_vanished(reference_potential):
    p = at_distance(reference_potential, SurfaceSide.METALLIZED, 0.2e-6)
    with pytest.raises(ConvergenceError):
        trap_for_frequency(p, TWO_PI * 10e3)


def test_potential_profile_skips_slab(reference_potential):
    z = np.linspace(-3e-6, 3e-6, 61)
    result = potential_profile(reference_potential, z)
    assert result.kind == "potential"
    assert all(zi > 0 or zi < -450e-9 for zi in result.abscissa)
    assert len(result.abscissa) < len(z)
    h = reference_potential.constants.planck
    assert result.metadata["depth_hz"] == pytest.approx(characterize_trap(reference_potential).depth / h)
    assert result.metadata["exists"] == 1


def test_frequency_is_the_trap_plus_surface_curvature(reference_potential):
    char = characterize_trap(reference_potential)
    met = reference_potential.side(SurfaceSide.METALLIZED)
    assert met.adsorbate_exponent == 4
    x = char.trap_minimum - met.position
    surface_curvature = -20 * (met.cp_coefficient + met.adsorbate_coefficient) / x**6
    mass = reference_potential.trap.atom_mass
    expected = reference_potential.trap.omega_z0**2 + surface_curvature / mass
    assert char.frequency**2 == pytest.approx(expected, rel=1e-9)


def test_barrier_is_a_maximum(reference_potential):
    char = characterize_trap(reference_potential)
    assert potential_derivatives(reference_potential, char.barrier_position, order=2) < 0
    assert potential_derivatives(reference_potential, char.trap_minimum, order=2) > 0


@pytest.mark.parametrize(("orientation", "position", "z"), [(-1, 0.0, 0.8e-6), (1, 0.0, -0.8e-6)])
def test_single_face_force_closed_form(reference_trap, orientation, position, z):
    face = SurfaceSideModel(label=SurfaceSide.METALLIZED, position=position, orientation=orientation, cp_coefficient=C4)
    p = CombinedPotential(trap=reference_trap, sides=(face,))
    k = reference_trap.spring_constant
    surface = potential_derivatives(p, z) - k * (z - reference_trap.center)
    d = abs(z - position)
    # -C/d^4 pulls towards the face
    assert surface == pytest.approx(face.outward * 4 * C4 / d**5, rel=1e-12)
    assert evaluate_potential(p, z) - 0.5 * k * z**2 == pytest.approx(-C4 / d**4, rel=1e-12)


def test_two_sided_model_without_coefficients_is_the_bare_trap(reference_trap):
    met = SurfaceSideModel(label=SurfaceSide.METALLIZED, position=0.0, orientation=-1, cp_coefficient=0.0)
    diel = SurfaceSideModel(label=SurfaceSide.DIELECTRIC, position=-450e-9, orientation=1, cp_coefficient=0.0)
    bare = reference_trap.model_copy(update={"center": 1.5e-6})
    char = characterize_trap(CombinedPotential(trap=bare, sides=(met, diel), thickness=450e-9))
    assert char.trap_minimum == 1.5e-6
    assert char.frequency == bare.omega_z0
