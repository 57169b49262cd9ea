import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import constants as sc

from cantibec.cantilever import reference_cantilever
from cantibec.condensate import critical_temperature, thermodynamics
from cantibec.constants import RB87_MASS
from cantibec.coupling_dynamics import (
    CouplingSetup,
    Ensemble,
    EnsembleConfig,
    EvolutionResult,
    amplitude_scan,
    contrast_and_snr,
    detection_estimates,
    distance_scan,
    energy_drift,
    evolve_ensemble,
    minimum_resolvable_amplitude,
    modulation_transfer,
    resonance_scan,
    sample_ensemble,
    spectrum_scan,
)
from cantibec.errors import OverDrivenError, TimeStepError, TrapVanishedError
from cantibec.potential import (
    SurfaceSide,
    at_distance,
    cantilever_potential,
    characterize_trap,
    evaluate_potential,
    trap_for_frequency,
)
from cantibec.scan import fit_lorentzian
from tests.conftest import C4, C4D, TWO_PI, trap


@pytest.fixture
def resonant_setup():
    """Atoms at 1.5 um seeing omega_z = omega_m = 2 pi x 10 kHz."""
    p = cantilever_potential(trap(800, 10e3, 10e3), 0.0, metallized_adsorbate=130 * C4, dielectric_adsorbate=10 * C4D)
    p = trap_for_frequency(at_distance(p, SurfaceSide.METALLIZED, 1.5e-6), TWO_PI * 10e3)
    return CouplingSetup(
        potential=p,
        cantilever=reference_cantilever(),
        state=thermodynamics(2000, 500e-9, p.trap),
        ensemble=EnsembleConfig(particle_count=400, seed=7),
        hold_time=3e-3,
        drive_vpp=1.5,
        background=False,
    )


# ==============================================================================
# Quasi-static transfer
# ==============================================================================


def test_modulation_transfer_reference(reference_potential):
    large = modulation_transfer(reference_potential, 120e-9)
    small = modulation_transfer(reference_potential, 50e-9)
    assert 7e-9 < abs(large.delta_z_t) < 13e-9
    assert 2.3 < large.delta_z_t / small.delta_z_t < 2.65
    assert large.delta_depth != 0


def test_frequency_modulation_at_the_parametric_point():
    p = cantilever_potential(trap(800, 5e3, 4.84e3), 0.0, metallized_adsorbate=131 * C4)
    p = at_distance(p, SurfaceSide.METALLIZED, 1.9e-6)
    transfer = modulation_transfer(p, 180e-9)
    assert 75 < abs(transfer.delta_omega_z) / TWO_PI < 300


def test_zero_amplitude_transfers_nothing(reference_potential):
    transfer = modulation_transfer(reference_potential, 0.0)
    assert (transfer.delta_z_t, transfer.delta_omega_z, transfer.delta_depth) == (0.0, 0.0, 0.0)


@pytest.mark.parametrize("amplitude", [1.0e-6, 1.6e-6])
def test_over_driven(reference_potential, amplitude):
    with pytest.raises(OverDrivenError):
        modulation_transfer(reference_potential, amplitude)


# ==============================================================================
# Ensemble
# ==============================================================================


def test_sampling_is_reproducible(reference_potential, reference_trap):
    state = thermodynamics(2000, 500e-9, reference_trap)
    cfg = EnsembleConfig(particle_count=200, seed=3)
    first = sample_ensemble(reference_potential, state, cfg)
    second = sample_ensemble(reference_potential, state, cfg)
    other = sample_ensemble(reference_potential, state, cfg.model_copy(update={"seed": 4}))
    np.testing.assert_array_equal(first.z, second.z)
    np.testing.assert_array_equal(first.v, second.v)
    assert not np.array_equal(first.z, other.z)
    assert int(first.condensed.sum()) == round(200 * state.condensate_fraction)
    assert np.all(first.v[first.condensed] == 0)


def test_thermal_particles_are_bound(reference_potential, reference_trap):
    state = thermodynamics(2000, 1.5 * critical_temperature(2000, reference_trap), reference_trap)
    particles = sample_ensemble(reference_potential, state, EnsembleConfig(particle_count=100))
    char = characterize_trap(reference_potential)
    energy = (
        evaluate_potential(reference_potential, particles.z)
        - evaluate_potential(reference_potential, char.trap_minimum)
        + 0.5 * RB87_MASS * particles.v**2
    )
    assert not particles.condensed.any()
    assert np.all(energy < char.depth)
    assert np.all(particles.z > char.barrier_position)


def test_vanished_trap_cannot_be_sampled(reference_potential, reference_trap):
    p = at_distance(reference_potential, SurfaceSide.METALLIZED, 0.3e-6)
    state = thermodynamics(2000, 0.0, reference_trap)
    with pytest.raises(TrapVanishedError):
        sample_ensemble(p, state, EnsembleConfig(particle_count=100))


def test_coarse_time_step_is_rejected(reference_potential, cantilever):
    char = characterize_trap(reference_potential)
    particles = Ensemble(z=np.array([char.trap_minimum]), v=np.zeros(1), condensed=np.ones(1, dtype=bool))
    cfg = EnsembleConfig(particle_count=1, time_step=1e-5)
    with pytest.raises(TimeStepError):
        evolve_ensemble(reference_potential, cantilever, 1.5, cantilever.resonance, particles, 1e-3, cfg)


def test_steps_per_period_minimum():
    with pytest.raises(ValidationError):
        EnsembleConfig(steps_per_period=10)


def test_undriven_particle_at_rest_survives(reference_potential, cantilever):
    char = characterize_trap(reference_potential)
    particles = Ensemble(z=np.array([char.trap_minimum]), v=np.zeros(1), condensed=np.ones(1, dtype=bool))
    result = evolve_ensemble(
        reference_potential, cantilever, 0.0, cantilever.resonance, particles, 1e-3,
        EnsembleConfig(particle_count=1), amplitude=0.0,
    )
    assert result.dynamic_survivors == 1.0
    assert result.background_factor < 1.0
    assert result.survivor_fraction == pytest.approx(result.background_factor)


@pytest.mark.slow
def test_energy_is_conserved(reference_potential, cantilever):
    char = characterize_trap(reference_potential)
    particles = Ensemble(z=np.array([char.trap_minimum + 100e-9]), v=np.zeros(1), condensed=np.zeros(1, dtype=bool))
    cfg = EnsembleConfig(particle_count=1, steps_per_period=200, record_energy=True)
    period = TWO_PI / char.frequency
    result = evolve_ensemble(
        reference_potential, cantilever, 0.0, char.frequency, particles, 1000 * period, cfg,
        amplitude=0.0, background=False,
    )
    assert result.dynamic_survivors == 1.0
    energies = np.asarray(result.energy_history) - evaluate_potential(reference_potential, char.trap_minimum)
    assert len(energies) >= 999
    assert energy_drift(result.energy_times, energies) < 1e-6


def test_energy_drift_of_a_linear_record():
    times = np.linspace(0.0, 1.0, 11)
    assert energy_drift(times, 1.0 + 0.01 * times) == pytest.approx(0.01)
    with pytest.raises(ValueError):
        energy_drift([0.0], [1.0])


# ==============================================================================
# Observables
# ==============================================================================


def test_contrast_and_snr():
    c = contrast_and_snr(1000, 1500, 32)
    assert c.contrast == pytest.approx(1 / 3)
    assert c.snr == pytest.approx(15.625)
    assert not c.negative
    flipped = contrast_and_snr(1600, 1500, 32)
    assert flipped.negative
    assert flipped.contrast == pytest.approx(-1 / 15)
    with pytest.raises(ValueError):
        contrast_and_snr(10, 0, 32)


def test_time_of_flight_displacement():
    estimate = detection_estimates(100, TWO_PI * 100, 1.0, 4e-3, RB87_MASS, sc.hbar)
    assert estimate.tof_displacement == pytest.approx(3.833e-7, rel=1e-3)
    assert estimate.minimum_resolvable_amplitude is None


def test_minimum_resolvable_amplitude():
    omega = TWO_PI * 10e3
    a_min = minimum_resolvable_amplitude(10 / 120, 2000, omega, 20e-3, RB87_MASS, sc.hbar)
    x_zpf = math.sqrt(sc.hbar / (2 * RB87_MASS * 2000 * omega))
    assert a_min == pytest.approx(4 * x_zpf / (10 / 120 * omega * 20e-3), rel=1e-12)
    assert 2e-11 < a_min < 6e-10
    estimate = detection_estimates(2000, omega, 1.0, 4e-3, RB87_MASS, sc.hbar, 10 / 120, 20e-3)
    assert estimate.minimum_resolvable_amplitude == pytest.approx(a_min)


# ==============================================================================
# Scans
# ==============================================================================


@pytest.mark.slow
def test_resonance_dip_follows_the_cantilever(resonant_setup):
    wm = resonant_setup.cantilever.resonance
    grid = wm + TWO_PI * np.arange(-12, 13)
    result = resonance_scan(resonant_setup, grid)
    assert result.fit is not None
    width = 10e3 / resonant_setup.cantilever.quality
    assert abs(result.fit.center - 10e3) <= 1.0
    assert 0.5 * width < result.fit.fwhm < 4 * width
    assert min(result.observable) < 0.5 * max(result.observable)
    # far from resonance the cloud keeps most of its atoms
    total = resonant_setup.state.total_atoms
    assert result.flags == ["ok"] * len(grid)
    assert result.observable[0] > 0.7 * total
    assert result.observable[-1] > 0.7 * total


@pytest.mark.slow
def test_contrast_grows_with_amplitude(resonant_setup):
    result = amplitude_scan(resonant_setup, [0.0, 40e-9, 120e-9])
    assert result.observable[0] == 0.0
    assert result.observable[2] > result.observable[1]
    assert result.observable[2] > 0.3


@pytest.mark.slow
def test_contrast_is_linear_below_saturation(resonant_setup):
    p = resonant_setup.potential
    hot = resonant_setup.model_copy(
        update={
            "state": thermodynamics(2000, 3e-6, p.trap),
            "ensemble": EnsembleConfig(particle_count=1000, seed=7),
        }
    )
    result = amplitude_scan(hot, [0.0, 10e-9, 20e-9, 30e-9, 40e-9])
    assert result.observable[0] == 0.0
    assert result.linear is not None
    assert result.linear.slope > 0
    assert result.linear.r_squared > 0.95


def test_failed_resonance_point_is_left_out_of_the_fit(resonant_setup, monkeypatch):
    def lorentzian_loss(p, c, drive_vpp, omega_p, particles, hold_time, cfg, amplitude=None, background=True):
        f = omega_p / TWO_PI
        if abs(f - 10004) < 0.5:
            raise TimeStepError("step too coarse")
        remaining = 1 - 0.6 / (1 + ((f - 10e3) / 1.6) ** 2)
        return EvolutionResult(
            survivor_fraction=remaining, dynamic_survivors=remaining, background_factor=1.0, steps=1, time_step=1e-6
        )

    monkeypatch.setattr("cantibec.coupling_dynamics.sample_ensemble", lambda *args, **kwargs: None)
    monkeypatch.setattr("cantibec.coupling_dynamics.evolve_ensemble", lorentzian_loss)
    grid = resonant_setup.cantilever.resonance + TWO_PI * np.arange(-12, 13)
    result = resonance_scan(resonant_setup, grid)

    failed = 16
    assert math.isnan(result.observable[failed])
    assert result.flags[failed] == "time-step@10004"
    assert result.flags.count("ok") == len(grid) - 1
    kept = [i for i in range(len(grid)) if i != failed]
    expected = fit_lorentzian([result.abscissa[i] for i in kept], [result.observable[i] for i in kept], dip=True)
    assert result.fit == expected
    assert result.fit.center == pytest.approx(10e3, abs=1e-3)
    assert result.fit.fwhm == pytest.approx(3.2, rel=1e-3)


@pytest.mark.slow
def test_spectrum_peaks_at_drive_and_half_drive(resonant_setup):
    setup = resonant_setup.model_copy(update={"drive_vpp": 2.25})
    frequencies = [TWO_PI * 5e3, TWO_PI * 7.5e3, TWO_PI * 10e3]
    result = spectrum_scan(setup, frequencies, [1.9e-6, 1.7e-6, 1.5e-6])
    half, off, full = result.observable
    assert full > 10 * abs(off)
    assert half > 10 * abs(off)


@pytest.mark.slow
def test_results_do_not_depend_on_worker_count(resonant_setup):
    setup = resonant_setup.model_copy(
        update={"ensemble": EnsembleConfig(particle_count=100, seed=1), "hold_time": 0.5e-3}
    )
    serial = distance_scan(setup, [1.4e-6, 1.6e-6], workers=1)
    pooled = distance_scan(setup, [1.4e-6, 1.6e-6], workers=2)
    assert serial.observable == pooled.observable


def test_distance_scan_observable_is_checked(resonant_setup):
    with pytest.raises(ValueError):
        distance_scan(resonant_setup, [1.5e-6], observable="phase")


def test_spectrum_needs_one_distance_per_frequency(resonant_setup):
    with pytest.raises(ValueError):
        spectrum_scan(resonant_setup, [TWO_PI * 5e3, TWO_PI * 10e3], [1.5e-6])
