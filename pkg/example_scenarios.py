"""Named scenarios for a condensate coupled to a SiN cantilever.

Reference setup:
- Rb-87, N = 2000, trap 0.8 x 10.4 x 10.5 kHz at 1.5 um from the metallized face
- Cantilever: 450 nm thick, 10 kHz, Q = 3100, 5 ng, 80 nm/Vpp
- Adsorbates: 130 C4 on the metallized face, 10 C4,d on the dielectric face

Run one with:
    uv run python cli.py run --example reference-trap
"""

from cantibec.scenario import ScenarioBuilder, create_scenario


# =============================================================================
# STATIC SURFACE POTENTIAL
# =============================================================================

def reference_trap() -> ScenarioBuilder:
    """Closed-form estimates for the reference trap.

    Depth, minimum shift, modulation transfer at 120 nm, condensate
    parameters, cantilever noise amplitudes and detection limits.
    """
    return (
        create_scenario("reference-trap")
        .trap(800, 10.4e3, 10.5e3)
        .at_distance(1.5)
        .metallized(130)
        .dielectric(10)
        .condensate(2000, temperature_nk=500)
        .ensemble(2000, 20.0)
        .estimates()
    )


def reference_potential() -> ScenarioBuilder:
    """U(z)/h across the slab and out to 3 um on both sides."""
    return (
        create_scenario("reference-potential")
        .trap(800, 10.4e3, 10.5e3)
        .at_distance(1.5)
        .metallized(130)
        .potential(-3.0, 3.0, points=601)
    )


# =============================================================================
# LOSS CURVES - atoms as a caliper
# =============================================================================

def loss_metallized() -> ScenarioBuilder:
    """chi(d) towards the metallized face, 10 kHz trap, 1 ms hold."""
    return (
        create_scenario("loss-metallized")
        .trap(800, 10e3, 10e3)
        .at_distance(1.5)
        .condensate(2000, over_tc=0.5)
        .loss(1.0)
        .loss_curve(0.3, 2.0, 10)
    )


def loss_dielectric() -> ScenarioBuilder:
    """chi(d) towards the dielectric face, same trap and hold."""
    return (
        create_scenario("loss-dielectric")
        .trap(800, 10e3, 10e3)
        .at_distance(1.5, side="dielectric")
        .condensate(2000, over_tc=0.5)
        .loss(1.0)
        .loss_curve(0.3, 2.0, 10)
    )


def loss_bimodal() -> ScenarioBuilder:
    """Metallized curve with separate condensate and thermal components and the rate cutoff."""
    return (
        loss_metallized()
        .condensate(2000, over_tc=0.6)
        .loss(1.0, bimodal=True, rate_cutoff=True)
        .named("loss-bimodal")
    )


# =============================================================================
# DRIVEN COUPLING - cantilever excites the atoms
# =============================================================================

def resonance() -> ScenarioBuilder:
    """Remaining atoms against drive frequency around the cantilever resonance.

    The atoms see omega_z = omega_m at 1.5 um, so the centre-of-mass mode is
    driven resonantly and the dip follows the cantilever response.
    """
    return (
        create_scenario("resonance")
        .seed(7)
        .trap(800, 10e3, 10e3)
        .at_distance(1.5, frequency_at_distance=True)
        .condensate(2000, temperature_nk=500)
        .cantilever(10e3, drive_vpp=1.5)
        .ensemble(400, 3.0)
        .resonance(-12, 12, 1)
    )


def amplitude() -> ScenarioBuilder:
    """Contrast against cantilever amplitude on resonance."""
    return (
        resonance()
        .ensemble(1000, 3.0)
        .amplitude(0, 120, 10)
        .named("amplitude")
    )


def distance() -> ScenarioBuilder:
    """Contrast against trap distance at full drive."""
    return (
        resonance()
        .distance(1.2, 2.0, 100)
        .named("distance")
    )


def spectrum() -> ScenarioBuilder:
    """SNR against trap frequency; peaks at omega_m and omega_m / 2."""
    low = [4.6e3, 4.8e3, 5.0e3, 5.2e3, 5.4e3]
    high = [9.2e3, 9.6e3, 10.0e3, 10.4e3, 10.8e3]
    return (
        create_scenario("spectrum")
        .seed(11)
        .trap(800, 10e3, 10e3)
        .condensate(2000, temperature_nk=500)
        .cantilever(10e3, drive_vpp=1.5)
        .ensemble(400, 3.0)
        .spectrum(low + high, [1.7] * len(low) + [1.5] * len(high))
    )


# =============================================================================
# CALIBRATION
# =============================================================================

def calibration() -> ScenarioBuilder:
    """Recover z_c and both adsorbate coefficients from synthetic curves.

    Curves come from a slab displaced by 40 nm; beta is the model's own.
    """
    return (
        create_scenario("calibration")
        .trap(800, 10e3, 10e3)
        .slab(position_nm=40)
        .metallized(130)
        .dielectric(10)
        .condensate(2000, temperature_nk=100)
        .loss(0.0)
        .calibrate(d_start_um=0.3, d_stop_um=1.5, d_step_nm=5)
    )


# Registry of all scenarios
SCENARIOS = {
    # Static
    "reference-trap": reference_trap,
    "reference-potential": reference_potential,

    # Loss curves
    "loss-metallized": loss_metallized,
    "loss-dielectric": loss_dielectric,
    "loss-bimodal": loss_bimodal,

    # Driven coupling (slow: ensemble simulations)
    "resonance": resonance,
    "amplitude": amplitude,
    "distance": distance,
    "spectrum": spectrum,

    # Calibration
    "calibration": calibration,
}


if __name__ == "__main__":
    print("=" * 70)
    print("CANTILEVER COUPLING SCENARIOS")
    print("=" * 70)
    for name, scenario_fn in SCENARIOS.items():
        scenario = scenario_fn().build()
        print(f"  {name:22} | {scenario.kind:12} | d = {scenario.trap.distance_um} um ({scenario.trap.side})")
    print()
