"""Release criteria, one test per criterion.

Each test reproduces one headline claim end to end at production
parameters and prints the numbers it judged, so the verbose report reads
as a checklist.  Expensive simulations are shared via module fixtures;
the whole file is the slow part of the suite.
"""

import numpy as np
import pytest

from kdlab.classical import (
    TrajectoryState,
    exact_velocity,
    integrate_trajectory,
    pond_propagator,
    velocity_terms,
)
from kdlab.core import (
    CHANNELS,
    PAULI,
    LaserConfig,
    ModeGrid,
    QuantumLabel,
    bispinor,
    energy,
    l_matrix,
    mode_momentum,
    spinor_matrix_element,
)
from kdlab.dynamics import AmplitudeState, ChannelMask, IntegratorConfig, evolve
from kdlab.experiments import fit_first_maximum, preset
from kdlab.perturbation import (
    dirac_lowp3,
    dirac_propagator_20,
    f_sum,
    rabi_parameters,
    schrodinger_propagator_20,
    spin_preserving_root,
)

K = 0.02
AMP = 0.01


def grid_at(p3, window=(-4, 6)):
    return ModeGrid(n_min=window[0], n_max=window[1], p3=p3, wave_number=K)


def quadratic_coefficient(p3_values, ratios):
    """Coefficient of p3^2 in a ratio curve, quartic term absorbed."""
    x = np.asarray(p3_values) ** 2
    coefs = np.polynomial.polynomial.polyfit(x, np.asarray(ratios), deg=2)
    return coefs[1]


@pytest.fixture(scope="module")
def rabi_run():
    config = preset("rabi")
    series = evolve(
        AmplitudeState.initial(config.grid()),
        config.laser,
        integrator=config.integrator,
        sample_every_cycles=1.0,
    )
    return config.laser, series


@pytest.fixture(scope="module")
def ablation_runs():
    config = preset("ablation")
    out = {}
    for name, mask in (
        ("full", ChannelMask.full()),
        ("cross", ChannelMask.cross_only()),
        ("same", ChannelMask.same_only()),
    ):
        out[name] = evolve(
            AmplitudeState.initial(config.grid()),
            config.laser,
            mask=mask,
            integrator=config.integrator,
            sample_every_cycles=config.total_cycles,
        )
    return out


@pytest.fixture(scope="module")
def scan_pairs():
    config = preset("scan-p3")
    laser = config.laser
    pairs = []
    for p3 in (0.0, 0.5, 1.0, 1.5, 2.0):
        grid = grid_at(p3)
        series = evolve(
            AmplitudeState.initial(grid),
            laser,
            integrator=config.integrator,
            sample_every_cycles=config.total_cycles,
        )
        numeric = float(series.probability(2)[-1])
        perturbative = dirac_propagator_20(grid, laser).probability
        pairs.append((p3, numeric, perturbative))
    return pairs


def test_criterion_1_rabi_period(rabi_run):
    laser, series = rabi_run
    t_max, bracketed = fit_first_maximum(
        series.times_cycles, series.probability(2)
    )
    assert bracketed
    fitted_period = 2.0 * t_max
    closed_form = rabi_parameters(laser).period_cycles
    print(
        f"criterion 1: first maximum at {t_max:.2f} cycles, fitted period "
        f"{fitted_period:.2f} cycles vs closed form {closed_form:.1f}"
    )
    assert closed_form == pytest.approx(1600.0, rel=1e-12)
    assert abs(fitted_period / 1600.0 - 1.0) <= 0.02


def test_criterion_2_ablation_asymmetry(ablation_runs):
    p_full = ablation_runs["full"].channel_probability(2, 1, 1)[-1]
    p_same = ablation_runs["same"].channel_probability(2, 1, 1)[-1]
    p_cross = ablation_runs["cross"].channel_probability(2, 1, 1)[-1]
    print(
        f"criterion 2: full {p_full:.6e}, same-sign-only {p_same:.3e} "
        f"({p_same / p_full:.2e} of full), cross-only off by "
        f"{abs(p_cross / p_full - 1):.2e}"
    )
    assert p_same <= 1e-4 * p_full
    assert abs(p_cross / p_full - 1.0) <= 0.02


def test_criterion_3_perturbative_numeric_agreement(scan_pairs):
    worst = 0.0
    for p3, numeric, perturbative in scan_pairs:
        deviation = abs(numeric / perturbative - 1.0)
        worst = max(worst, deviation)
        print(
            f"criterion 3: p3 = {p3:.1f}: numeric {numeric:.6e} vs "
            f"closed form {perturbative:.6e} ({deviation:.2%})"
        )
        assert deviation <= 0.05
    print(f"criterion 3: worst relative deviation {worst:.2%}")


def test_criterion_4_low_p3_quadratic():
    laser = preset("scan-p3").laser
    p3s = np.linspace(0.0, 0.15, 16)
    p0 = dirac_propagator_20(grid_at(0.0), laser).probability
    ratios = [dirac_propagator_20(grid_at(p3), laser).probability / p0 for p3 in p3s]
    coef = quadratic_coefficient(p3s, ratios)
    print(f"criterion 4: fitted quadratic coefficient {coef:.4f} (target -5 +/- 2%)")
    assert abs(coef - (-5.0)) <= 0.1


def test_criterion_5_schrodinger_dirac_discrepancy():
    laser = preset("scan-p3").laser
    s0 = schrodinger_propagator_20(grid_at(0.0), laser).probability
    for p3 in (0.1, 0.3, 0.5):
        ratio = schrodinger_propagator_20(grid_at(p3), laser).probability / s0
        assert ratio == pytest.approx((1.0 - p3**2) ** 2, rel=1e-12)

    # the -5 law carries a relative k^2-sized softening at finite wave
    # number (the same one behind the -4.994 fit above), so the 1e-12
    # reproduction check must sit deep enough in p3 for that remainder
    # and the quartic term to fall below tolerance
    d0 = dirac_lowp3(grid_at(0.0), laser).probability
    p3 = 5e-6
    ratio = dirac_lowp3(grid_at(p3), laser).probability / d0
    assert abs(ratio - (1.0 - 5.0 * p3**2)) <= 1e-12

    p3s = np.linspace(0.0, 0.15, 16)
    fit_s = quadratic_coefficient(p3s, [(1.0 - p**2) ** 2 for p in p3s])
    ratios = [
        dirac_propagator_20(grid_at(p), laser).probability
        / dirac_propagator_20(grid_at(0.0), laser).probability
        for p in p3s
    ]
    fit_d = quadratic_coefficient(p3s, ratios)
    print(
        f"criterion 5: nonrelativistic coefficient {fit_s:.6f}, "
        f"relativistic {fit_d:.4f}; gap {fit_s - fit_d:.3f}"
    )
    assert fit_s == pytest.approx(-2.0, abs=1e-9)
    assert fit_s - fit_d > 2.5


def test_criterion_6_classical_relativistic_scaling():
    config = preset("classical-scan")
    laser = config.classical_laser
    p3s = np.array([0.0, 0.05, 0.1, 0.15, 0.2, 0.25])
    finals = []
    for p3 in p3s:
        trajectory = integrate_trajectory(
            TrajectoryState.at_rest(config.x1_start, p3),
            laser,
            steps_per_cycle=config.trajectory_steps_per_cycle,
            sample_every_cycles=config.total_cycles,
        )
        finals.append(trajectory.final.p1)
    finals = np.array(finals)
    coef_p1 = quadratic_coefficient(p3s, finals / finals[0])
    coef_p1sq = quadratic_coefficient(p3s, (finals / finals[0]) ** 2)

    quantum = [
        dirac_propagator_20(grid_at(p), laser).probability for p in p3s
    ]
    coef_quantum = quadratic_coefficient(p3s, np.array(quantum) / quantum[0])
    print(
        f"criterion 6: deflection coefficient {coef_p1:.4f} (target -2.5 "
        f"+/- 0.2); squared {coef_p1sq:.4f} vs quantum {coef_quantum:.4f}"
    )
    assert abs(coef_p1 - (-2.5)) <= 0.2
    assert abs(coef_p1sq - coef_quantum) <= 0.4


def test_criterion_7_channel_dominance_and_dip():
    config = preset("channels")
    laser = config.laser
    result = dirac_propagator_20(grid_at(0.0), laser)
    positive = result.channel_probability(1, 1) + result.channel_probability(1, -1)
    negative = result.channel_probability(-1, 1) + result.channel_probability(-1, -1)
    ratio = negative / positive
    target = (2.0 / K) ** 4
    root = spin_preserving_root(laser)
    print(
        f"criterion 7: negative/positive ratio {ratio:.4e} "
        f"(target {target:.1e} within factor 2); root {root:.6f}"
    )
    assert target / 2.0 <= ratio <= target * 2.0
    assert abs(root - 1.0) <= 0.02


def test_criterion_8_identity_suites(rabi_run, ablation_runs):
    laser = preset("ablation").laser

    # energy-denominator sum collapses to sign/E1
    worst_f = 0.0
    for p3 in np.linspace(0.0, 2.5, 26):
        grid = grid_at(p3)
        e1 = energy(mode_momentum(1, grid))
        for sign in (1, -1):
            worst_f = max(worst_f, abs(f_sum(sign, grid, laser) - sign / e1))
    assert worst_f <= 1e-12

    # coupling table equals the direct bispinor contraction
    rng = np.random.default_rng(7)
    worst_l = 0.0
    for _ in range(50):
        n = int(rng.integers(-4, 7))
        n_prime = int(rng.integers(-4, 7))
        grid = grid_at(float(rng.uniform(-2.5, 2.5)))
        mat = l_matrix(n, n_prime, grid)
        for i, (sign, spin) in enumerate(CHANNELS):
            for j, (sign_p, spin_p) in enumerate(CHANNELS):
                direct = spinor_matrix_element(
                    n,
                    n_prime,
                    QuantumLabel(sign, spin),
                    QuantumLabel(sign_p, spin_p),
                    grid,
                )
                worst_l = max(
                    worst_l, abs(direct.imag), abs(direct.real - mat[i, j])
                )
    assert worst_l <= 1e-12

    # averaged-grating amplitude equals the nonrelativistic second order
    worst_p = 0.0
    for _ in range(200):
        amp = float(rng.uniform(1e-4, 0.2))
        k = float(rng.uniform(1e-3, 0.5))
        p3 = float(rng.uniform(-2.0, 2.0))
        cycles = float(rng.uniform(1.0, 500.0))
        trial_laser = LaserConfig.from_cycles(amp, k, 0.0, cycles)
        trial_grid = ModeGrid(n_min=-2, n_max=4, p3=p3, wave_number=k)
        pond = pond_propagator(trial_grid, trial_laser)
        schro = schrodinger_propagator_20(trial_grid, trial_laser).u_total
        worst_p = max(worst_p, abs(pond - schro) / abs(schro))
    assert worst_p <= 1e-13

    # norm drift over the production runs
    _, rabi_series = rabi_run
    drift = max(
        float(np.max(np.abs(rabi_series.norms - 1.0))),
        float(np.max(np.abs(ablation_runs["full"].norms - 1.0))),
    )
    assert drift <= 1e-8

    # orthonormality and eigenstate residuals of the basis spinors
    beta = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)
    zero = np.zeros((2, 2), dtype=complex)
    alphas = [np.block([[zero, s], [s, zero]]) for s in PAULI]
    worst_b = 0.0
    for p3 in (0.0, 0.5, 2.0):
        grid = grid_at(p3)
        for n in (-1, 0, 1, 2):
            p = mode_momentum(n, grid)
            h = sum(p[i] * alphas[i] for i in range(3)) + beta
            basis = np.column_stack(
                [bispinor(p, QuantumLabel(sign, spin)) for sign, spin in CHANNELS]
            )
            worst_b = max(
                worst_b,
                float(np.max(np.abs(basis.conj().T @ basis - np.eye(4)))),
            )
            for col, (sign, _) in enumerate(CHANNELS):
                residual = h @ basis[:, col] - sign * energy(p) * basis[:, col]
                worst_b = max(worst_b, float(np.max(np.abs(residual))))
    assert worst_b <= 1e-12

    print(
        f"criterion 8: residuals f-sum {worst_f:.1e}, coupling table "
        f"{worst_l:.1e}, averaged grating {worst_p:.1e}, norm drift "
        f"{drift:.1e}, basis {worst_b:.1e}"
    )


def test_criterion_9_velocity_residual_scaling():
    # probe each small parameter with the other held small, so the
    # cross terms of the mixed expansion stay out of the fit
    laser = LaserConfig.from_cycles(0.01, K, 10, 150)
    x, t = 0.7 / K, 1.1 / laser.omega

    def residual(p3, use_laser):
        return velocity_terms(x, t, p3, use_laser).total - exact_velocity(
            x, t, p3, use_laser
        )

    p3s = np.geomspace(0.03, 0.3, 6)
    sizes = np.array([np.linalg.norm(residual(p3, laser)) for p3 in p3s])
    exponent_p3 = np.polyfit(np.log(p3s), np.log(sizes), 1)[0]
    spread_p3 = (sizes / p3s**3).max() / (sizes / p3s**3).min()

    base = residual(0.01, LaserConfig.from_cycles(1e-9, K, 10, 150))
    amps = np.geomspace(0.01, 0.1, 6)
    sizes_a = np.array(
        [
            np.linalg.norm(
                residual(0.01, LaserConfig.from_cycles(a, K, 10, 150)) - base
            )
            for a in amps
        ]
    )
    exponent_amp = np.polyfit(np.log(amps), np.log(sizes_a), 1)[0]
    spread_amp = (sizes_a / amps**3).max() / (sizes_a / amps**3).min()

    print(
        f"criterion 9: fit exponents p3 {exponent_p3:.3f}, amplitude "
        f"{exponent_amp:.3f}; cubic-normalized spreads {spread_p3:.2f}, "
        f"{spread_amp:.2f}"
    )
    # an exactly cubic residual fits marginally below 3 through its
    # subleading term, so the gate allows a 0.1 fit margin and pins the
    # cubic-normalized size to stay bounded across the sweep instead
    assert exponent_p3 >= 2.9
    assert exponent_amp >= 2.9
    assert spread_p3 <= 2.0
    assert spread_amp <= 2.0
