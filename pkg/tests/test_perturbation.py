"""Tests for the second-order transfer amplitudes."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kdlab.core import CHANNELS, LaserConfig, ModeGrid, energy, mode_momentum
from kdlab.perturbation import (
    channel_probability,
    dirac_lowp3,
    dirac_propagator_20,
    f_coefficient,
    f_sum,
    rabi_parameters,
    schrodinger_propagator_20,
    spin_preserving_root,
)

LASER = LaserConfig.from_cycles(0.01, 0.02, 5, 150)

p3_values = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)


@settings(deadline=None, max_examples=60)
@given(p3=p3_values, sign=st.sampled_from([1, -1]))
def test_photon_branch_sum_identity(p3, sign):
    # the two photon branches collapse to sign/E1 exactly
    grid = ModeGrid(p3=p3)
    e1 = energy(mode_momentum(1, grid))
    assert abs(f_sum(sign, grid, LASER) - sign / e1) <= 1e-12


def test_f_coefficient_values():
    grid = ModeGrid()
    e0 = energy(mode_momentum(0, grid))
    e1 = 1.0  # mode 1 sits at p1 = 0
    assert f_coefficient(1, 1, grid, LASER) == pytest.approx(
        1.0 / (e1 - e0 + LASER.omega), rel=1e-12
    )
    assert f_coefficient(-1, -1, grid, LASER) == pytest.approx(
        1.0 / (-e1 - e0 - LASER.omega), rel=1e-14
    )
    with pytest.raises(ValueError, match="branch"):
        f_coefficient(1, 0, grid, LASER)


def test_one_photon_resonance_guarded():
    # tune the field frequency onto the 0 -> 1 gap: second order must refuse
    grid = ModeGrid()
    gap = math.sqrt(1 + 0.02 ** 2) - 1.0
    resonant = LaserConfig(0.01, gap, 10.0, 100.0)
    with pytest.raises(ValueError, match="resonance"):
        f_coefficient(1, 1, grid, resonant)


def test_reference_amplitude_and_probability():
    res = dirac_propagator_20(ModeGrid(), LASER)
    # purely imaginary spin-preserving amplitude, no spin flip at p3 = 0
    assert res.u_up == pytest.approx(-0.29452431127404316j, rel=1e-12)
    assert abs(res.u_down) == 0.0
    assert res.probability == pytest.approx(0.08674456993144947, rel=1e-12)
    assert res.duration == LASER.total_time


@settings(deadline=None, max_examples=60)
@given(p3=p3_values)
def test_channel_decomposition_is_exact(p3):
    res = dirac_propagator_20(ModeGrid(p3=p3), LASER)
    assert abs(res.channel_amplitudes[:, 0].sum() - res.u_up) <= 1e-14
    assert abs(res.channel_amplitudes[:, 1].sum() - res.u_down) <= 1e-14
    total = sum(
        res.channel_probability(sign, spin) for sign, spin in CHANNELS
    )
    incoherent = np.sum(np.abs(res.channel_amplitudes) ** 2)
    assert total == pytest.approx(incoherent, rel=1e-14)


def test_intermediate_channels_at_rest():
    # at p3 = 0 only two virtual routes exist: spin flip through the
    # positive branch, spin preservation through the negative branch
    res = dirac_propagator_20(ModeGrid(), LASER)
    assert res.channel_probability(1, 1) == 0.0
    assert res.channel_probability(-1, -1) == 0.0
    assert res.channel_probability(1, -1) > 0.0
    assert res.channel_probability(-1, 1) > 0.0
    neg = res.channel_probability(-1, 1) + res.channel_probability(-1, -1)
    pos = res.channel_probability(1, 1) + res.channel_probability(1, -1)
    assert neg / pos == pytest.approx(100040002.0, rel=1e-9)
    assert channel_probability(res, -1, 1) == res.channel_probability(-1, 1)


def test_low_p3_expansion_tracks_exact():
    for p3 in np.linspace(0.0, 0.2, 11):
        grid = ModeGrid(p3=p3)
        exact = dirac_propagator_20(grid, LASER).probability
        approx = dirac_lowp3(grid, LASER).probability
        assert abs(approx / exact - 1) < 0.01


def test_quadratic_falloff_coefficient():
    # fit P(p3)/P(0) - 1 against p3^2 (quartic term absorbed separately)
    ps = np.linspace(0.01, 0.15, 15)
    p0 = dirac_propagator_20(ModeGrid(), LASER).probability
    rel = np.array(
        [dirac_propagator_20(ModeGrid(p3=p), LASER).probability for p in ps]
    ) / p0 - 1
    coef = np.polynomial.polynomial.polyfit(ps ** 2, rel, deg=[1, 2])
    assert coef[1] == pytest.approx(-5.0, abs=0.1)


def test_spin_flip_stays_small():
    res = dirac_propagator_20(ModeGrid(p3=0.2), LASER)
    assert abs(res.u_down) / abs(res.u_up) < 0.15


def test_rabi_parameters():
    rp = rabi_parameters(LASER)
    assert rp.omega == pytest.approx(1.25e-5, rel=1e-15)
    assert rp.period_cycles == pytest.approx(1600.0, rel=1e-12)
    doubled = rabi_parameters(LaserConfig.from_cycles(0.02, 0.02, 5, 150))
    assert rp.period / doubled.period == pytest.approx(4.0, rel=1e-12)
    with pytest.raises(ValueError, match="amplitude"):
        rabi_parameters(LaserConfig.from_cycles(0.0, 0.02, 5, 150))


def test_schrodinger_amplitude():
    grid = ModeGrid(p3=0.3)
    res = schrodinger_propagator_20(grid, LASER)
    base = LASER.amplitude ** 2 * LASER.total_time / 16.0
    assert res.u_first == -1j * base
    assert res.u_second == 1j * base * 0.09
    assert res.u_total == pytest.approx(-1j * base * (1 - 0.09), rel=1e-15)
    # probability ratio is (1 - p3^2)^2: a -2 p3^2 falloff, not -5
    ratio = res.probability / schrodinger_propagator_20(ModeGrid(), LASER).probability
    assert ratio == pytest.approx((1 - 0.09) ** 2, rel=1e-14)


def test_schrodinger_and_dirac_disagree_on_falloff():
    grid = ModeGrid(p3=0.1)
    dirac = dirac_propagator_20(grid, LASER).probability
    schrod = schrodinger_propagator_20(grid, LASER).probability
    p0 = dirac_propagator_20(ModeGrid(), LASER).probability
    # same normalization at rest, visibly different curvature already at 0.1
    assert schrod / p0 > dirac / p0 * 1.01


def test_spin_preserving_root_location():
    root = spin_preserving_root(LASER)
    assert root == pytest.approx(1.0000830, abs=1e-4)
    assert abs(root - 1.0) < 0.02


def test_root_requires_sign_change():
    with pytest.raises(ValueError):
        spin_preserving_root(LASER, 0.1, 0.3)


def test_validity_warning():
    period = rabi_parameters(LASER).period
    with pytest.warns(RuntimeWarning, match="validity"):
        dirac_propagator_20(ModeGrid(), LASER, duration=period / 2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        dirac_propagator_20(ModeGrid(), LASER)  # reference case stays quiet
