"""Second-order amplitudes for the two-photon momentum transfer.

Everything here treats the pulse as flat (envelope identically one for a
given interaction time), which is the regime the direct integration
approaches as the ramps shrink.  The central object is the second-order
amplitude from mode 0 to mode 2 through the intermediate mode 1, kept
resolved by intermediate energy sign and spin so the contribution of
each virtual channel can be read off separately.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .core import (
    CHANNELS,
    TWO_PI,
    LaserConfig,
    ModeGrid,
    energy,
    l_matrix,
    mode_momentum,
)

__all__ = [
    "f_coefficient",
    "f_sum",
    "PerturbativeResult",
    "dirac_propagator_20",
    "dirac_lowp3",
    "channel_probability",
    "RabiParameters",
    "rabi_parameters",
    "SchrodingerResult",
    "schrodinger_propagator_20",
    "spin_preserving_root",
]

_FINAL_SPINS = (1, -1)


def f_coefficient(sign: int, branch: int, grid: ModeGrid, laser: LaserConfig) -> float:
    """Energy-denominator weight of one photon branch, 1/(sign*E1 - E0 + branch*w).

    ``sign`` labels the energy branch of the intermediate state, ``branch``
    the absorbed (+1) or emitted (-1) photon.  Close to a one-photon
    resonance the second-order treatment is meaningless, so a vanishing
    denominator raises instead of returning a huge number.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    if branch not in (1, -1):
        raise ValueError(f"branch must be +1 or -1, got {branch}")
    e0 = energy(mode_momentum(0, grid))
    e1 = energy(mode_momentum(1, grid))
    if sign == 1:
        # E1 - E0 loses most digits to cancellation; the modes share p3,
        # so the gap reduces exactly to a difference of squared p1 parts
        q0 = mode_momentum(0, grid)[0]
        q1 = mode_momentum(1, grid)[0]
        gap = (q1 - q0) * (q1 + q0) / (e1 + e0)
    else:
        gap = -(e1 + e0)
    denom = gap + branch * laser.omega
    if abs(denom) < 1e-9:
        raise ValueError(
            "one-photon resonance: intermediate denominator "
            f"{denom!r} for sign={sign}, branch={branch}"
        )
    return 1.0 / denom


def f_sum(sign: int, grid: ModeGrid, laser: LaserConfig) -> float:
    """Both photon branches together; equals sign/E1 identically."""
    return f_coefficient(sign, 1, grid, laser) + f_coefficient(sign, -1, grid, laser)


@dataclass
class PerturbativeResult:
    """Mode 0 to mode 2 amplitude split by intermediate channel.

    ``channel_amplitudes`` has shape (4, 2): intermediate channel in
    :data:`kdlab.core.CHANNELS` order along the first axis, final spin
    (up, down) along the second.  The totals are coherent sums over the
    first axis.
    """

    duration: float
    u_up: complex
    u_down: complex
    channel_amplitudes: np.ndarray

    @property
    def probability(self) -> float:
        return abs(self.u_up) ** 2 + abs(self.u_down) ** 2

    @property
    def probability_up(self) -> float:
        return abs(self.u_up) ** 2

    @property
    def probability_down(self) -> float:
        return abs(self.u_down) ** 2

    def channel_probability(self, sign: int, spin: int) -> float:
        """Spin-summed weight of one intermediate channel."""
        row = self.channel_amplitudes[CHANNELS.index((sign, spin))]
        return float(np.sum(np.abs(row) ** 2))


def channel_probability(result: PerturbativeResult, sign: int, spin: int) -> float:
    return result.channel_probability(sign, spin)


def _assemble(
    l21: np.ndarray,
    l10: np.ndarray,
    f_pos: float,
    f_neg: float,
    prefactor: complex,
    duration: float,
) -> PerturbativeResult:
    weight = {1: f_pos, -1: f_neg}
    amps = np.zeros((4, 2), dtype=np.complex128)
    col0 = CHANNELS.index((1, 1))  # initial state: positive energy, spin up
    for ci, (g_mid, _) in enumerate(CHANNELS):
        for si, s in enumerate(_FINAL_SPINS):
            row = CHANNELS.index((1, s))
            amps[ci, si] = prefactor * weight[g_mid] * l21[row, ci] * l10[ci, col0]
    return PerturbativeResult(
        duration=duration,
        u_up=complex(amps[:, 0].sum()),
        u_down=complex(amps[:, 1].sum()),
        channel_amplitudes=amps,
    )


def _warn_if_large(result: PerturbativeResult) -> None:
    if result.probability > 0.5:
        warnings.warn(
            "second-order amplitude outside its validity range "
            f"(transfer probability {result.probability:.3g})",
            RuntimeWarning,
            stacklevel=3,
        )


def dirac_propagator_20(
    grid: ModeGrid, laser: LaserConfig, duration: float | None = None
) -> PerturbativeResult:
    """Second-order transfer amplitude of the relativistic theory.

    ``duration`` is the flat interaction time; it defaults to the full
    pulse length.  A transfer probability beyond 0.5 is far outside the
    perturbative regime and triggers a warning.
    """
    t_int = float(laser.total_time if duration is None else duration)
    pref = 1j * (laser.amplitude / 4.0) ** 2 * t_int
    result = _assemble(
        l_matrix(2, 1, grid),
        l_matrix(1, 0, grid),
        f_sum(1, grid, laser),
        f_sum(-1, grid, laser),
        pref,
        t_int,
    )
    _warn_if_large(result)
    return result


def _l_matrix_lowp3(n: int, n_prime: int, grid: ModeGrid) -> np.ndarray:
    """Leading small-p3, small-kL form of the coupling matrix."""
    k = grid.wave_number
    p3 = grid.p3
    t_c = 1.0
    s3 = p3
    r1 = (n - n_prime) * k / 2.0
    w31 = (n + n_prime - 2) * k * p3 / 4.0
    w33 = p3 * p3 / 2.0
    same = np.array([[s3, -r1], [r1, s3]])
    cross = np.array([[t_c - w33, -w31], [-w31, -(t_c - w33)]])
    out = np.zeros((4, 4))
    out[:2, :2] = same
    out[2:, 2:] = -same
    out[:2, 2:] = cross
    out[2:, :2] = cross
    return out


def dirac_lowp3(
    grid: ModeGrid, laser: LaserConfig, duration: float | None = None
) -> PerturbativeResult:
    """Transfer amplitude built from the small-p3 expansion of every factor.

    Useful as a cross-check of the exact chain: to leading order the
    spin-preserving probability falls as 1 - 5 p3^2 while the
    nonrelativistic result falls as 1 - 2 p3^2.
    """
    t_int = float(laser.total_time if duration is None else duration)
    pref = 1j * (laser.amplitude / 4.0) ** 2 * t_int
    f_pos = 1.0 - grid.p3 ** 2 / 2.0
    result = _assemble(
        _l_matrix_lowp3(2, 1, grid),
        _l_matrix_lowp3(1, 0, grid),
        f_pos,
        -f_pos,
        pref,
        t_int,
    )
    _warn_if_large(result)
    return result


@dataclass(frozen=True)
class RabiParameters:
    """Two-photon Rabi frequency and period of the resonant transfer."""

    omega: float
    period: float
    period_cycles: float


def rabi_parameters(laser: LaserConfig) -> RabiParameters:
    """Closed-form resonance parameters at p3 = 0.

    The spin-preserving amplitude grows linearly with time at the rate
    Omega/2 with Omega = (e A0)^2 / 8, so the population returns after
    2 pi / Omega.
    """
    if laser.amplitude == 0:
        raise ValueError("two-photon coupling vanishes at zero amplitude")
    omega = laser.amplitude ** 2 / 8.0
    period = TWO_PI / omega
    return RabiParameters(omega=omega, period=period, period_cycles=period / laser.cycle)


@dataclass(frozen=True)
class SchrodingerResult:
    """Second-order transfer amplitude of the nonrelativistic theory."""

    duration: float
    u_first: complex
    u_second: complex

    @property
    def u_total(self) -> complex:
        return self.u_first + self.u_second

    @property
    def probability(self) -> float:
        return abs(self.u_total) ** 2


def schrodinger_propagator_20(
    grid: ModeGrid, laser: LaserConfig, duration: float | None = None
) -> SchrodingerResult:
    """Nonrelativistic counterpart of the two-photon amplitude.

    ``u_first`` comes from the quadratic field coupling acting once,
    ``u_second`` from the linear coupling acting twice; the latter
    carries the p3^2 correction that softens the quadratic falloff to
    1 - 2 p3^2 in probability.
    """
    t_int = float(laser.total_time if duration is None else duration)
    base = laser.amplitude ** 2 * t_int / 16.0
    return SchrodingerResult(
        duration=t_int,
        u_first=-1j * base,
        u_second=1j * base * grid.p3 ** 2,
    )


def spin_preserving_root(
    laser: LaserConfig,
    lo: float = 0.5,
    hi: float = 1.5,
    *,
    wave_number: float | None = None,
    xtol: float = 1e-6,
) -> float:
    """Longitudinal momentum where the spin-preserving transfer vanishes.

    The spin-up amplitude is purely imaginary and changes sign once
    between ``lo`` and ``hi``; bisection brackets the crossing.  Raises
    if the bracket does not straddle a sign change.
    """
    k = laser.wave_number if wave_number is None else wave_number

    def f(p3: float) -> float:
        grid = ModeGrid(p3=p3, wave_number=k)
        return dirac_propagator_20(grid, laser, duration=laser.cycle).u_up.imag

    return float(bisect(f, lo, hi, xtol=xtol))
