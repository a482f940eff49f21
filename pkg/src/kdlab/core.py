"""Laser field configuration, mode-ladder kinematics and bispinor algebra.

Internal convention: hbar = m = c = 1. All interfaces quote momenta in mc,
energies in mc^2, times in hbar/mc^2, and durations optionally in laser
cycles of 2*pi/omega. With these reduced units the numerical values agree
with the conventional mc/hbar, mc^2, hbar/mc^2 quantities, so no conversion
factors appear anywhere in the formulas.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TWO_PI = 2.0 * np.pi

# (energy sign, spin) channel ordering used by every amplitude array:
# 0 (+,up), 1 (+,down), 2 (-,up), 3 (-,down)
CHANNELS = ((1, 1), (1, -1), (-1, 1), (-1, -1))

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# alpha_3 in the Dirac representation, [[0, sigma_3], [sigma_3, 0]]
ALPHA3 = np.block(
    [[np.zeros((2, 2), dtype=complex), PAULI[2]], [PAULI[2], np.zeros((2, 2), dtype=complex)]]
)


@dataclass(frozen=True)
class QuantumLabel:
    """Energy sign gamma (+1/-1) and spin along e3 (+1 up, -1 down)."""

    sign: int
    spin: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"energy sign must be +1 or -1, got {self.sign}")
        if self.spin not in (1, -1):
            raise ValueError(f"spin must be +1 or -1, got {self.spin}")

    @property
    def channel(self) -> int:
        return CHANNELS.index((self.sign, self.spin))


@dataclass(frozen=True)
class LaserConfig:
    """Standing-wave parameters: A(x,t) = A0 e3 cos(kL x) sin(omega t) xi(t).

    amplitude is eA0 in mc^2, wave_number is kL in mc/hbar, ramp_time and
    total_time are in hbar/mc^2. omega = c*kL follows from the wave number.
    """

    amplitude: float
    wave_number: float
    ramp_time: float
    total_time: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        if self.wave_number <= 0:
            raise ValueError("wave_number must be > 0")
        if not 0 <= 2 * self.ramp_time <= self.total_time:
            raise ValueError("need 0 <= 2*ramp_time <= total_time")

    @property
    def omega(self) -> float:
        return self.wave_number

    @property
    def cycle(self) -> float:
        """Duration of one laser cycle, 2*pi/omega."""
        return TWO_PI / self.omega

    @classmethod
    def from_cycles(cls, amplitude, wave_number, ramp_cycles, total_cycles):
        cycle = TWO_PI / wave_number
        return cls(amplitude, wave_number, ramp_cycles * cycle, total_cycles * cycle)

    def cycles_to_time(self, cycles):
        return np.asarray(cycles, dtype=float) * self.cycle

    def time_to_cycles(self, t):
        return np.asarray(t, dtype=float) / self.cycle


def envelope(t, cfg: LaserConfig):
    """Temporal envelope xi(t): sin^2 turn-on/off ramps, flat top, 0 outside."""
    t = np.asarray(t, dtype=float)
    dt, total = cfg.ramp_time, cfg.total_time
    if dt > 0:
        up = np.sin(np.pi * t / (2 * dt)) ** 2
        down = np.sin(np.pi * (total - t) / (2 * dt)) ** 2
    else:
        up = down = np.ones_like(t)
    out = np.select(
        [(t < 0) | (t > total), t < dt, t > total - dt],
        [np.zeros_like(t), up, down],
        default=1.0,
    )
    return out if out.ndim else float(out)


def envelope_slope(t, cfg: LaserConfig):
    """d(xi)/dt, nonzero only during the ramps."""
    t = np.asarray(t, dtype=float)
    dt, total = cfg.ramp_time, cfg.total_time
    if dt > 0:
        up = (np.pi / (2 * dt)) * np.sin(np.pi * t / dt)
        down = -(np.pi / (2 * dt)) * np.sin(np.pi * (total - t) / dt)
    else:
        up = down = np.zeros_like(t)
    out = np.select(
        [(t < 0) | (t > total), t < dt, t > total - dt],
        [np.zeros_like(t), up, down],
        default=0.0,
    )
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ModeGrid:
    """Discrete momentum ladder p_n = p0 + n kL e1 with p0 = (-kL, 0, p3).

    The window must contain the modes 0..2 that carry the diffraction
    process; spectator modes beyond that absorb virtual leakage.
    """

    n_min: int = -4
    n_max: int = 6
    p3: float = 0.0
    wave_number: float = 0.02

    def __post_init__(self):
        if not (self.n_min <= 0 and 2 <= self.n_max):
            raise ValueError("window must contain modes 0..2")
        if self.wave_number <= 0:
            raise ValueError("wave_number must be > 0")

    @property
    def modes(self) -> range:
        return range(self.n_min, self.n_max + 1)

    @property
    def size(self) -> int:
        return self.n_max - self.n_min + 1

    def index(self, n: int) -> int:
        """Array row of mode n."""
        if not self.n_min <= n <= self.n_max:
            raise ValueError(f"mode {n} outside window [{self.n_min}, {self.n_max}]")
        return n - self.n_min

    def widened(self, extra: int) -> "ModeGrid":
        return ModeGrid(self.n_min - extra, self.n_max + extra, self.p3, self.wave_number)


def mode_momentum(n: int, grid: ModeGrid) -> np.ndarray:
    """Momentum of mode n, ((n-1) kL, 0, p3) in units of mc."""
    if not grid.n_min <= n <= grid.n_max:
        raise ValueError(f"mode {n} outside window [{grid.n_min}, {grid.n_max}]")
    return np.array([(n - 1) * grid.wave_number, 0.0, grid.p3])


def energy(p) -> float | np.ndarray:
    """Free relativistic energy sqrt(1 + p^2) in mc^2 (positive branch)."""
    p = np.asarray(p, dtype=float)
    return np.sqrt(1.0 + np.sum(p * p, axis=-1))


def mode_energies(grid: ModeGrid) -> np.ndarray:
    return np.array([energy(mode_momentum(n, grid)) for n in grid.modes])


def g_factors(e: float) -> tuple[float, float]:
    """g+ = sqrt((E+1)/2E) and g- = 1/sqrt(2E(E+1)) for energy E."""
    return np.sqrt((e + 1.0) / (2.0 * e)), 1.0 / np.sqrt(2.0 * e * (e + 1.0))


def bispinor(p, label: QuantumLabel) -> np.ndarray:
    """Free-particle eigenspinor u^{gamma,s}(p), normalized to u^dag u = 1.

    gamma = + puts g+ chi^s in the upper components and g- sigma.p chi^s in
    the lower ones; gamma = - swaps the blocks with a sign on sigma.p.
    """
    p = np.asarray(p, dtype=float)
    gp, gm = g_factors(energy(p))
    chi = np.array([1.0, 0.0] if label.spin == 1 else [0.0, 1.0], dtype=complex)
    sigma_p = p[0] * PAULI[0] + p[1] * PAULI[1] + p[2] * PAULI[2]
    if label.sign == 1:
        return np.concatenate([gp * chi, gm * (sigma_p @ chi)])
    return np.concatenate([-gm * (sigma_p @ chi), gp * chi])


def spinor_matrix_element(n, n_prime, a: QuantumLabel, b: QuantumLabel, grid: ModeGrid) -> complex:
    """Direct contraction u^a(p_n)^dag alpha_3 u^b(p_n')."""
    u_a = bispinor(mode_momentum(n, grid), a)
    u_b = bispinor(mode_momentum(n_prime, grid), b)
    return complex(np.conj(u_a) @ ALPHA3 @ u_b)


@dataclass(frozen=True)
class TsrwCoefficients:
    g_plus_n: float
    g_minus_n: float
    g_plus_np: float
    g_minus_np: float
    t: float
    s3: float
    r1: float
    w31: float
    w33: float


def tsrw_coefficients(n, n_prime, grid: ModeGrid) -> TsrwCoefficients:
    """Exact t, s^3, r^1, w^31, w^33 contractions for the mode pair (n, n')."""
    pn = mode_momentum(n, grid)
    pq = mode_momentum(n_prime, grid)
    gp_n, gm_n = g_factors(energy(pn))
    gp_q, gm_q = g_factors(energy(pq))
    gmgm = gm_n * gm_q
    return TsrwCoefficients(
        g_plus_n=gp_n,
        g_minus_n=gm_n,
        g_plus_np=gp_q,
        g_minus_np=gm_q,
        t=gp_n * gp_q + float(pn @ pq) * gmgm,
        s3=pn[2] * gm_n * gp_q + pq[2] * gp_n * gm_q,
        r1=pn[0] * gm_n * gp_q - pq[0] * gp_n * gm_q,
        w31=(pn[2] * pq[0] + pn[0] * pq[2]) * gmgm,
        w33=2.0 * pn[2] * pq[2] * gmgm,
    )


def l_matrix(n, n_prime, grid: ModeGrid) -> np.ndarray:
    """4x4 spinor-coupling block for (n, n') in CHANNELS order.

    Rows are the final (gamma, s), columns the initial (gamma', s'). Built
    from the t/s/r/w contractions; same-sign blocks carry s3 and r1, the
    cross-sign blocks t - w33 and w31. The (-,-) block is the negative of
    the (+,+) block, which the contraction identity test pins down.
    """
    c = tsrw_coefficients(n, n_prime, grid)
    pp = np.array([[c.s3, -c.r1], [c.r1, c.s3]])
    cross = np.array([[c.t - c.w33, -c.w31], [-c.w31, -(c.t - c.w33)]])
    out = np.empty((4, 4))
    out[:2, :2] = pp
    out[2:, 2:] = -pp
    out[:2, 2:] = cross
    out[2:, :2] = cross
    return out


@lru_cache(maxsize=None)
def _l_tables_cached(grid: ModeGrid):
    m = grid.size
    l_minus = np.zeros((m, 4, 4))
    l_plus = np.zeros((m, 4, 4))
    for i, n in enumerate(grid.modes):
        if n - 1 >= grid.n_min:
            l_minus[i] = l_matrix(n, n - 1, grid)
        if n + 1 <= grid.n_max:
            l_plus[i] = l_matrix(n, n + 1, grid)
    l_minus.setflags(write=False)
    l_plus.setflags(write=False)
    return l_minus, l_plus


def l_tables(grid: ModeGrid) -> tuple[np.ndarray, np.ndarray]:
    """Neighbor coupling tables: l_minus[i] = L(n_i, n_i - 1), l_plus[i] = L(n_i, n_i + 1).

    Rows at the window edges stay zero. Cached per grid and read-only.
    """
    return _l_tables_cached(grid)
