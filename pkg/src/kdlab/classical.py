"""Classical point-particle motion in the standing wave.

The fields derive from the same vector potential as the quantum
treatment: electric field along e3 with the envelope-slope term kept, so
it stays an exact time derivative, and magnetic field along e2.  Motion
therefore stays in the (e1, e3) plane.  Beyond the exact trajectories
this module carries the cycle-averaged descriptions: the ponderomotive
potential, its relativistic correction, and the term-by-term expansion
of the velocity used to interpret the averaged drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .core import LaserConfig, ModeGrid, envelope, envelope_slope

__all__ = [
    "em_fields",
    "Ponderomotive",
    "nonrel_ponderomotive",
    "pond_matrix_element",
    "pond_propagator",
    "rel_ponderomotive_force",
    "quiver_momentum",
    "VelocityTerms",
    "velocity_terms",
    "exact_velocity",
    "TrajectoryState",
    "TrajectorySeries",
    "integrate_trajectory",
]


def em_fields(x1, t, laser: LaserConfig):
    """Force fields (e E3, e B2) at position x1 and time t.

    Both carry the pulse envelope; the electric field keeps the
    envelope-slope term so that Faraday's law holds exactly during the
    ramps, not just on the flat top.
    """
    xi = envelope(t, laser)
    xi_slope = envelope_slope(t, laser)
    kx = laser.wave_number * np.asarray(x1, dtype=float)
    wt = laser.omega * np.asarray(t, dtype=float)
    scale = laser.amplitude * laser.wave_number
    e3 = -scale * np.cos(kx) * (np.cos(wt) * xi + np.sin(wt) * xi_slope / laser.omega)
    b2 = scale * np.sin(kx) * np.sin(wt) * xi
    return e3, b2


@dataclass(frozen=True)
class Ponderomotive:
    """Cycle-averaged potential and the force it exerts."""

    force: float
    potential: float


def nonrel_ponderomotive(x1: float, laser: LaserConfig) -> Ponderomotive:
    """Averaged potential (eA0)^2 cos^2(kx) / 4 and its negative gradient."""
    k = laser.wave_number
    a2 = laser.amplitude ** 2
    return Ponderomotive(
        force=a2 * k / 2.0 * math.sin(k * x1) * math.cos(k * x1),
        potential=a2 / 4.0 * math.cos(k * x1) ** 2,
    )


def pond_matrix_element(n: int, n_prime: int, laser: LaserConfig) -> float:
    """Momentum-mode element of the averaged potential.

    cos^2 splits into a constant and a two-photon grating, so only
    elastic and second-neighbour couplings survive.
    """
    a2 = laser.amplitude ** 2
    if n == n_prime:
        return a2 / 8.0
    if abs(n - n_prime) == 2:
        return a2 / 16.0
    return 0.0


def pond_propagator(
    grid: ModeGrid, laser: LaserConfig, duration: float | None = None
) -> complex:
    """First-order 0 to 2 amplitude driven by the averaged grating.

    The (1 - p3^2) factor is the leading correction from the
    longitudinal drift, which weakens the effective coupling; this
    closed form matches the nonrelativistic second-order amplitude
    exactly.
    """
    t_int = float(laser.total_time if duration is None else duration)
    return -1j * laser.amplitude ** 2 * t_int / 16.0 * (1.0 - grid.p3 ** 2)


def rel_ponderomotive_force(x1: float, p3: float, laser: LaserConfig) -> float:
    """Averaged transverse force on a longitudinally drifting electron.

    The drift softens the force by (1 - 5 p3^2 / 2): a stronger falloff
    than the potential picture alone would suggest.
    """
    k = laser.wave_number
    return (
        laser.amplitude ** 2 * k / 2.0
        * (1.0 - 2.5 * p3 * p3)
        * math.sin(k * x1) * math.cos(k * x1)
    )


def quiver_momentum(x1: float, t: float, p3: float, laser: LaserConfig) -> np.ndarray:
    """Leading oscillatory momentum (p1, p3) of a drifting electron.

    The longitudinal component follows the local vector potential; the
    transverse one appears only through the drift and the standing-wave
    gradient.
    """
    kx = laser.wave_number * x1
    wt = laser.omega * t
    return np.array([
        laser.amplitude * p3 * math.sin(kx) * math.cos(wt),
        p3 - laser.amplitude * math.cos(kx) * math.sin(wt),
    ])


@dataclass(frozen=True)
class VelocityTerms:
    """Term-by-term expansion of the velocity in field strength and drift.

    Transverse (e1): ``field_drift`` is first order in both the field
    and p3, ``field_drift_squared`` second order in both.  Longitudinal
    (e3): ``drift`` is the bare p3, ``average_softening`` the
    second-order field correction linear in p3, ``drift_curvature`` the
    first-order field term quadratic in p3, ``quiver`` the pure field
    oscillation.  Dropped terms are cubic in either small quantity.
    """

    field_drift: float
    field_drift_squared: float
    drift: float
    average_softening: float
    drift_curvature: float
    quiver: float

    @property
    def transverse(self) -> float:
        return self.field_drift + self.field_drift_squared

    @property
    def longitudinal(self) -> float:
        return (
            self.drift + self.average_softening + self.drift_curvature + self.quiver
        )

    @property
    def total(self) -> np.ndarray:
        return np.array([self.transverse, self.longitudinal])


def velocity_terms(x1: float, t: float, p3: float, laser: LaserConfig) -> VelocityTerms:
    """Evaluate each expansion term of the velocity at one phase point."""
    a = laser.amplitude
    kx = laser.wave_number * x1
    wt = laser.omega * t
    sx, cx = math.sin(kx), math.cos(kx)
    st, ct = math.sin(wt), math.cos(wt)
    return VelocityTerms(
        field_drift=a * p3 * sx * ct,
        field_drift_squared=a * a * p3 * p3 * sx * cx * st * ct,
        drift=p3,
        average_softening=-1.5 * a * a * p3 * cx * cx * st * st,
        drift_curvature=1.5 * a * p3 * p3 * cx * st,
        quiver=-a * cx * st,
    )


def exact_velocity(x1: float, t: float, p3: float, laser: LaserConfig) -> np.ndarray:
    """Velocity of the oscillating electron from its full momentum."""
    p = quiver_momentum(x1, t, p3, laser)
    return p / math.sqrt(1.0 + float(p @ p))


@dataclass(frozen=True)
class TrajectoryState:
    """Planar phase-space point plus the accumulated field work."""

    t: float
    x1: float
    x3: float
    p1: float
    p3: float
    work: float = 0.0

    @classmethod
    def at_rest(cls, x1: float, p3: float = 0.0) -> "TrajectoryState":
        """Start of a standard run: transversely at rest, drifting along e3."""
        return cls(t=0.0, x1=x1, x3=0.0, p1=0.0, p3=p3)

    @property
    def gamma(self) -> float:
        return math.sqrt(1.0 + self.p1 ** 2 + self.p3 ** 2)


@dataclass
class TrajectorySeries:
    """Sampled trajectory with one row per sample instant."""

    laser: LaserConfig
    times: np.ndarray
    x1: np.ndarray
    x3: np.ndarray
    p1: np.ndarray
    p3: np.ndarray
    work: np.ndarray

    @property
    def times_cycles(self) -> np.ndarray:
        return self.times / self.laser.cycle

    @property
    def gamma(self) -> np.ndarray:
        return np.sqrt(1.0 + self.p1 ** 2 + self.p3 ** 2)

    def state(self, k: int) -> TrajectoryState:
        return TrajectoryState(
            t=float(self.times[k]),
            x1=float(self.x1[k]),
            x3=float(self.x3[k]),
            p1=float(self.p1[k]),
            p3=float(self.p3[k]),
            work=float(self.work[k]),
        )

    @property
    def final(self) -> TrajectoryState:
        return self.state(len(self.times) - 1)


def integrate_trajectory(
    initial: TrajectoryState,
    laser: LaserConfig,
    *,
    steps_per_cycle: int = 256,
    sample_every_cycles: float = 1.0,
    t_final: float | None = None,
    force_gamma_one: bool = False,
    backend: str | None = None,
) -> TrajectorySeries:
    """Integrate the equations of motion with RK4 at fixed substeps.

    ``force_gamma_one`` freezes the kinematic factor at one, giving the
    nonrelativistic limit with otherwise identical fields.  The work
    integral of the electric force is accumulated alongside the state;
    for the relativistic equations it must reproduce the change of
    gamma, which the tests use as an energy bookkeeping check.
    """
    if steps_per_cycle < 16:
        raise ValueError(f"steps_per_cycle must be at least 16, got {steps_per_cycle}")
    if sample_every_cycles <= 0:
        raise ValueError("sample_every_cycles must be positive")
    kern = _backend.get_kernels(backend)

    t0 = float(initial.t)
    t1 = float(laser.total_time if t_final is None else t_final)
    span = t1 - t0

    state = np.array(
        [initial.x1, 0.0, initial.x3, initial.p1, 0.0, initial.p3, initial.work],
        dtype=np.float64,
    )
    times = [t0]
    rows = [state.copy()]

    if span != 0.0:
        h_max = laser.cycle / steps_per_cycle
        direction = 1.0 if span > 0 else -1.0
        sample_dt = direction * sample_every_cycles * laser.cycle
        n_full = int(math.floor(span / sample_dt + 1e-9))
        remainder = span - n_full * sample_dt
        if abs(remainder) < 1e-9 * abs(sample_dt):
            remainder = 0.0

        n_sub = max(1, math.ceil(abs(sample_dt) / h_max))
        h = sample_dt / n_sub
        for k in range(n_full):
            kern.traj_rk4(
                state, t0 + k * sample_dt, n_sub, h,
                laser.amplitude, laser.wave_number, laser.omega,
                laser.ramp_time, laser.total_time, force_gamma_one,
            )
            times.append(t0 + (k + 1) * sample_dt)
            rows.append(state.copy())
        if remainder != 0.0:
            n_rem = max(1, math.ceil(abs(remainder) / h_max))
            kern.traj_rk4(
                state, t0 + n_full * sample_dt, n_rem, remainder / n_rem,
                laser.amplitude, laser.wave_number, laser.omega,
                laser.ramp_time, laser.total_time, force_gamma_one,
            )
            times.append(t1)
            rows.append(state.copy())

    data = np.array(rows)
    return TrajectorySeries(
        laser=laser,
        times=np.array(times, dtype=np.float64),
        x1=data[:, 0],
        x3=data[:, 2],
        p1=data[:, 3],
        p3=data[:, 5],
        work=data[:, 6],
    )
