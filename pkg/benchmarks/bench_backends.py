"""Compare the compiled integrator kernels against the pure-Python ones.

Usage: python benchmarks/bench_backends.py [--cycles N] [--steps-per-cycle N]

Runs the same mode-ladder evolution and a classical trajectory on both
backends, reports wall times and the speedup, and cross-checks that the
final states agree to near machine precision.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from kdlab._backend import get_kernels
from kdlab.classical import TrajectoryState, integrate_trajectory
from kdlab.core import LaserConfig, ModeGrid
from kdlab.dynamics import AmplitudeState, IntegratorConfig, evolve


def time_call(fn, repeats: int) -> tuple[float, object]:
    best, result = np.inf, None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cycles", type=float, default=50.0)
    parser.add_argument("--steps-per-cycle", type=int, default=32)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    try:
        get_kernels("compiled")
    except ImportError:
        raise SystemExit("compiled extension not built; nothing to compare")

    laser = LaserConfig.from_cycles(0.01, 0.02, 5.0, args.cycles)
    grid = ModeGrid(n_min=-4, n_max=6, p3=0.0, wave_number=0.02)
    integrator = IntegratorConfig(steps_per_cycle=args.steps_per_cycle)

    def quantum(backend):
        return evolve(
            AmplitudeState.initial(grid),
            laser,
            integrator=integrator,
            sample_every_cycles=args.cycles,
            backend=backend,
        )

    def classical(backend):
        return integrate_trajectory(
            TrajectoryState.at_rest(0.25 * np.pi / 0.02, 0.1),
            laser,
            sample_every_cycles=args.cycles,
            backend=backend,
        )

    print(f"mode-ladder evolution: {args.cycles:g} cycles, "
          f"{args.steps_per_cycle} steps/cycle, {grid.size} modes")
    results = {}
    for backend in ("compiled", "python"):
        seconds, series = time_call(lambda: quantum(backend), args.repeats)
        results[backend] = (seconds, series)
        print(f"  {backend:>8}: {seconds:8.3f} s")
    gap = np.max(
        np.abs(results["compiled"][1].amplitudes - results["python"][1].amplitudes)
    )
    speedup = results["python"][0] / results["compiled"][0]
    print(f"  speedup {speedup:.1f}x, max state difference {gap:.1e}")

    print("classical trajectory: same pulse, 256 steps/cycle")
    results = {}
    for backend in ("compiled", "python"):
        seconds, series = time_call(lambda: classical(backend), args.repeats)
        results[backend] = (seconds, series)
        print(f"  {backend:>8}: {seconds:8.3f} s")
    gap = max(
        abs(results["compiled"][1].final.p1 - results["python"][1].final.p1),
        abs(results["compiled"][1].final.x1 - results["python"][1].final.x1),
    )
    speedup = results["python"][0] / results["compiled"][0]
    print(f"  speedup {speedup:.1f}x, max final difference {gap:.1e}")


if __name__ == "__main__":
    main()
