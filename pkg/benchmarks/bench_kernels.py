#!/usr/bin/env python3
"""Benchmark the compiled step kernel against the pure-Python fallback.

Runs the bundled 5-agent mission with each available backend, reports
steps/second and the speedup, and verifies that both backends produced
bit-identical state trajectories and event logs (they execute the same
sequence of double-precision operations by construction).

Usage: python benchmarks/bench_kernels.py [--repeats N] [--dt S]
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from etcoord import _kernels, engine, scenario_io  # noqa: E402

SCENARIO = Path(__file__).resolve().parent.parent / "src" / "etcoord" / "scenarios" / "coordinated_arrival_5uav.json"


def bench(scenario, kernel, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = engine.run(scenario, kernel=kernel)
        best = min(best, time.perf_counter() - t0)
    return result, best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--dt", type=float, default=None)
    args = ap.parse_args()

    overrides = [f"sim.dt={args.dt!r}"] if args.dt else []
    scenario, diags = scenario_io.load_scenario(SCENARIO, overrides)
    if scenario is None:
        for d in diags:
            print(d, file=sys.stderr)
        return 1

    res_pure, t_pure = bench(scenario, "pure", args.repeats)
    steps = len(res_pure.t)
    print(f"scenario: {scenario.name} ({scenario.n} agents, dt={scenario.dt}, {steps} rows)")
    print(f"pure python : {t_pure * 1e3:8.1f} ms   {steps / t_pure:10.0f} steps/s")

    if not _kernels.HAVE_FAST:
        print("compiled    :  not built (python setup.py build_ext --inplace)")
        return 0

    res_fast, t_fast = bench(scenario, "fast", args.repeats)
    print(f"compiled    : {t_fast * 1e3:8.1f} ms   {steps / t_fast:10.0f} steps/s")
    print(f"speedup     : {t_pure / t_fast:8.1f}x")

    identical = (
        all(
            np.array_equal(getattr(res_fast, name), getattr(res_pure, name))
            for name in ("gamma", "gamma_dot", "alpha", "accel", "pos", "e_pf_norm", "xi_norm", "max_gap")
        )
        and np.array_equal(res_fast.arrival_time, res_pure.arrival_time, equal_nan=True)
        and res_fast.events == res_pure.events
    )
    print(f"bit-identical outputs: {identical}")
    return 0 if identical else 1


if __name__ == "__main__":
    sys.exit(main())
