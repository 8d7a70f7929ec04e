"""Timing comparison of the compiled kernel extension vs the pure-Python
fallback, plus an end-to-end simulation timing under each backend.

Run from the repo root:

    python benchmarks/bench_kernels.py

The kernel backend is chosen at import time, so the end-to-end comparison
re-executes this script in a subprocess with MLVSIM_PURE_PYTHON=1.
"""

import os
import subprocess
import sys
import time
import timeit


def bench_kernels(mod, n=200_000):
    """Per-call timings (ns) for each kernel function of one backend."""
    rows = []
    cases = [
        ("geometric_attr", lambda: mod.geometric_attr(0.7, 1.0, 0.37)),
        ("percent_step_attr",
         lambda: mod.percent_step_attr(0.7, 1.0, 4, 37, 0.02, 0.001)),
        ("reward_value",
         lambda: mod.reward_value(0.8, 0.1, 0.9, 0.5, 0.025, 1.0, 2.0)),
        ("q_step", lambda: mod.q_step(0.5, 0.01, 1.0, 0.99, 0.4)),
        ("exp_interval", lambda: mod.exp_interval(0.375, 350.0)),
    ]
    for name, fn in cases:
        best = min(timeit.repeat(fn, number=n, repeat=3)) / n
        rows.append((name, best * 1e9))
    return rows


def bench_simulation(events=100_000):
    from mlvsim import engine, scenario
    scn = scenario.paper_preset(events=events)
    t0 = time.perf_counter()
    result = engine.run_simulation(scn, "rl", seed=1)
    dt = time.perf_counter() - t0
    return dt, result.events_processed


def main():
    from mlvsim import kernels
    print(f"backend: {kernels.BACKEND}")
    print(f"{'kernel':<20}{'ns/call':>10}")
    for name, ns in bench_kernels(kernels):
        print(f"{name:<20}{ns:>10.1f}")
    dt, events = bench_simulation()
    print(f"simulation: {events} events in {dt:.2f}s "
          f"({events / dt / 1e3:.0f}k events/s)")

    if not os.environ.get("MLVSIM_PURE_PYTHON"):
        print()
        sys.stdout.flush()  # keep output ordered ahead of the subprocess
        env = dict(os.environ, MLVSIM_PURE_PYTHON="1")
        subprocess.run([sys.executable, os.path.abspath(__file__)],
                       env=env, check=True)


if __name__ == "__main__":
    main()
