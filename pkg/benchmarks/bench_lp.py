"""Benchmark the simplex inner-loop backends (compiled vs pure numpy).

Times full solves of random sparse LPs and of the bundled demo planning LP
with each backend. Run from the repo root:

    python3 benchmarks/bench_lp.py
"""

import time
from pathlib import Path

import numpy as np

from nwaplan.lp import LpBuilder, solve
from nwaplan.lp import _pykernels

try:
    from nwaplan.lp import _ckernels
except ImportError:
    _ckernels = None

REPO = Path(__file__).resolve().parent.parent


def random_lp(rng, m, n):
    b = LpBuilder()
    for _ in range(n):
        b.add_var(0.0, float(rng.uniform(5, 20)), float(rng.normal(0, 5)))
    for _ in range(m):
        k = int(rng.integers(2, 8))
        cols = rng.choice(n, k, replace=False)
        b.add_row(cols, rng.uniform(0.2, 3.0, k), "<=", float(rng.uniform(5, 40)))
    return b.build()


def demo_planning_lp():
    from nwaplan.config import load_config
    from nwaplan.plan import assemble_fixed_delta

    cfg = load_config(REPO / "demo" / "config.json")
    return assemble_fixed_delta(cfg.problem, cfg.problem.grid.n_years).lp


def time_solve(lp, kernels, repeats=3):
    best = np.inf
    sol = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        sol = solve(lp, kernels=kernels)
        best = min(best, time.perf_counter() - t0)
    return best, sol


def main():
    rng = np.random.default_rng(7)
    cases = [("random 150x200", random_lp(rng, 150, 200)),
             ("random 400x500", random_lp(rng, 400, 500)),
             ("random 800x900", random_lp(rng, 800, 900)),
             ("demo planning LP", demo_planning_lp())]
    backends = [("pure numpy", _pykernels)]
    if _ckernels is not None:
        backends.append(("compiled", _ckernels))
    else:
        print("compiled kernels not built; benchmarking the pure backend only\n")

    header = f"{'case':<20} {'size':<12}" + "".join(f"{name:>14}" for name, _ in backends) + f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, lp in cases:
        times = []
        objs = []
        for _, kern in backends:
            t, sol = time_solve(lp, kern)
            times.append(t)
            objs.append(sol.objective_value)
        assert all(abs(o - objs[0]) <= 1e-6 * (1 + abs(objs[0])) for o in objs), "backends disagree"
        speed = f"{times[0] / times[-1]:.2f}x" if len(times) > 1 else "-"
        size = f"{lp.n_rows}x{lp.n_vars}"
        row = f"{label:<20} {size:<12}" + "".join(f"{t*1e3:>12.1f}ms" for t in times) + f"{speed:>10}"
        print(row)


if __name__ == "__main__":
    main()
