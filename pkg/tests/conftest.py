"""Shared fixtures and independent test oracles.

The oracles here deliberately avoid the code paths they check: LPs are
verified by vertex enumeration over active-constraint subsets, robust
counterparts by stacking all extreme coefficient scenarios into one LP, and
plans by enumerating every expansion year with a direct solve.
"""

import itertools
from pathlib import Path

import numpy as np
import pytest

from nwaplan.capex import CapexParams
from nwaplan.lp import LpBuilder, LpStatus, solve
from nwaplan.nwa import DrSpec, EeSpec, EsSpec, PvSpec
from nwaplan.plan import NwaSpecs, PlanningProblem, Tariff, solve_fixed_delta
from nwaplan.timegrid import Discount, TimeGrid

REPO = Path(__file__).resolve().parent.parent
DEMO_CONFIG = REPO / "demo" / "config.json"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def demo_cfg():
    from nwaplan.config import load_config

    return load_config(DEMO_CONFIG)


def build_lp(c, rows, lo, hi):
    """rows: list of (dense coefficients, sense, rhs). All-zero rows are kept
    (0 <= rhs can be infeasible) so the model matches the dense oracles."""
    b = LpBuilder()
    for j in range(len(c)):
        b.add_var(lo[j], hi[j], c[j])
    for dense, sense, rhs in rows:
        cols = np.nonzero(dense)[0]
        if len(cols) == 0:
            b.add_row([0], [0.0], sense, rhs)
        else:
            b.add_row(cols, np.asarray(dense)[cols], sense, rhs)
    return b.build()


def vertex_enum_min(c, G, h, lo, hi):
    """Minimum of c@x over {Gx <= h, lo <= x <= hi} by enumerating vertices
    (all n-subsets of active constraints). None when infeasible. Bounds must
    be finite so the region is a polytope."""
    n = len(c)
    A = np.vstack([G, np.eye(n), -np.eye(n)]) if len(G) else np.vstack([np.eye(n), -np.eye(n)])
    bb = np.concatenate([h, hi, -lo]) if len(G) else np.concatenate([hi, -lo])
    best = None
    for comb in itertools.combinations(range(len(bb)), n):
        M = A[list(comb)]
        if abs(np.linalg.det(M)) < 1e-9:
            continue
        x = np.linalg.solve(M, bb[list(comb)])
        if np.all(A @ x <= bb + 1e-7):
            v = float(c @ x)
            if best is None or v < best:
                best = v
    return best


def stacked_scenario_min(c, A, h, lo, hi, uncertain):
    """Worst-case-feasible minimum: one LP whose rows are every extreme
    coefficient scenario of the uncertain entries. uncertain: list of
    ((i, j), halfwidth)."""
    rows = []
    for signs in itertools.product([-1.0, 1.0], repeat=len(uncertain)):
        As = A.copy()
        for s, ((i, j), dev) in zip(signs, uncertain):
            As[i, j] += s * dev
        for i in range(A.shape[0]):
            rows.append((As[i], "<=", h[i]))
    return solve(build_lp(c, rows, lo, hi))


def brute_force_delta(p: PlanningProblem):
    """Enumerate every expansion year and solve the fixed-year LP directly;
    returns (best objective, best delta) with ties to the latest year."""
    best = None
    for delta in range(p.grid.n_years + 1):
        sol, asm = solve_fixed_delta(p, delta)
        if sol.status is not LpStatus.OPTIMAL:
            continue
        total = sol.objective_value + asm.constant_cost
        if best is None or total <= best[0] + 1e-9 * (1.0 + abs(best[0])):
            best = (total, delta)
    return best


def random_planning_problem(rng, max_years=3, max_periods=8, max_blocks=2):
    """Desk-scale random instance: growing load with a daily shape, random
    tariff and expansion economics, up to max_blocks technologies."""
    n_years = int(rng.integers(1, max_years + 1))
    n_periods = int(rng.integers(2, max_periods + 1))
    grid = TimeGrid(n_years, n_periods, 1.0)
    level = rng.uniform(40, 60)
    shape = 1.0 + 0.4 * np.sin(np.linspace(0, 2 * np.pi, n_periods, endpoint=False) - 1.5)
    growth = rng.uniform(0.0, 0.15)
    base = np.stack(
        [level * shape * (1 + growth) ** a * rng.uniform(0.97, 1.03, n_periods) for a in range(n_years)]
    )
    capex = CapexParams(
        rng.uniform(1e6, 1e8), rng.uniform(0.85, 1.2) * base.max(), Discount(rng.uniform(0.03, 0.12))
    )
    tariff = Tariff(rng.uniform(20, 120, n_periods), rng.uniform(0, 2e5))
    specs = {}
    for name in rng.permutation(["pv", "dr", "es", "ee"])[: int(rng.integers(0, max_blocks + 1))]:
        if name == "pv":
            prof = np.clip(np.sin(np.linspace(0, np.pi, n_periods)) * rng.uniform(0.3, 1.0), 0, 1)
            specs["pv"] = PvSpec(rng.uniform(5e5, 3e6), rng.uniform(2, 15), np.tile(prof, (n_years, 1)))
        elif name == "dr":
            specs["dr"] = DrSpec(rng.uniform(5e4, 5e5), rng.uniform(2, 12), rng.uniform(1.0, 1.3))
        elif name == "es":
            specs["es"] = EsSpec(rng.uniform(1e5, 4e5), rng.uniform(5, 40))
        else:
            specs["ee"] = EeSpec(
                [3.0, 4.0], [rng.uniform(1e5, 1e6), rng.uniform(1e6, 5e6)], 1.0, level * shape
            )
    return PlanningProblem.build(
        grid,
        capex,
        tariff,
        NwaSpecs(**specs),
        base,
        load_deviation=rng.uniform(0, 3),
        gamma=float(rng.choice([0.0, 0.5, 1.0])),
    )
