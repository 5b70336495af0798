"""Monte Carlo assessment of a fixed plan.

Each draw realizes a (load, PV profile, efficiency accuracy) scenario,
re-dispatches the installed technologies with perfect foresight over the
horizon, and measures cost and unserved energy. Load shedding is the slack
of the pre-expansion capacity rows only: it is the minimal relaxation needed
to respect the limit, priced at the value of lost load; energy cost and the
demand charge are computed on the full (unshed) load so a zero VOLL cannot
game the demand charge away.

Perfect-foresight dispatch is the standard planning-study surrogate: it
bounds real-time operation from the optimistic side, since actual control
would act on short-term forecasts.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from nwaplan.capex import present_cost
from nwaplan.lp import LE, LpBuilder, LpStatus, solve
from nwaplan.nwa import compile_dr, compile_es, grid_array
from nwaplan.plan import Plan, PlanningProblem
from nwaplan.scenario import ScenarioSet, sample_indices

SHED_TIEBREAK = 1e-3  # $/MWh; keeps shed minimal and unique when voll = 0


@dataclass(frozen=True)
class ScenarioSets:
    """Scenario pools for assessment; PV/accuracy default to the nominal data."""

    load: ScenarioSet
    pv: ScenarioSet | None = None
    ee_accuracy: ScenarioSet | None = None


@dataclass
class DispatchRecord:
    draw: int
    op_cost: float
    demand_charge: float
    shed_energy_mwh: float
    shed_energy_discounted_mwh: float
    shed_fraction_pct: float
    total_cost: float


@dataclass
class Assessment:
    n_draws: int
    voll: float
    seed: int
    records: list[DispatchRecord]
    aggregates: dict = field(default_factory=dict)

    def finalize(self):
        totals = np.array([r.total_cost for r in self.records])
        fracs = np.array([r.shed_fraction_pct for r in self.records])
        sheds = np.array([r.shed_energy_mwh for r in self.records])
        qs = [5, 25, 50, 75, 95]
        self.aggregates = {
            "total_cost": {
                "mean": float(totals.mean()),
                "stddev": float(totals.std(ddof=0)),
                "quantiles": {f"p{q}": float(np.percentile(totals, q)) for q in qs},
            },
            "shed": {
                "mean_fraction_pct": float(fracs.mean()),
                "mean_energy_mwh": float(sheds.mean()),
                "max_energy_mwh": float(sheds.max()),
                "prob_any_shed": float(np.mean(sheds > 1e-9)),
                "fraction_quantiles": {f"p{q}": float(np.percentile(fracs, q)) for q in qs},
            },
        }
        return self

    @property
    def expected_total_cost(self) -> float:
        return self.aggregates["total_cost"]["mean"]

    def to_json_dict(self) -> dict:
        return {
            "n_draws": self.n_draws,
            "voll_per_mwh": self.voll,
            "seed": self.seed,
            "aggregates": self.aggregates,
            "records": [
                {
                    "draw": r.draw,
                    "op_cost": r.op_cost,
                    "demand_charge": r.demand_charge,
                    "shed_energy_mwh": r.shed_energy_mwh,
                    "shed_fraction_pct": r.shed_fraction_pct,
                    "total_cost": r.total_cost,
                }
                for r in self.records
            ],
        }


def dispatch_with_shedding(
    p: PlanningProblem,
    plan: Plan,
    realization: dict,
    voll: float,
    draw: int = 0,
) -> DispatchRecord:
    """Re-dispatch the plan's installed capacities against one realization.

    realization maps 'load' (required), 'pv' and 'ee_accuracy' (optional) to
    (n_years, n_periods) matrices. Investments are frozen at the plan's
    values; operation is re-optimized; the capacity limit binds in years
    up to the expansion year, relaxed by nonnegative shed variables.
    """
    grid = p.grid
    load = grid_array(grid, realization["load"])
    specs = _realized_specs(p, realization)
    k = p.tariff.energy_cost_per_cell(grid, p.capex)
    compilers = {"dr": compile_dr, "es": compile_es}

    # With investment frozen, EE and PV operation is fully determined by the
    # realization: fold their load contributions in as constants and only
    # dispatch the technologies with real degrees of freedom.
    fixed_op_cost = 0.0
    blocks = []
    for name, spec in specs:
        phi = plan.invest_vector(name) if name in plan.invest else None
        if phi is None:
            continue
        if name == "pv":
            contrib = -grid_array(grid, spec.profile) * phi[0]
        elif name == "ee":
            base = np.tile(spec.base_year_load, grid.n_years)
            contrib = -grid_array(grid, spec.accuracy) * base * phi.sum() / 100.0
        else:
            blocks.append((compilers[name](spec, grid).priced(k), phi))
            continue
        load = load + contrib
        fixed_op_cost += float(k @ contrib)

    b = LpBuilder()
    offsets = []
    for blk, phi in blocks:
        off = b.n_vars
        offsets.append(off)
        for j in range(blk.n_invest):
            b.add_var(phi[j], phi[j], 0.0)  # investment frozen; cost reported from the plan
        for j in range(blk.n_op):
            b.add_var(blk.op_lower[j], blk.op_upper[j], blk.op_cost[j])
        for row in blk.rows:
            b.add_row(row.cols + off, row.vals, row.sense, row.rhs)

    peak_off = b.n_vars
    dcoef = p.tariff.demand_coeff(grid, p.capex)
    for a in range(grid.n_years):
        b.add_var(0.0, np.inf, dcoef[a])
    disc = p.tariff.year_discounts(grid, p.capex)
    shed_penalty = max(voll, SHED_TIEBREAK)
    shed_vars = {}
    for cell in range(grid.n_cells):
        year = grid.year_of_cell(cell)
        if year <= plan.delta:
            shed_vars[cell] = b.add_var(0.0, np.inf, disc[year - 1] * shed_penalty * grid.dt_hours)

    maps = [blk.load_map.tocsr() for blk, _ in blocks]
    for cell in range(grid.n_cells):
        year = grid.year_of_cell(cell)
        cols, vals = [peak_off + year - 1], [-1.0]
        for (blk, _), off, lm in zip(blocks, offsets, maps):
            r0, r1 = lm.indptr[cell], lm.indptr[cell + 1]
            cols.extend(off + blk.n_invest + lm.indices[r0:r1])
            vals.extend(lm.data[r0:r1])
        b.add_row(cols, vals, LE, -load[cell])  # demand charge sees the full load
        if cell in shed_vars:
            ccols = cols[1:] + [shed_vars[cell]]
            cvals = vals[1:] + [-1.0]
            b.add_row(ccols, cvals, LE, p.capex.limit - load[cell])

    sol = solve(b.build())
    if sol.status is not LpStatus.OPTIMAL:
        raise RuntimeError(f"dispatch LP not optimal: {sol.status}")

    op_cost = fixed_op_cost
    net = load.copy()
    for (blk, _), off in zip(blocks, offsets):
        xop = sol.primal[off + blk.n_invest : off + blk.n_invest + blk.n_op]
        op_cost += float(blk.op_cost @ xop)
        net += blk.load_profile(xop)
    lp_peaks = sol.primal[peak_off : peak_off + grid.n_years]
    demand = float(dcoef @ lp_peaks)
    shed = np.zeros(grid.n_cells)
    for cell, var in shed_vars.items():
        shed[cell] = sol.primal[var]
    shed_energy = float(shed.sum() * grid.dt_hours)
    disc_cells = np.repeat(disc, grid.n_periods)
    shed_disc = float((disc_cells * shed).sum() * grid.dt_hours)
    served = np.maximum(net - shed, 0.0).sum() * grid.dt_hours
    frac = 100.0 * shed_energy / (served + shed_energy) if shed_energy > 0 else 0.0

    invest_cost = plan.breakdown["invest_cost"]
    capex_cost = present_cost(p.capex, plan.delta, grid.n_years)
    total = op_cost + demand + voll * shed_disc + invest_cost + capex_cost
    return DispatchRecord(
        draw=draw,
        op_cost=op_cost,
        demand_charge=demand,
        shed_energy_mwh=shed_energy,
        shed_energy_discounted_mwh=shed_disc,
        shed_fraction_pct=frac,
        total_cost=total,
    )


def _realized_specs(p: PlanningProblem, realization: dict):
    """Nominal specs with PV profile / EE accuracy swapped for the realization."""
    out = []
    for name, spec in p.specs.items():
        if name == "pv" and realization.get("pv") is not None:
            spec = replace(spec, profile=np.asarray(realization["pv"], dtype=float))
        if name == "ee" and realization.get("ee_accuracy") is not None:
            spec = replace(spec, accuracy=np.asarray(realization["ee_accuracy"], dtype=float))
        out.append((name, spec))
    return out


def monte_carlo(
    p: PlanningProblem,
    plan: Plan,
    sets: ScenarioSets,
    n: int,
    voll: float,
    seed: int,
    workers: int = 1,
) -> Assessment:
    """n independent dispatches against resampled scenarios, deterministic
    under seed (draw order: load, then PV, then accuracy indices). Dispatches
    are independent; workers > 1 runs them on a thread pool, with records
    keyed by draw index so aggregation is order-independent."""
    if n < 1:
        raise ValueError("need at least one draw")
    rng = np.random.default_rng(seed)
    load_idx = sample_indices(sets.load, n, rng)
    pv_idx = sample_indices(sets.pv, n, rng) if sets.pv is not None else None
    ee_idx = sample_indices(sets.ee_accuracy, n, rng) if sets.ee_accuracy is not None else None

    def realization(i):
        out = {"load": sets.load.data[load_idx[i]]}
        if pv_idx is not None:
            out["pv"] = sets.pv.data[pv_idx[i]]
        if ee_idx is not None:
            out["ee_accuracy"] = sets.ee_accuracy.data[ee_idx[i]]
        return out

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(
                pool.map(lambda i: dispatch_with_shedding(p, plan, realization(i), voll, draw=i), range(n))
            )
    else:
        records = [dispatch_with_shedding(p, plan, realization(i), voll, draw=i) for i in range(n)]
    return Assessment(n_draws=n, voll=voll, seed=seed, records=records).finalize()


@dataclass
class SweepPoint:
    gamma: float
    plan: Plan
    assessment: Assessment

    @property
    def expected_total_cost(self) -> float:
        return self.assessment.expected_total_cost


@dataclass
class SweepResult:
    points: list[SweepPoint]
    gamma_star: float

    def expected_total_at_voll(self, voll: float) -> list[float]:
        """Re-price the sweep at another VOLL from the stored records (the
        only VOLL-dependent term is the discounted shed energy)."""
        out = []
        for pt in self.points:
            base = np.array(
                [
                    r.total_cost - pt.assessment.voll * r.shed_energy_discounted_mwh
                    for r in pt.assessment.records
                ]
            )
            shed = np.array([r.shed_energy_discounted_mwh for r in pt.assessment.records])
            out.append(float((base + voll * shed).mean()))
        return out

    def gamma_star_at_voll(self, voll: float) -> float:
        costs = self.expected_total_at_voll(voll)
        return self.points[int(np.argmin(costs))].gamma


def gamma_sweep(
    p: PlanningProblem,
    gammas,
    sets: ScenarioSets,
    n: int,
    voll: float,
    seed: int,
    solver=None,
    workers: int = 1,
) -> SweepResult:
    """Solve the planning problem per protection level, assess each plan, and
    return the level minimizing expected total cost (plus the full curve)."""
    from nwaplan.plan import solve_sequential

    gammas = list(gammas)
    if not gammas:
        raise ValueError("need at least one protection level")
    solver = solver or solve_sequential
    points = []
    for g in gammas:
        pg = p.with_gamma(float(g))
        plan = solver(pg)
        assessment = monte_carlo(pg, plan, sets, n, voll, seed, workers=workers)
        points.append(SweepPoint(gamma=float(g), plan=plan, assessment=assessment))
    best = int(np.argmin([pt.expected_total_cost for pt in points]))
    return SweepResult(points=points, gamma_star=points[best].gamma)
