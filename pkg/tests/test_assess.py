import numpy as np
import pytest

from nwaplan.assess import ScenarioSets, dispatch_with_shedding, gamma_sweep, monte_carlo
from nwaplan.capex import CapexParams, present_cost
from nwaplan.nwa import DrSpec
from nwaplan.plan import NwaSpecs, Plan, PlanningProblem, Tariff, solve_sequential
from nwaplan.scenario import Kind, ScenarioSet
from nwaplan.timegrid import Discount, TimeGrid


def bare_plan(problem, delta, invest=None):
    return Plan(
        technique="fixed",
        gamma=problem.robust_gamma,
        delta=delta,
        objective=0.0,
        breakdown={
            "op_cost": 0.0,
            "invest_cost": 0.0,
            "demand_charge": 0.0,
            "capex_present_cost": present_cost(problem.capex, delta, problem.grid.n_years),
        },
        invest=invest or {},
        yearly_peaks=np.zeros(problem.grid.n_years),
        iterations=0,
        wall_time=0.0,
    )


def problem_without_blocks(base, limit=60.0):
    base = np.asarray(base, dtype=float)
    grid = TimeGrid(base.shape[0], base.shape[1], 1.0)
    return PlanningProblem.build(
        grid,
        CapexParams(1e8, limit, Discount(0.07)),
        Tariff(50.0, 1e5),
        NwaSpecs(),
        base,
    )


class TestDispatch:
    def test_no_excursion_no_shed(self):
        p = problem_without_blocks([[55.0, 58.0]])
        rec = dispatch_with_shedding(p, bare_plan(p, 1), {"load": np.array([[55.0, 58.0]])}, voll=1e4)
        assert rec.shed_energy_mwh == pytest.approx(0.0, abs=1e-9)

    def test_excursion_sheds_exactly_the_excess(self):
        p = problem_without_blocks([[55.0, 58.0]])
        rec = dispatch_with_shedding(p, bare_plan(p, 1), {"load": np.array([[59.0, 62.0]])}, voll=1e4)
        assert rec.shed_energy_mwh == pytest.approx(2.0, abs=1e-8)
        # demand charge still sees the full 62 MW peak
        disc = p.tariff.demand_coeff(p.grid, p.capex)
        assert rec.demand_charge == pytest.approx(float(disc[0] * 62.0), rel=1e-9)

    def test_post_expansion_years_unconstrained(self):
        p = problem_without_blocks([[55.0, 58.0]])
        rec = dispatch_with_shedding(p, bare_plan(p, 0), {"load": np.array([[70.0, 80.0]])}, voll=1e4)
        assert rec.shed_energy_mwh == pytest.approx(0.0, abs=1e-12)

    def test_nwa_absorbs_excursion_when_voll_high(self):
        grid = TimeGrid(1, 3, 1.0)
        p = PlanningProblem.build(
            grid,
            CapexParams(1e8, 60.0, Discount(0.07)),
            Tariff(50.0, 1e5),
            NwaSpecs(dr=DrSpec(2e5, 5.0, 1.1)),
            np.array([[50.0, 62.0, 45.0]]),
        )
        plan = bare_plan(p, 1, invest={"dr": {"labels": ["capacity_mw"], "values": [5.0]}})
        plan.breakdown["invest_cost"] = 5.0 * 2e5
        rec = dispatch_with_shedding(p, plan, {"load": np.array([[50.0, 62.0, 45.0]])}, voll=1e6)
        assert rec.shed_energy_mwh == pytest.approx(0.0, abs=1e-8)

    def test_zero_voll_still_reports_minimal_shed(self):
        p = problem_without_blocks([[55.0, 58.0]])
        rec = dispatch_with_shedding(p, bare_plan(p, 1), {"load": np.array([[59.0, 63.0]])}, voll=0.0)
        assert rec.shed_energy_mwh == pytest.approx(3.0, abs=1e-8)
        # zero voll: shed contributes nothing to the reported cost
        expect = rec.op_cost + rec.demand_charge + present_cost(p.capex, 1, p.grid.n_years)
        assert rec.total_cost == pytest.approx(expect, rel=1e-9)

    def test_total_cost_reconciles(self):
        p = problem_without_blocks([[55.0, 58.0]])
        plan = bare_plan(p, 1)
        rec = dispatch_with_shedding(p, plan, {"load": np.array([[59.0, 62.0]])}, voll=1e4)
        expect = (
            rec.op_cost
            + rec.demand_charge
            + 1e4 * rec.shed_energy_discounted_mwh
            + plan.breakdown["invest_cost"]
            + present_cost(p.capex, plan.delta, p.grid.n_years)
        )
        assert rec.total_cost == pytest.approx(expect, rel=1e-12)


def two_scenario_sets(grid, low, high):
    data = np.stack([np.full((grid.n_years, grid.n_periods), low),
                     np.full((grid.n_years, grid.n_periods), high)])
    return ScenarioSets(load=ScenarioSet(Kind.LOAD, data, grid))


class TestMonteCarlo:
    def test_single_scenario_identical_records(self):
        p = problem_without_blocks([[55.0, 58.0]])
        sets = ScenarioSets(load=ScenarioSet(Kind.LOAD, np.full((1, 1, 2), 59.0), p.grid))
        out = monte_carlo(p, bare_plan(p, 1), sets, 5, voll=1e4, seed=0)
        totals = {r.total_cost for r in out.records}
        assert len(out.records) == 5 and len(totals) == 1

    def test_deterministic_under_seed(self):
        p = problem_without_blocks([[55.0, 58.0]])
        sets = two_scenario_sets(p.grid, 55.0, 63.0)
        a = monte_carlo(p, bare_plan(p, 1), sets, 30, voll=1e4, seed=7)
        b = monte_carlo(p, bare_plan(p, 1), sets, 30, voll=1e4, seed=7)
        assert [r.total_cost for r in a.records] == [r.total_cost for r in b.records]

    def test_workers_do_not_change_results(self):
        p = problem_without_blocks([[55.0, 58.0]])
        sets = two_scenario_sets(p.grid, 55.0, 63.0)
        a = monte_carlo(p, bare_plan(p, 1), sets, 16, voll=1e4, seed=7, workers=1)
        b = monte_carlo(p, bare_plan(p, 1), sets, 16, voll=1e4, seed=7, workers=4)
        assert [r.total_cost for r in a.records] == [r.total_cost for r in b.records]

    def test_unprotected_plan_sheds_on_extreme_draws(self):
        p = problem_without_blocks([[59.0, 59.0]])  # nominal under the limit
        sets = two_scenario_sets(p.grid, 55.0, 63.0)
        out = monte_carlo(p, bare_plan(p, 1), sets, 40, voll=1e4, seed=3)
        assert out.aggregates["shed"]["prob_any_shed"] > 0

    def test_protected_plan_never_sheds_inside_envelope(self):
        grid = TimeGrid(1, 3, 1.0)
        data = np.stack([
            np.array([[50.0, 58.0, 45.0]]),
            np.array([[52.0, 63.0, 47.0]]),
        ])
        sets = ScenarioSets(load=ScenarioSet(Kind.LOAD, data, grid))
        nom, dev = (data.max(0) + data.min(0)) / 2, (data.max(0) - data.min(0)) / 2
        p = PlanningProblem.build(
            grid,
            CapexParams(1e8, 60.0, Discount(0.07)),
            Tariff(50.0, 1e5),
            NwaSpecs(dr=DrSpec(2e5, 6.0, 1.1)),
            nom,
            load_deviation=dev,
            gamma=1.0,
        )
        plan = solve_sequential(p)
        out = monte_carlo(p, plan, sets, 60, voll=1e4, seed=1)
        assert out.aggregates["shed"]["max_energy_mwh"] <= 1e-9

    def test_shed_fraction_bounds(self):
        p = problem_without_blocks([[59.0, 59.0]])
        sets = two_scenario_sets(p.grid, 55.0, 63.0)
        out = monte_carlo(p, bare_plan(p, 1), sets, 40, voll=1e4, seed=3)
        for r in out.records:
            assert 0.0 <= r.shed_fraction_pct <= 100.0


class TestGammaSweep:
    def make_problem(self):
        grid = TimeGrid(1, 3, 1.0)
        data = np.stack([
            np.array([[50.0, 57.0, 45.0]]),
            np.array([[52.0, 63.0, 47.0]]),
        ])
        sets = ScenarioSets(load=ScenarioSet(Kind.LOAD, data, grid))
        nom, dev = (data.max(0) + data.min(0)) / 2, (data.max(0) - data.min(0)) / 2
        p = PlanningProblem.build(
            grid,
            CapexParams(1e8, 60.0, Discount(0.07)),
            Tariff(50.0, 1e5),
            NwaSpecs(dr=DrSpec(2e5, 6.0, 1.1)),
            nom,
            load_deviation=dev,
        )
        return p, sets

    def test_single_gamma_is_star(self):
        p, sets = self.make_problem()
        res = gamma_sweep(p, [0.5], sets, 10, voll=1e4, seed=0)
        assert res.gamma_star == 0.5

    def test_zero_voll_prefers_cheapest_plan(self):
        p, sets = self.make_problem()
        res = gamma_sweep(p, [0.0, 1.0], sets, 30, voll=0.0, seed=0)
        assert res.gamma_star == 0.0

    def test_huge_voll_prefers_protection(self):
        p, sets = self.make_problem()
        res = gamma_sweep(p, [0.0, 1.0], sets, 30, voll=1e6, seed=0)
        assert res.gamma_star == 1.0

    def test_revaluing_at_other_volls_is_consistent(self):
        p, sets = self.make_problem()
        res = gamma_sweep(p, [0.0, 1.0], sets, 30, voll=1e4, seed=0)
        direct = gamma_sweep(p, [0.0, 1.0], sets, 30, voll=1e6, seed=0)
        reval = res.expected_total_at_voll(1e6)
        for a, b in zip(reval, [pt.expected_total_cost for pt in direct.points]):
            assert a == pytest.approx(b, rel=1e-9)
        assert res.gamma_star_at_voll(1e6) == direct.gamma_star

    def test_empty_gamma_list_rejected(self):
        p, sets = self.make_problem()
        with pytest.raises(ValueError):
            gamma_sweep(p, [], sets, 5, voll=1e4, seed=0)
