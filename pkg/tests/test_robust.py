import numpy as np
import pytest

from conftest import build_lp, stacked_scenario_min
from nwaplan.lp import LpBuilder, LpModelError, LpStatus, solve
from nwaplan.robust import (
    UncertainLp,
    augment_rhs_uncertainty,
    robust_counterpart,
    scale_protection,
)


def one_var_ulp():
    """min -x s.t. a*x <= 3, a in 1 +- 0.5, x >= 0."""
    b = LpBuilder()
    b.add_var(0.0, np.inf, -1.0)
    b.add_row([0], [1.0], "<=", 3.0)
    return UncertainLp(b.build(), [(np.array([0]), np.array([0.5]))], np.array([1.0]))


def random_ulp(rng, max_vars=5, max_rows=4, max_uncertain=8):
    n = int(rng.integers(1, max_vars + 1))
    m = int(rng.integers(1, max_rows + 1))
    c = rng.integers(-5, 6, n).astype(float)
    A = rng.integers(-3, 4, (m, n)).astype(float)
    h = rng.integers(2, 12, m).astype(float)
    lo = np.zeros(n)
    hi = rng.integers(1, 8, n).astype(float)
    nz = [(i, j) for i in range(m) for j in range(n) if A[i, j] != 0]
    rng.shuffle(nz)
    uncertain = [((i, j), float(rng.uniform(0.1, 1.0))) for i, j in nz[: int(rng.integers(1, max_uncertain + 1))]]
    lp = build_lp(c, [(A[i], "<=", h[i]) for i in range(m)], lo, hi)
    devs = []
    budgets = np.zeros(m)
    for i in range(m):
        cols = np.array(sorted(j for (ii, j), _ in uncertain if ii == i), dtype=np.int64)
        vals = np.array([next(d for (ii, jj), d in uncertain if ii == i and jj == j) for j in cols])
        devs.append((cols, vals))
        budgets[i] = len(cols)
    return UncertainLp(lp, devs, budgets), (c, A, h, lo, hi, uncertain)


class TestCounterpart:
    def test_one_var_worst_case_analytic(self):
        sol = solve(robust_counterpart(one_var_ulp()))
        assert sol.status is LpStatus.OPTIMAL
        assert sol.primal[0] == pytest.approx(2.0, abs=1e-8)  # worst a = 1.5
        assert sol.objective_value == pytest.approx(-2.0, abs=1e-8)

    def test_zero_budget_equals_nominal(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            ulp, _ = random_ulp(rng)
            ulp.row_budgets[:] = 0.0
            nominal = solve(ulp.base)
            robust = solve(robust_counterpart(ulp))
            assert robust.status == nominal.status
            if nominal.status is LpStatus.OPTIMAL:
                assert robust.objective_value == pytest.approx(nominal.objective_value, abs=1e-7)

    def test_full_budget_matches_scenario_enumeration(self):
        rng = np.random.default_rng(1)
        for _ in range(40):
            ulp, (c, A, h, lo, hi, uncertain) = random_ulp(rng)
            robust = solve(robust_counterpart(ulp))
            oracle = stacked_scenario_min(c, A, h, lo, hi, uncertain)
            assert robust.status == oracle.status
            if oracle.status is LpStatus.OPTIMAL:
                assert robust.objective_value == pytest.approx(
                    oracle.objective_value, rel=1e-6, abs=1e-6
                )

    def test_counterpart_size_is_structural(self):
        rng = np.random.default_rng(2)
        ulp, _ = random_ulp(rng)
        n, m = ulp.base.n_vars, ulp.base.n_rows
        nnz = sum(len(cols) for cols, _ in ulp.deviations)
        rc = robust_counterpart(ulp)
        assert rc.n_vars == n + m + nnz + n

    def test_equality_rows_cannot_carry_uncertainty(self):
        b = LpBuilder()
        b.add_var(0.0, 5.0, 1.0)
        b.add_row([0], [1.0], "=", 2.0)
        ulp = UncertainLp(b.build(), [(np.array([0]), np.array([0.1]))], np.array([1.0]))
        with pytest.raises(LpModelError):
            robust_counterpart(ulp)

    def test_monotone_in_protection_level(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            ulp, _ = random_ulp(rng)
            vals = []
            for gamma in [0.0, 0.25, 0.5, 0.75, 1.0]:
                sol = solve(robust_counterpart(scale_protection(ulp, gamma)))
                if sol.status is not LpStatus.OPTIMAL:
                    vals.append(np.inf)
                else:
                    vals.append(sol.objective_value)
            for a, b in zip(vals, vals[1:]):
                assert b >= a - 1e-7 * (1 + abs(a))


class TestRhsUncertainty:
    def test_certain_rhs_roundtrip(self):
        b = LpBuilder()
        b.add_vars(2, 0.0, 4.0, -1.0)
        b.add_row([0, 1], [1.0, 1.0], "<=", 5.0)
        ulp = UncertainLp.certain(b.build())
        aug = augment_rhs_uncertainty(ulp)
        assert aug.base.n_vars == 3
        assert all(row.rhs == 0.0 for row in aug.base.rows)
        s0 = solve(ulp.base)
        s1 = solve(aug.base)
        assert s1.objective_value == pytest.approx(s0.objective_value, abs=1e-9)

    def test_rhs_interval_worst_case(self):
        # x <= b with b in 10 +- 2 protects to x <= 8
        b = LpBuilder()
        b.add_var(0.0, np.inf, -1.0)
        b.add_row([0], [1.0], "<=", 10.0)
        ulp = UncertainLp(
            b.build(), [(np.zeros(0, dtype=np.int64), np.zeros(0))], np.zeros(1),
            rhs_deviations=np.array([2.0]),
        )
        sol = solve(robust_counterpart(augment_rhs_uncertainty(ulp)))
        assert sol.primal[0] == pytest.approx(8.0, abs=1e-8)

    def test_no_rows_unchanged(self):
        b = LpBuilder()
        b.add_var(0.0, 1.0, 1.0)
        ulp = UncertainLp.certain(b.build())
        aug = augment_rhs_uncertainty(ulp)
        assert aug.base.n_rows == 0
        assert aug.base.n_vars == 2


class TestScaleProtection:
    def test_zero_gamma_removes_deviations(self):
        ulp = scale_protection(one_var_ulp(), 0.0)
        assert all(len(cols) == 0 for cols, _ in ulp.deviations)
        assert np.all(ulp.row_budgets == 0)
        sol = solve(robust_counterpart(ulp))
        assert sol.primal[0] == pytest.approx(3.0, abs=1e-8)  # nominal a = 1

    def test_half_gamma_halves_interval(self):
        ulp = scale_protection(one_var_ulp(), 0.5)
        cols, vals = ulp.deviations[0]
        assert vals[0] == pytest.approx(0.25)
        assert ulp.row_budgets[0] == 1.0
        sol = solve(robust_counterpart(ulp))
        assert sol.primal[0] == pytest.approx(3.0 / 1.25, abs=1e-8)

    def test_full_gamma_keeps_interval(self):
        ulp = scale_protection(one_var_ulp(), 1.0)
        _, vals = ulp.deviations[0]
        assert vals[0] == pytest.approx(0.5)

    def test_gamma_range_checked(self):
        with pytest.raises(ValueError):
            scale_protection(one_var_ulp(), 1.5)
        with pytest.raises(ValueError):
            scale_protection(one_var_ulp(), -0.1)


def test_deviation_validation():
    b = LpBuilder()
    b.add_var(0.0, 1.0, 1.0)
    b.add_row([0], [1.0], "<=", 1.0)
    lp = b.build()
    with pytest.raises(LpModelError):  # negative deviation
        UncertainLp(lp, [(np.array([0]), np.array([-0.1]))], np.array([0.0]))
    with pytest.raises(LpModelError):  # deviation on a missing coefficient
        UncertainLp(lp, [(np.array([0, 1]), np.array([0.1, 0.1]))], np.array([0.0]))
    with pytest.raises(LpModelError):  # budget above |J_i|
        UncertainLp(lp, [(np.array([0]), np.array([0.1]))], np.array([2.0]))
