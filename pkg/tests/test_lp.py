import io

import numpy as np
import pytest

from conftest import build_lp, vertex_enum_min
from nwaplan.lp import (
    LpBuilder,
    LpModelError,
    LpStatus,
    SparseLp,
    check_certificates,
    dump_lp,
    solve,
)


def test_bound_attained_without_rows():
    b = LpBuilder()
    b.add_var(0.0, 2.0, -1.0)
    s = solve(b.build())
    assert s.status is LpStatus.OPTIMAL
    assert s.primal[0] == pytest.approx(2.0)
    assert s.objective_value == pytest.approx(-2.0)


def test_simplex_on_two_var_simplex():
    b = LpBuilder()
    b.add_vars(2, 0.0, np.inf, -1.0)
    b.add_row([0, 1], [1.0, 1.0], "<=", 1.0)
    lp = b.build()
    s = solve(lp)
    assert s.status is LpStatus.OPTIMAL
    assert s.objective_value == pytest.approx(-1.0)
    assert abs(s.duals[0]) == pytest.approx(1.0)
    assert s.duals[0] <= 0  # "<=" duals nonpositive under minimization
    assert check_certificates(lp, s)


def test_infeasible_detected():
    b = LpBuilder()
    b.add_var(0.0, np.inf, 0.0)
    b.add_row([0], [1.0], "<=", -1.0)
    assert solve(b.build()).status is LpStatus.INFEASIBLE


def test_unbounded_detected():
    b = LpBuilder()
    b.add_var(0.0, np.inf, -1.0)
    assert solve(b.build()).status is LpStatus.UNBOUNDED


def test_free_variable_and_equality():
    b = LpBuilder()
    b.add_var(-np.inf, np.inf, 1.0)
    b.add_var(0.0, 3.0, 1.0)
    b.add_row([0, 1], [1.0, 2.0], "=", 4.0)
    lp = b.build()
    s = solve(lp)
    assert s.status is LpStatus.OPTIMAL
    # x = 4 - 2y free, objective 4 - y minimized at y = 3, x = -2
    assert s.objective_value == pytest.approx(1.0)
    assert check_certificates(lp, s)


def test_matches_vertex_enumeration_randomized():
    rng = np.random.default_rng(42)
    for _ in range(300):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(1, 7))
        c = rng.integers(-5, 6, n).astype(float)
        G = rng.integers(-4, 5, (m, n)).astype(float)
        h = rng.integers(-3, 10, m).astype(float)
        lo = rng.integers(-4, 1, n).astype(float)
        hi = lo + rng.integers(1, 8, n)
        expect = vertex_enum_min(c, G, h, lo, hi)
        lp = build_lp(c, [(G[i], "<=", h[i]) for i in range(m)], lo, hi)
        s = solve(lp)
        if expect is None:
            assert s.status is LpStatus.INFEASIBLE
        else:
            assert s.status is LpStatus.OPTIMAL
            assert s.objective_value == pytest.approx(expect, abs=1e-6, rel=1e-6)
            assert check_certificates(lp, s)


def test_complementary_slackness_at_optimum():
    rng = np.random.default_rng(3)
    for _ in range(40):
        n, m = 5, 5
        c = rng.normal(0, 3, n)
        G = rng.normal(0, 2, (m, n))
        h = rng.uniform(1, 6, m)
        lo, hi = np.zeros(n), np.full(n, 10.0)
        lp = build_lp(c, [(G[i], "<=", h[i]) for i in range(m)], lo, hi)
        s = solve(lp)
        if s.status is not LpStatus.OPTIMAL:
            continue
        act = lp.matrix() @ s.primal
        for i, row in enumerate(lp.rows):
            slack = row.rhs - act[i]
            assert abs(s.duals[i] * slack) <= 1e-6 * (1 + abs(row.rhs)) * (1 + abs(s.duals[i]))


def test_resolve_is_deterministic():
    rng = np.random.default_rng(11)
    b = LpBuilder()
    for _ in range(15):
        b.add_var(0.0, 10.0, float(rng.normal()))
    for _ in range(12):
        b.add_row(range(15), rng.normal(0, 1, 15), "<=", 5.0)
    lp = b.build()
    s1, s2 = solve(lp), solve(lp)
    assert np.array_equal(s1.primal, s2.primal)
    assert np.array_equal(s1.duals, s2.duals)
    assert s1.iterations == s2.iterations


def test_certificates_reject_perturbed_primal():
    b = LpBuilder()
    b.add_vars(2, 0.0, np.inf, -1.0)
    b.add_row([0, 1], [1.0, 1.0], "<=", 1.0)
    lp = b.build()
    s = solve(lp)
    s.primal = s.primal + np.array([1.0, 0.0])  # violates the tight row
    assert not check_certificates(lp, s)


def test_certificates_zero_row_lp():
    b = LpBuilder()
    b.add_var(1.0, 5.0, 2.0)
    lp = b.build()
    s = solve(lp)
    assert s.status is LpStatus.OPTIMAL and s.duals.size == 0
    assert check_certificates(lp, s)


def test_certificates_reject_wrong_dual_sign():
    b = LpBuilder()
    b.add_vars(2, 0.0, np.inf, -1.0)
    b.add_row([0, 1], [1.0, 1.0], "<=", 1.0)
    lp = b.build()
    s = solve(lp)
    s.duals = -s.duals  # positive dual on a "<=" row
    assert not check_certificates(lp, s)


def test_model_validation():
    with pytest.raises(LpModelError):
        SparseLp(2, [1.0, 1.0], [], lower=[0.0, 2.0], upper=[1.0, 1.0])
    b = LpBuilder()
    b.add_var()
    b.add_row([0, 0], [1.0, 1.0], "<=", 1.0)  # duplicate column
    with pytest.raises(LpModelError):
        b.build()
    b = LpBuilder()
    b.add_var()
    b.add_row([1], [1.0], "<=", 1.0)  # column out of range
    with pytest.raises(LpModelError):
        b.build()


def test_wide_magnitude_range_is_scaled():
    # $100M-scale costs against $10-scale prices in one LP
    b = LpBuilder()
    b.add_var(0.0, 1.0, 1e8)
    b.add_var(0.0, 1e6, 10.0)
    b.add_row([0, 1], [1e5, -1.0], "<=", 0.0)
    b.add_row([0, 1], [-1e5, -1.0], "<=", -2e4)
    lp = b.build()
    s = solve(lp)
    assert s.status is LpStatus.OPTIMAL
    assert check_certificates(lp, s, tol_feas=1e-7, tol_obj=1e-6)


def test_degenerate_storage_like_lp_terminates():
    # many simultaneously tight rows at the zero vertex
    b = LpBuilder()
    cap = b.add_var(0.0, 10.0, 5.0)
    xs = b.add_vars(40, 0.0, np.inf, -1.0)
    for v in xs:
        b.add_row([v, cap], [1.0, -0.25], "<=", 0.0)
        b.add_row([v, cap], [1.0, -1.0], "<=", 0.0)
    s = solve(b.build())
    assert s.status is LpStatus.OPTIMAL
    assert s.objective_value == pytest.approx(10.0 * 5 - 40 * 2.5)


def test_dump_lp_roundtrippable_text():
    b = LpBuilder()
    b.add_vars(2, 0.0, 1.0, 1.0)
    b.add_row([0, 1], [1.0, -2.0], "<=", 0.5)
    buf = io.StringIO()
    dump_lp(b.build(), buf)
    text = buf.getvalue()
    assert "r0:" in text and "<=" in text and "x1" in text
