"""Interval-uncertain LPs and their budget-of-uncertainty robust counterpart.

An UncertainLp is a nominal SparseLp plus nonnegative half-width deviations
on a subset of its coefficients (and optionally on right-hand sides) and a
per-row protection budget. The robust counterpart is a plain LP whose
optimum is the worst case over coefficient realizations within the
intervals, with at most budget-many entries per row at their extremes
(fractional budgets allowed). A full budget protects against every entry of
the row simultaneously at its worst end.

The case-study knob is a single scalar gamma in [0, 1]: scale_protection
shrinks every interval to +-gamma times its half-width and protects with
full budgets, i.e. it optimizes for the worst realization inside the scaled
intervals.

Only "<=" rows can carry deviations; an equality with an uncertain
coefficient cannot hold for all realizations unless the variable is zero,
so such models must be rewritten (substitute the defining equality into the
inequalities) before robustification.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from nwaplan.lp.model import EQ, LE, LpModelError, Row, SparseLp


@dataclass
class UncertainLp:
    """Nominal LP, per-entry deviation half-widths, per-row budgets.

    deviations[i] is a (cols, halfwidths) pair: column indices must be a
    subset of base.rows[i].cols and halfwidths must be positive.
    rhs_deviations are half-widths on the rhs, folded into a coefficient
    column by augment_rhs_uncertainty.
    """

    base: SparseLp
    deviations: list[tuple[np.ndarray, np.ndarray]]
    row_budgets: np.ndarray
    rhs_deviations: np.ndarray | None = field(default=None)

    def __post_init__(self):
        m = self.base.n_rows
        if len(self.deviations) != m:
            raise LpModelError("one deviation entry per row required")
        self.row_budgets = np.asarray(self.row_budgets, dtype=float)
        if self.row_budgets.shape != (m,):
            raise LpModelError("one budget per row required")
        if self.rhs_deviations is not None:
            self.rhs_deviations = np.asarray(self.rhs_deviations, dtype=float)
            if self.rhs_deviations.shape != (m,):
                raise LpModelError("one rhs deviation per row required")
            if np.any(self.rhs_deviations < 0):
                raise LpModelError("rhs deviations must be nonnegative")
        norm = []
        for i, (cols, devs) in enumerate(self.deviations):
            cols = np.asarray(cols, dtype=np.int64)
            devs = np.asarray(devs, dtype=float)
            if cols.shape != devs.shape:
                raise LpModelError(f"row {i}: deviation cols/values length mismatch")
            if np.any(devs < 0):
                raise LpModelError(f"row {i}: deviations must be nonnegative")
            keep = devs > 0
            cols, devs = cols[keep], devs[keep]
            if not np.isin(cols, self.base.rows[i].cols).all():
                raise LpModelError(f"row {i}: deviation on a missing coefficient")
            if self.row_budgets[i] < 0 or self.row_budgets[i] > len(cols) + 1e-12:
                raise LpModelError(f"row {i}: budget outside [0, {len(cols)}]")
            norm.append((cols, devs))
        self.deviations = norm

    @classmethod
    def certain(cls, lp: SparseLp) -> "UncertainLp":
        m = lp.n_rows
        empty = np.zeros(0)
        return cls(lp, [(empty, empty)] * m, np.zeros(m))


def augment_rhs_uncertainty(ulp: UncertainLp) -> UncertainLp:
    """Fold rhs uncertainty into the coefficient matrix.

    Adds one variable fixed to 1 whose column carries -rhs in every row (with
    the rhs half-widths as its deviations); all rhs become 0. Solves to the
    same optimum as the original when the rhs is certain.
    """
    lp = ulp.base
    n = lp.n_vars
    rhs_dev = ulp.rhs_deviations if ulp.rhs_deviations is not None else np.zeros(lp.n_rows)
    new_rows = []
    new_devs = []
    budgets = ulp.row_budgets.copy()
    for i, row in enumerate(lp.rows):
        cols, vals = row.cols, row.vals
        if row.rhs != 0.0 or rhs_dev[i] > 0:
            cols = np.concatenate([cols, [n]])
            vals = np.concatenate([vals, [-row.rhs]])
        new_rows.append(Row(cols, vals, row.sense, 0.0))
        dcols, dvals = ulp.deviations[i]
        if rhs_dev[i] > 0:
            dcols = np.concatenate([dcols, [n]])
            dvals = np.concatenate([dvals, [rhs_dev[i]]])
            budgets[i] = min(budgets[i] + 1.0, len(dcols))
        new_devs.append((dcols, dvals))
    base = SparseLp(
        n_vars=n + 1,
        objective=np.concatenate([lp.objective, [0.0]]),
        rows=new_rows,
        lower=np.concatenate([lp.lower, [1.0]]),
        upper=np.concatenate([lp.upper, [1.0]]),
    )
    return UncertainLp(base, new_devs, budgets)


def scale_protection(ulp: UncertainLp, gamma: float) -> UncertainLp:
    """Scalar protection knob: shrink every interval to gamma times its
    half-width and protect with full row budgets over the scaled intervals."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    devs = []
    budgets = np.zeros(ulp.base.n_rows)
    for i, (cols, vals) in enumerate(ulp.deviations):
        if gamma == 0.0:
            devs.append((np.zeros(0, dtype=np.int64), np.zeros(0)))
        else:
            devs.append((cols.copy(), gamma * vals))
            budgets[i] = len(cols)
    rhs_dev = None
    if ulp.rhs_deviations is not None:
        rhs_dev = gamma * ulp.rhs_deviations
    return UncertainLp(ulp.base, devs, budgets, rhs_dev)


def robust_counterpart(ulp: UncertainLp) -> SparseLp:
    """Plain LP whose optimum is the budget-constrained worst case.

    Per uncertain row i: LHS gains z_i*budget_i + sum_j p_ij; per uncertain
    entry (i, j): z_i + p_ij >= halfwidth_ij * y_j; and |x_j| <= y_j for all
    j. Objective untouched. Variable layout: x, then one z per row, then one
    p per uncertain entry (row-major), then one y per x.
    """
    if ulp.rhs_deviations is not None and np.any(ulp.rhs_deviations > 0):
        raise LpModelError("fold rhs uncertainty in with augment_rhs_uncertainty first")
    lp = ulp.base
    n, m = lp.n_vars, lp.n_rows
    total_dev = sum(len(cols) for cols, _ in ulp.deviations)
    z0 = n
    p0 = n + m
    y0 = n + m + total_dev
    n_new = y0 + n

    rows = []
    p_at = p0
    for i, row in enumerate(lp.rows):
        cols, devs = ulp.deviations[i]
        if len(cols) == 0:
            rows.append(Row(row.cols.copy(), row.vals.copy(), row.sense, row.rhs))
            continue
        if row.sense == EQ:
            raise LpModelError(f"row {i}: equality rows cannot carry coefficient uncertainty")
        extra_cols = [z0 + i] if ulp.row_budgets[i] > 0 else []
        extra_vals = [float(ulp.row_budgets[i])] if ulp.row_budgets[i] > 0 else []
        p_idx = list(range(p_at, p_at + len(cols)))
        rows.append(
            Row(
                np.concatenate([row.cols, extra_cols, p_idx]).astype(np.int64),
                np.concatenate([row.vals, extra_vals, np.ones(len(cols))]),
                LE,
                row.rhs,
            )
        )
        for k, (j, dev) in enumerate(zip(cols, devs)):
            rows.append(
                Row(
                    np.array([y0 + j, z0 + i, p_at + k]),
                    np.array([dev, -1.0, -1.0]),
                    LE,
                    0.0,
                )
            )
        p_at += len(cols)
    for j in range(n):
        rows.append(Row(np.array([j, y0 + j]), np.array([1.0, -1.0]), LE, 0.0))
        rows.append(Row(np.array([j, y0 + j]), np.array([-1.0, -1.0]), LE, 0.0))

    inf = np.inf
    return SparseLp(
        n_vars=n_new,
        objective=np.concatenate([lp.objective, np.zeros(n_new - n)]),
        rows=rows,
        lower=np.concatenate([lp.lower, np.zeros(n_new - n)]),
        upper=np.concatenate([lp.upper, np.full(n_new - n, inf)]),
    )
