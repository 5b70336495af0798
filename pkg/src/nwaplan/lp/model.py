"""Sparse linear programs in inequality form, with solution certificates.

Conventions used throughout the package:

* minimization;
* rows are either "<=" or "=";
* duals are right-hand-side sensitivities, i.e. duals[i] = d(objective)/d(rhs_i)
  at the optimum. For a minimization this makes the dual of a binding "<=" row
  nonpositive (relaxing the row can only lower the optimum). Equality-row duals
  are free. Callers that need nonnegative shadow prices for "<=" rows (e.g. the
  decomposition master) negate them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp

LE = "<="
EQ = "="

INF = math.inf


class LpModelError(ValueError):
    """Malformed LP data (bad indices, inconsistent bounds, ...)."""


class SolverFailure(RuntimeError):
    """Numerical breakdown after anti-cycling safeguards; carries an iteration log."""

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log or {}


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class Row:
    cols: np.ndarray
    vals: np.ndarray
    sense: str
    rhs: float


@dataclass
class SparseLp:
    """min objective @ x  s.t. rows, lower <= x <= upper."""

    n_vars: int
    objective: np.ndarray
    rows: list[Row]
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.objective.shape != (self.n_vars,):
            raise LpModelError("objective length != n_vars")
        if self.lower.shape != (self.n_vars,) or self.upper.shape != (self.n_vars,):
            raise LpModelError("bound arrays must have length n_vars")
        if np.any(self.lower > self.upper):
            j = int(np.argmax(self.lower > self.upper))
            raise LpModelError(f"lower > upper for variable {j}")
        for i, row in enumerate(self.rows):
            row.cols = np.asarray(row.cols, dtype=np.int64)
            row.vals = np.asarray(row.vals, dtype=float)
            if row.cols.shape != row.vals.shape:
                raise LpModelError(f"row {i}: cols/vals length mismatch")
            if row.cols.size and (row.cols.min() < 0 or row.cols.max() >= self.n_vars):
                raise LpModelError(f"row {i}: column index out of range")
            if len(np.unique(row.cols)) != len(row.cols):
                raise LpModelError(f"row {i}: duplicate column indices")
            if row.sense not in (LE, EQ):
                raise LpModelError(f"row {i}: unknown sense {row.sense!r}")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def matrix(self) -> sp.csr_matrix:
        """Constraint matrix as CSR (n_rows x n_vars)."""
        m = len(self.rows)
        data, indices, indptr = [], [], [0]
        for row in self.rows:
            indices.extend(row.cols.tolist())
            data.extend(row.vals.tolist())
            indptr.append(len(indices))
        return sp.csr_matrix(
            (np.array(data, dtype=float), np.array(indices, dtype=np.int64), np.array(indptr)),
            shape=(m, self.n_vars),
        )

    def rhs(self) -> np.ndarray:
        return np.array([row.rhs for row in self.rows], dtype=float)

    def senses(self) -> list[str]:
        return [row.sense for row in self.rows]


@dataclass
class LpSolution:
    status: LpStatus
    primal: np.ndarray | None = None
    duals: np.ndarray | None = None
    objective_value: float = math.nan
    iterations: int = 0
    info: dict = field(default_factory=dict)


class LpBuilder:
    """Incremental LP construction used by the block and planning assemblers."""

    def __init__(self):
        self._cost: list[float] = []
        self._lo: list[float] = []
        self._hi: list[float] = []
        self._rows: list[Row] = []

    @property
    def n_vars(self) -> int:
        return len(self._cost)

    @property
    def n_rows(self) -> int:
        return len(self._rows)

    def add_var(self, lo: float = 0.0, hi: float = INF, cost: float = 0.0) -> int:
        self._cost.append(cost)
        self._lo.append(lo)
        self._hi.append(hi)
        return len(self._cost) - 1

    def add_vars(self, n: int, lo: float = 0.0, hi: float = INF, cost: float = 0.0) -> list[int]:
        return [self.add_var(lo, hi, cost) for _ in range(n)]

    def add_cost(self, var: int, cost: float):
        self._cost[var] += cost

    def add_row(self, cols, vals, sense: str, rhs: float) -> int:
        self._rows.append(Row(np.asarray(cols, dtype=np.int64), np.asarray(vals, dtype=float), sense, float(rhs)))
        return len(self._rows) - 1

    def build(self) -> SparseLp:
        return SparseLp(
            n_vars=self.n_vars,
            objective=np.array(self._cost, dtype=float),
            rows=self._rows,
            lower=np.array(self._lo, dtype=float),
            upper=np.array(self._hi, dtype=float),
        )


def check_certificates(lp: SparseLp, sol: LpSolution, tol_feas: float = 1e-7, tol_obj: float = 1e-6) -> bool:
    """True iff primal feasibility, dual feasibility, complementary slackness
    and strong duality all hold at the claimed optimum.

    Pure predicate: recomputes everything from (lp, sol); never raises on a
    bad solution, only returns False.
    """
    if sol.status is not LpStatus.OPTIMAL or sol.primal is None or sol.duals is None:
        return False
    x = np.asarray(sol.primal, dtype=float)
    y = np.asarray(sol.duals, dtype=float)
    if x.shape != (lp.n_vars,) or y.shape != (lp.n_rows,):
        return False

    scale = 1.0 + float(np.max(np.abs(x), initial=0.0))
    # Bounds.
    if np.any(x < lp.lower - tol_feas * scale) or np.any(x > lp.upper + tol_feas * scale):
        return False

    A = lp.matrix()
    act = A @ x if lp.n_rows else np.zeros(0)
    b = lp.rhs()
    row_scale = 1.0 + np.abs(b) + np.abs(act) if lp.n_rows else np.zeros(0)
    for i, row in enumerate(lp.rows):
        slack = b[i] - act[i]
        if row.sense == LE:
            if slack < -tol_feas * row_scale[i]:
                return False
            if y[i] > tol_feas * row_scale[i]:  # "<=" duals nonpositive
                return False
            # complementary slackness on rows
            if abs(y[i] * slack) > tol_obj * row_scale[i] * (1.0 + abs(y[i])):
                return False
        else:
            if abs(slack) > tol_feas * row_scale[i]:
                return False

    # Reduced costs z = c - A^T y; sign pattern against active bounds.
    z = lp.objective - (A.T @ y if lp.n_rows else 0.0)
    dual_obj = float(y @ b) if lp.n_rows else 0.0
    ztol = tol_obj * (1.0 + float(np.max(np.abs(lp.objective), initial=0.0)))
    for j in range(lp.n_vars):
        lo, hi = lp.lower[j], lp.upper[j]
        at_lo = x[j] <= lo + tol_feas * scale
        at_hi = x[j] >= hi - tol_feas * scale
        if z[j] > ztol:
            if not at_lo or not math.isfinite(lo):
                return False
            dual_obj += z[j] * lo
        elif z[j] < -ztol:
            if not at_hi or not math.isfinite(hi):
                return False
            dual_obj += z[j] * hi
    primal_obj = float(lp.objective @ x)
    return abs(primal_obj - dual_obj) <= tol_obj * (1.0 + abs(primal_obj))


def dump_lp(lp: SparseLp, fh):
    """Plain-text debug dump, one row per line. Not a stability contract."""
    fh.write(f"# lp n_vars={lp.n_vars} n_rows={lp.n_rows}\n")
    fh.write("min " + " + ".join(f"{c:g}*x{j}" for j, c in enumerate(lp.objective) if c) + "\n")
    for i, row in enumerate(lp.rows):
        terms = " + ".join(f"{v:g}*x{int(c)}" for c, v in zip(row.cols, row.vals))
        fh.write(f"r{i}: {terms} {row.sense} {row.rhs:g}\n")
    for j in range(lp.n_vars):
        fh.write(f"x{j} in [{lp.lower[j]:g}, {lp.upper[j]:g}]\n")
