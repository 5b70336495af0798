"""Sparse LP representation and a self-contained bounded-variable simplex."""

from nwaplan.lp.model import (
    EQ,
    INF,
    LE,
    LpBuilder,
    LpModelError,
    LpSolution,
    LpStatus,
    Row,
    SolverFailure,
    SparseLp,
    check_certificates,
    dump_lp,
)
from nwaplan.lp.simplex import solve

__all__ = [
    "EQ",
    "INF",
    "LE",
    "LpBuilder",
    "LpModelError",
    "LpSolution",
    "LpStatus",
    "Row",
    "SolverFailure",
    "SparseLp",
    "check_certificates",
    "dump_lp",
    "solve",
]
