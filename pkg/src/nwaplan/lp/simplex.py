"""Two-phase revised simplex over the bounded-variable form.

Phase 1 drives out-of-bound basic variables (a composite infeasibility
objective with costs +-1 on violating basics); phase 2 optimizes the true
objective. The basis inverse is kept dense with rank-1 product-form updates
and periodic refactorization. Dantzig pricing with lowest-index tie-breaks.

Degeneracy handling: after a run of zero-length steps all finite bounds are
relaxed by tiny deterministic per-index amounts, which breaks the ties and
lets pricing make real progress (storage-style blocks are hyper-degenerate
at the zero vertex); once the perturbed problem is optimal the bounds are
restored and the composite phase 1 repairs the leftover violations. If
stalling recurs after the perturbation rounds are exhausted, Bland's rule
runs as the terminating backstop.

Inputs are equilibrated with power-of-two row/column scaling (exact in
floating point), because planning data spans ~1e-2 ... 1e8.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from nwaplan.lp import kernels as default_kernels
from nwaplan.lp.model import EQ, LE, LpSolution, LpStatus, SolverFailure, SparseLp

AT_LO, AT_UP, BASIC, FREE, FIXED = 0, 1, 2, 3, 4

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
PRICE_TOL = 1e-9
DEGEN_TOL = 1e-11
PERTURB_EPS = 2e-6
MAX_PERTURB_ROUNDS = 3


def _pow2_scale(v):
    """Scale factors 2^-round(log2 v); exact powers of two, 1 where v == 0."""
    s = np.ones_like(v)
    pos = v > 0
    s[pos] = np.exp2(-np.round(np.log2(v[pos])))
    return s


def _equilibrate(A: sp.csr_matrix):
    m, n = A.shape
    r = np.ones(m)
    c = np.ones(n)
    if A.nnz == 0:
        return r, c
    for _ in range(2):
        B = sp.diags(r) @ A @ sp.diags(c)
        r *= _pow2_scale(np.abs(B).max(axis=1).toarray().ravel())
        B = sp.diags(r) @ A @ sp.diags(c)
        c *= _pow2_scale(np.abs(B).max(axis=0).toarray().ravel())
    return r, c


def solve(
    lp: SparseLp,
    *,
    scale: bool = True,
    max_iters: int | None = None,
    bland_after: int = 60,
    refactor_every: int = 150,
    kernels=None,
) -> LpSolution:
    """Solve lp to optimality; returns primal, row duals and status.

    Raises SolverFailure (with an iteration log) only on numerical breakdown
    that survives refactorization and Bland's rule.
    """
    kern = kernels if kernels is not None else default_kernels
    n = lp.n_vars
    m = lp.n_rows
    if max_iters is None:
        max_iters = 200 + 40 * (m + n)

    A = lp.matrix()
    b = lp.rhs()
    if scale:
        rscale, cscale = _equilibrate(A)
    else:
        rscale, cscale = np.ones(m), np.ones(n)
    A_s = (sp.diags(rscale) @ A @ sp.diags(cscale)).tocsc() if m else sp.csc_matrix((0, n))
    b_s = rscale * b

    N = n + m
    cost = np.zeros(N)
    cost[:n] = lp.objective * cscale
    lower = np.empty(N)
    upper = np.empty(N)
    lower[:n] = lp.lower / cscale
    upper[:n] = lp.upper / cscale
    for i, sense in enumerate(lp.senses()):
        lower[n + i] = 0.0
        upper[n + i] = np.inf if sense == LE else 0.0

    A_full = sp.hstack([A_s, sp.identity(m, format="csc")], format="csc") if m else None
    A_full_T = A_full.T.tocsr() if m else None

    # Initial point: slack basis, structurals at a finite bound (0 if free).
    vstat = np.empty(N, dtype=np.int8)
    x = np.zeros(N)
    for j in range(n):
        lo, hi = lower[j], upper[j]
        if lo == hi:
            vstat[j] = FIXED
            x[j] = lo
        elif np.isfinite(lo):
            vstat[j] = AT_LO
            x[j] = lo
        elif np.isfinite(hi):
            vstat[j] = AT_UP
            x[j] = hi
        else:
            vstat[j] = FREE
            x[j] = 0.0
    basis = np.arange(n, n + m, dtype=np.int64)
    vstat[n:] = BASIC
    if m:
        x[basis] = b_s - A_s @ x[:n]
    binv = np.eye(m)

    d = np.empty(m)
    bland = False
    stall = 0
    pivots = 0
    since_refactor = 0
    iters = 0
    phase1_iters = 0
    status = None
    y = np.zeros(m)
    perturbed = False
    perturb_rounds = 0
    lower_orig = upper_orig = None
    # deterministic per-index jitter in (1, 2) so perturbed ties stay broken
    jitter = 1.0 + np.modf(np.arange(N) * 0.6180339887498949)[0]

    def recompute_basics():
        xn = x.copy()
        xn[basis] = 0.0
        x[basis] = binv @ (b_s - A_full @ xn)

    def refactor():
        nonlocal binv
        B = A_full[:, basis].toarray()
        try:
            binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SolverFailure(
                "singular basis during refactorization",
                {"iterations": iters, "pivots": pivots},
            ) from exc
        recompute_basics()

    def perturb():
        nonlocal perturbed, lower_orig, upper_orig
        if lower_orig is None:
            lower_orig, upper_orig = lower.copy(), upper.copy()
        eps = PERTURB_EPS * 10.0**perturb_rounds
        finite_lo = np.isfinite(lower)
        finite_hi = np.isfinite(upper)
        lower[finite_lo] -= eps * jitter[finite_lo] * (1.0 + np.abs(lower[finite_lo]))
        upper[finite_hi] += eps * jitter[::-1][finite_hi] * (1.0 + np.abs(upper[finite_hi]))
        perturbed = True

    def restore():
        nonlocal perturbed, stall
        lower[:] = lower_orig
        upper[:] = upper_orig
        for j in range(N):
            if vstat[j] == BASIC:
                continue
            if lower[j] == upper[j]:
                vstat[j] = FIXED
                x[j] = lower[j]
            elif vstat[j] == AT_LO:
                x[j] = lower[j]
            elif vstat[j] == AT_UP:
                x[j] = upper[j]
        if m:
            recompute_basics()
        perturbed = False
        stall = 0

    while True:
        iters += 1
        if iters > max_iters:
            raise SolverFailure(
                "iteration limit exceeded",
                {"iterations": iters, "pivots": pivots, "bland": bland, "phase1_iters": phase1_iters},
            )
        if m and since_refactor >= refactor_every:
            refactor()
            since_refactor = 0

        xB = x[basis]
        lo_b = lower[basis]
        hi_b = upper[basis]
        tol_lo = FEAS_TOL * (1.0 + np.abs(lo_b))
        tol_hi = FEAS_TOL * (1.0 + np.abs(hi_b))
        viol_lo = xB < lo_b - tol_lo
        viol_hi = xB > hi_b + tol_hi
        in_phase1 = bool(viol_lo.any() or viol_hi.any())
        if in_phase1:
            phase1_iters += 1
            cb = np.where(viol_lo, -1.0, np.where(viol_hi, 1.0, 0.0))
        else:
            cb = cost[basis]
        if m:
            y = cb @ binv
            z = (np.zeros(N) if in_phase1 else cost) - A_full_T @ y
        else:
            z = cost.copy()

        score = np.full(N, -np.inf)
        mask = vstat == AT_LO
        score[mask] = -z[mask]
        mask = vstat == AT_UP
        score[mask] = z[mask]
        mask = vstat == FREE
        score[mask] = np.abs(z[mask])

        if bland:
            cand = np.nonzero(score > PRICE_TOL)[0]
            q = int(cand[0]) if cand.size else -1
        else:
            q = int(np.argmax(score)) if N else -1
            if q >= 0 and score[q] <= PRICE_TOL:
                q = -1
        if q < 0:
            if in_phase1:
                status = LpStatus.INFEASIBLE  # perturbation only relaxes, so this is conclusive
                break
            if perturbed:
                restore()  # optimal for the relaxed bounds; repair against the true ones
                continue
            status = LpStatus.OPTIMAL
            break

        dirn = 1.0
        if vstat[q] == AT_UP or (vstat[q] == FREE and z[q] > 0):
            dirn = -1.0

        if m:
            c0, c1 = A_full.indptr[q], A_full.indptr[q + 1]
            kern.ftran(binv, A_full.indices[c0:c1].astype(np.int64), A_full.data[c0:c1], d)
            g = dirn * d
            # Infeasible basics block when re-entering their violated bound;
            # feasible basics block at their own bounds.
            down_t = np.where(viol_lo, -np.inf, np.where(viol_hi, hi_b, lo_b))
            up_t = np.where(viol_hi, np.inf, np.where(viol_lo, lo_b, hi_b))
            r, theta_basic = kern.ratio_test(g, xB, down_t, up_t, basis, PIVOT_TOL)
        else:
            g = np.zeros(0)
            r, theta_basic = -1, np.inf

        if vstat[q] == AT_LO:
            theta_self = upper[q] - x[q]
        elif vstat[q] == AT_UP:
            theta_self = x[q] - lower[q]
        else:
            theta_self = np.inf
        theta = min(theta_basic, theta_self)
        if not np.isfinite(theta):
            if in_phase1:
                raise SolverFailure(
                    "unbounded phase-1 direction (numerical breakdown)",
                    {"iterations": iters, "pivots": pivots, "entering": int(q)},
                )
            status = LpStatus.UNBOUNDED  # relaxed bounds add no recession direction
            break

        if theta <= DEGEN_TOL:
            stall += 1
            if stall > bland_after:
                if perturb_rounds < MAX_PERTURB_ROUNDS:
                    perturb()
                    perturb_rounds += 1
                    stall = 0
                    continue
                bland = True
        else:
            stall = 0
            bland = False

        x[q] += dirn * theta
        if m:
            x[basis] = xB - theta * g

        if r >= 0 and theta_basic <= theta_self:
            lv = int(basis[r])
            target = down_t[r] if g[r] > 0 else up_t[r]
            x[lv] = target
            if lower[lv] == upper[lv]:
                vstat[lv] = FIXED
            elif target == lower[lv]:
                vstat[lv] = AT_LO
            else:
                vstat[lv] = AT_UP
            basis[r] = q
            vstat[q] = BASIC
            kern.pivot_update(binv, d, r)
            pivots += 1
            since_refactor += 1
        else:
            # bound flip: entering variable reaches its opposite bound
            vstat[q] = AT_UP if vstat[q] == AT_LO else AT_LO
            x[q] = upper[q] if vstat[q] == AT_UP else lower[q]

    info = {
        "backend": getattr(kern, "BACKEND", "unknown"),
        "iterations": iters,
        "pivots": pivots,
        "phase1_iters": phase1_iters,
    }
    if status is not LpStatus.OPTIMAL:
        return LpSolution(status=status, iterations=iters, info=info)

    x_orig = np.clip(cscale * x[:n], lp.lower, lp.upper)
    y_orig = rscale * y if m else np.zeros(0)
    obj = float(lp.objective @ x_orig)

    if m:
        act = A @ x_orig
        viol = np.zeros(m)
        for i, row in enumerate(lp.rows):
            gap = act[i] - b[i]
            viol[i] = abs(gap) if row.sense == EQ else max(gap, 0.0)
        rel = viol / (1.0 + np.abs(b))
        info["max_violation"] = float(rel.max())
        if rel.max() > 1e-4:
            raise SolverFailure(
                f"optimal basis fails feasibility check (violation {rel.max():.3e})",
                {**info, "worst_row": int(rel.argmax())},
            )

    return LpSolution(
        status=LpStatus.OPTIMAL,
        primal=x_orig,
        duals=y_orig,
        objective_value=obj,
        iterations=iters,
        info=info,
    )
