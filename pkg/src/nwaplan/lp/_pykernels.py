"""Pure numpy/BLAS implementations of the simplex inner-loop kernels.

Signature-compatible with the compiled versions in _ckernels.pyx; the
backend is chosen once in nwaplan.lp.kernels.
"""

import numpy as np
from scipy.linalg.blas import dger

BACKEND = "python"


def ftran(binv, idx, val, out):
    """out = binv[:, idx] @ val (basis-inverse times a sparse column)."""
    if idx.size == 0:
        out[:] = 0.0
    elif idx.size == 1:
        np.multiply(binv[:, idx[0]], val[0], out=out)
    else:
        out[:] = binv[:, idx] @ val


def pivot_update(binv, d, r):
    """Rank-1 product-form update of the basis inverse after a pivot on row r.

    d = binv @ a_entering; requires |d[r]| above the pivot tolerance.
    """
    piv = binv[r] / d[r]
    # binv -= outer(d, piv), in place via BLAS ger on the transposed view
    dger(-1.0, piv, d, a=binv.T, overwrite_a=1)
    binv[r] = piv


def ratio_test(g, xb, down_t, up_t, basis, pivot_tol):
    """Blocking basic variable for a move of the entering variable.

    The basic values change as xb - theta*g. Each basic blocks at down_t
    when decreasing (g > 0) and at up_t when increasing (g < 0); infinite
    targets never block. Returns (row, theta); row = -1 when nothing blocks.
    Ties within 1e-10*(1+theta) break toward the lowest variable index.
    """
    m = g.shape[0]
    if m == 0:
        return -1, np.inf
    theta = np.full(m, np.inf)
    pos = g > pivot_tol
    if pos.any():
        theta[pos] = (xb[pos] - down_t[pos]) / g[pos]
    neg = g < -pivot_tol
    if neg.any():
        theta[neg] = (up_t[neg] - xb[neg]) / (-g[neg])
    np.maximum(theta, 0.0, out=theta)
    tmin = theta.min()
    if not np.isfinite(tmin):
        return -1, np.inf
    ties = np.where(theta <= tmin + 1e-10 * (1.0 + tmin))[0]
    r = int(ties[np.argmin(basis[ties])])
    return r, float(theta[r])
