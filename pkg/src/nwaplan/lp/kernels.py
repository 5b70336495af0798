"""Backend selection for the simplex inner-loop kernels.

Prefers the compiled extension; falls back to the numpy implementation when
the extension was not built. NWAPLAN_PURE_PYTHON=1 forces the fallback
(used by the benchmark and the backend-parity tests).
"""

import os

from nwaplan.lp import _pykernels

_force_pure = os.environ.get("NWAPLAN_PURE_PYTHON", "") not in ("", "0")

if not _force_pure:
    try:
        from nwaplan.lp import _ckernels as _impl
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

BACKEND = _impl.BACKEND
ftran = _impl.ftran
pivot_update = _impl.pivot_update
ratio_test = _impl.ratio_test
