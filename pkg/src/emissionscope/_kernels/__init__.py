"""Hot numeric kernels with two interchangeable backends.

The numba backend is used by default; setting ``EMISSIONSCOPE_NO_NUMBA=1``
(or any value other than ``0``) selects the pure-numpy fallback, as does a
failed numba import.  Both backends implement identical arithmetic in
identical order, so chosen splits, fitted trees, and routed predictions are
bit-for-bit equal across backends.
"""

from __future__ import annotations

import os


def _numpy_forced() -> bool:
    flag = os.environ.get("EMISSIONSCOPE_NO_NUMBA", "")
    return flag not in ("", "0")


if _numpy_forced():
    from . import numpy_backend as _impl

    BACKEND = "numpy"
else:
    try:
        from . import numba_backend as _impl

        BACKEND = "numba"
    except ImportError:
        from . import numpy_backend as _impl

        BACKEND = "numpy"

best_split = _impl.best_split
tree_route = _impl.tree_route


def backend_name() -> str:
    return BACKEND
