"""Kernel backend selection.

The env var ``QMT_BACKEND`` picks the implementation of the hot kernels:

* ``numba`` -- require the jitted kernels (ImportError if numba is missing)
* ``numpy`` -- force the pure-numpy fallback
* unset / ``auto`` -- numba when importable, numpy otherwise
"""

from __future__ import annotations

import os

_requested = os.environ.get("QMT_BACKEND", "auto").strip().lower()

if _requested == "numpy":
    from . import _kernels_numpy as _impl
elif _requested == "numba":
    from . import _kernels_numba as _impl
elif _requested in ("auto", ""):
    try:
        from . import _kernels_numba as _impl
    except ImportError:
        from . import _kernels_numpy as _impl
else:
    raise RuntimeError(
        f"QMT_BACKEND={_requested!r} not recognized (use 'numba', 'numpy' or 'auto')"
    )

BACKEND = _impl.NAME

group_sum = _impl.group_sum
pairwise_combine = _impl.pairwise_combine
touched_blocks = _impl.touched_blocks
union_of_blocks = _impl.union_of_blocks
belief_values = _impl.belief_values
belief_table = _impl.belief_table
mobius = _impl.mobius


def get_backend() -> str:
    """Name of the kernel backend in use ('numba' or 'numpy')."""
    return BACKEND
