"""Backend selection for the hull kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy reference in ``_pykernels``. Set ``TVERFLAT_PURE_PYTHON=1`` to force
the fallback.
"""

import os

from . import _pykernels

if os.environ.get("TVERFLAT_PURE_PYTHON") == "1":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

nearest_in_hull = _impl.nearest_in_hull
common_point_gap = _impl.common_point_gap
