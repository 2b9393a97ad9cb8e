"""Edit-distance kernels.

The compiled extension is used when it was built; otherwise the pure-Python
versions are selected. Set ``LOGIGRID_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

if os.environ.get("LOGIGRID_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "python" if _impl is _pykernels else "cython"
tree_distance = _impl.tree_distance
levenshtein = _impl.levenshtein
adam_update = _impl.adam_update

__all__ = ["BACKEND", "adam_update", "levenshtein", "tree_distance"]
