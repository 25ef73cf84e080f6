"""Kernel backend selection: compiled extension if available, else the
pure-Python fallback.  ``BACKEND`` records which one is active; both
expose the same functions (see ``_fallback`` for the contracts).
"""

from __future__ import annotations

import os

from . import _fallback

if os.environ.get("RGRES_FORCE_PY_KERNELS"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

ham_reach_table = _impl.ham_reach_table
longest_path_order = _impl.longest_path_order
rotation_closure = _impl.rotation_closure

__all__ = ["BACKEND", "ham_reach_table", "longest_path_order", "rotation_closure"]
