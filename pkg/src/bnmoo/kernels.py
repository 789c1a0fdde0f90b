"""Kernel dispatch: compiled extension when importable, numpy fallback otherwise.

Set ``BNMOO_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("BNMOO_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _kernels_py
else:
    _impl = _kernels_py

family_loglik = _impl.family_loglik
find_cycle = _impl.find_cycle
nondominated_ranks = _impl.nondominated_ranks

__all__ = ["BACKEND", "family_loglik", "find_cycle", "nondominated_ranks"]
