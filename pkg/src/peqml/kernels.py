"""Superoperator kernels, compiled when available.

``BACKEND`` is ``"cython"`` when the extension imported and ``"numpy"``
otherwise. Set ``PEQML_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _superop_py

if os.environ.get("PEQML_PURE_PYTHON"):
    _ext = None
else:
    try:
        from . import _superop as _ext
    except ImportError:  # extension not built
        _ext = None

if _ext is not None:
    BACKEND = "cython"
    apply_superop_1q = _ext.apply_superop_1q
    apply_superop_2q = _ext.apply_superop_2q
else:
    BACKEND = "numpy"
    apply_superop_1q = _superop_py.apply_superop_1q
    apply_superop_2q = _superop_py.apply_superop_2q

__all__ = ["BACKEND", "apply_superop_1q", "apply_superop_2q"]
