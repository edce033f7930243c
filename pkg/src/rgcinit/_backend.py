"""Pick the kernel implementation at import time.

The compiled extension is preferred; set ``RGC_PURE_PYTHON=1`` to force the
NumPy fallback. Both produce bitwise-identical results.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("RGC_PURE_PYTHON", "") not in ("", "0"):
    kernels = _kernels_py
    NAME = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        NAME = "cython"
    except ImportError:
        kernels = _kernels_py
        NAME = "python"

__all__ = ["kernels", "NAME"]
