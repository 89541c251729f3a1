"""Kernel backend selection: compiled extension with pure-numpy fallback.

Set ``FARNOMA_PURE_PYTHON=1`` to force the numpy kernel even when the
compiled extension is importable (used by the benchmark and tests).
"""

from __future__ import annotations

import os


def _load():
    if not os.environ.get("FARNOMA_PURE_PYTHON"):
        try:
            from . import _genz as kernel

            return kernel, "cython"
        except ImportError:
            pass
    from . import _genz_py as kernel

    return kernel, "python"


kernel, KERNEL_BACKEND = _load()


def kernel_backend() -> str:
    """Name of the active MVN-CDF kernel backend: 'cython' or 'python'."""
    return KERNEL_BACKEND
