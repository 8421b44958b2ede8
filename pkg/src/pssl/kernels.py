"""Kernel dispatch.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy implementations in ``_kernels_py`` take over. Set ``PSSL_PURE_PYTHON=1``
to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("PSSL_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

pack_codes = _impl.pack_codes
extension_counts = _impl.extension_counts
compositions = _impl.compositions
max_count_deviation = _impl.max_count_deviation
metropolis_walk = _impl.metropolis_walk

__all__ = [
    "BACKEND",
    "pack_codes",
    "extension_counts",
    "compositions",
    "max_count_deviation",
    "metropolis_walk",
]
