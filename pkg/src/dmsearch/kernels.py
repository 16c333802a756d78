"""Kernel dispatch: compiled extension when built, NumPy fallback otherwise.

Set DMSEARCH_KERNELS=python to force the fallback (useful for benchmarking
and parity tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

_impl = _kernels_py
if os.environ.get("DMSEARCH_KERNELS", "").lower() != "python":
    try:
        from . import _kernels as _compiled

        _impl = _compiled
    except ImportError:
        pass

BACKEND: str = _impl.BACKEND
margin_dominated = _impl.margin_dominated
dominated_mask = _impl.dominated_mask
nondominated_mask = _impl.nondominated_mask
hv2d_sorted = _impl.hv2d_sorted


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401

        names.append("compiled")
    except ImportError:
        pass
    return names
