"""Kernel back-end selection.

The compiled extension is preferred; set ``BIHARM_PURE_PYTHON=1`` to force
the numpy fallback. :func:`use` switches at runtime (benchmarks, tests).
"""
from __future__ import annotations

import os

from . import _kernels

try:
    from . import _jetcore
except ImportError:  # extension not built
    _jetcore = None

BACKENDS = {"python": _kernels}
if _jetcore is not None:
    BACKENDS["compiled"] = _jetcore

_active = "python"
if _jetcore is not None and os.environ.get("BIHARM_PURE_PYTHON", "") not in ("1", "true"):
    _active = "compiled"


def name() -> str:
    return _active


def available() -> list[str]:
    return sorted(BACKENDS)


def use(backend: str) -> str:
    """Select a back end by name; returns the previously active one."""
    global _active
    if backend not in BACKENDS:
        raise ValueError(f"backend {backend!r} not available (have {available()})")
    prev, _active = _active, backend
    return prev


def kernels():
    return BACKENDS[_active]
