"""Kernel backend selection.

Prefers the compiled extension, falls back to the numpy implementation.
Set ``PLACEREC_PURE_PYTHON=1`` to force the fallback (useful for the
backend benchmark and for debugging).
"""

from __future__ import annotations

import os

from . import _kernels_py

_force_python = os.environ.get("PLACEREC_PURE_PYTHON", "") not in ("", "0")

if not _force_python:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py
else:
    _impl = _kernels_py

BACKEND: str = _impl.BACKEND
accumulate_descriptors = _impl.accumulate_descriptors
forward_pass = _impl.forward_pass
backward_pass = _impl.backward_pass


def using_compiled() -> bool:
    return BACKEND == "compiled"
