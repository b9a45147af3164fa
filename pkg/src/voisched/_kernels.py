"""Kernel backend selection.

The compiled extension is preferred when present; the pure-numpy kernel
is the fallback.  Set VOISCHED_PURE=1 to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("VOISCHED_PURE"):
    _backend = _kernels_py
else:
    try:
        from . import _core

        _backend = _core
    except ImportError:
        _backend = _kernels_py


def active_backend():
    """Module providing greedy_voi_select; BACKEND_NAME tells which."""
    return _backend


def backend_name() -> str:
    return _backend.BACKEND_NAME
