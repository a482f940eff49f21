"""Integrator backend selection.

The compiled extension is preferred when it imported; KDLAB_BACKEND=python
or KDLAB_BACKEND=compiled pins the choice explicitly (the latter raises if
the extension is unavailable rather than silently degrading).
"""

from __future__ import annotations

import os

from . import _rk4_py

try:
    from . import _rk4 as _rk4_compiled
except ImportError:
    _rk4_compiled = None


def get_kernels(name: str | None = None):
    """Kernel module by name ('compiled' | 'python'), or the default pick."""
    if name is None:
        name = os.environ.get("KDLAB_BACKEND", "").strip().lower() or None
    if name in (None, "auto"):
        return _rk4_compiled if _rk4_compiled is not None else _rk4_py
    if name == "python":
        return _rk4_py
    if name == "compiled":
        if _rk4_compiled is None:
            raise ImportError(
                "KDLAB_BACKEND=compiled but the kdlab._rk4 extension is not built"
            )
        return _rk4_compiled
    raise ValueError(f"unknown backend {name!r}, expected 'compiled' or 'python'")


kernels = get_kernels()


def backend_name() -> str:
    return kernels.BACKEND
