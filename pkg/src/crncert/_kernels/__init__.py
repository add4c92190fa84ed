"""Kernel backend selection.

The compiled Cython module is used when importable; otherwise, or when the
environment variable ``CRNCERT_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the numpy fallback is used. Both expose the same functions.
"""

import os

from . import _fallback

_force_python = os.environ.get("CRNCERT_PURE_PYTHON", "") not in ("", "0")

if _force_python:
    backend = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as backend
        BACKEND = "cython"
    except ImportError:  # extension not built
        backend = _fallback
        BACKEND = "python"

rk45_advance = backend.rk45_advance
bland_simplex = backend.bland_simplex
siphon_masks = backend.siphon_masks
eval_rates = backend.eval_rates
eval_jacobian = backend.eval_jacobian

__all__ = [
    "BACKEND",
    "backend",
    "rk45_advance",
    "bland_simplex",
    "siphon_masks",
    "eval_rates",
    "eval_jacobian",
]
