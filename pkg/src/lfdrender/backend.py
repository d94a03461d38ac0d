"""Kernel backend selection.

Hot loops ship in two equivalent implementations: numba @njit kernels and
vectorized numpy fallbacks. The active one is resolved once per process from
the LFDRENDER_BACKEND environment variable (``numba`` or ``numpy``; default is
numba when importable) and can be switched programmatically, which is what the
backend benchmark does to time both in one process.

Both implementations perform the same arithmetic in the same order in float64,
so rendered output is bit-identical across backends.
"""

import os

ENV_VAR = "LFDRENDER_BACKEND"

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

_active = None


def available_backends():
    return ("numba", "numpy") if HAS_NUMBA else ("numpy",)


def active_backend():
    """Name of the backend in effect, resolving the env var on first use."""
    global _active
    if _active is None:
        want = os.environ.get(ENV_VAR, "").strip().lower()
        if want not in ("", "numba", "numpy"):
            raise ValueError(f"{ENV_VAR} must be 'numba' or 'numpy', got {want!r}")
        if not want:
            want = "numba" if HAS_NUMBA else "numpy"
        if want == "numba" and not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        _active = want
    return _active


def set_backend(name):
    """Override the active backend for this process. Returns the old name."""
    global _active
    if name not in available_backends():
        raise ValueError(f"unknown or unavailable backend {name!r}")
    old = active_backend()
    _active = name
    return old


def kernels():
    """Return the module holding the active kernel implementations."""
    if active_backend() == "numba":
        from .kernels import cpu_numba as mod
    else:
        from .kernels import cpu_numpy as mod
    return mod
