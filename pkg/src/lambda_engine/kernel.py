"""Backend selection for the integration kernel.

The compiled ``_kernel`` extension is used when importable; otherwise the
pure-Python ``_pykernel`` is used. Set ``LAMBDA_ENGINE_PURE=1`` to force the
fallback.
"""

import os

from . import _pykernel

if os.environ.get("LAMBDA_ENGINE_PURE") == "1":
    _backend = _pykernel
    BACKEND = "python"
else:
    try:
        from . import _kernel as _backend
        BACKEND = "cython"
    except ImportError:
        _backend = _pykernel
        BACKEND = "python"

rhs = _backend.rhs
integrate = _backend.integrate

NY = _pykernel.NY
NPAR = _pykernel.NPAR


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython", "python" or None for
    the active one)."""
    if name is None:
        return _backend
    if name == "python":
        return _pykernel
    if name == "cython":
        from . import _kernel
        return _kernel
    raise ValueError(f"unknown backend {name!r}")
