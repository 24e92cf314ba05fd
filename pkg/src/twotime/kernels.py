"""Kernel selection.

The compiled module is used when it imports; otherwise the numpy versions
are used.  Set ``TWOTIME_KERNELS=python`` to force the fallback.
"""
import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("TWOTIME_KERNELS", "").lower() == "python":
        raise ImportError("compiled kernels disabled by TWOTIME_KERNELS")
    from . import _ckernels as _impl
    BACKEND = "compiled"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

__all__ = ["BACKEND", "correlation_product", "correlation_series", "implementation"]


def _as_f64(a):
    if type(a) is np.ndarray and a.dtype == np.float64 and a.flags.c_contiguous:
        return a
    return np.ascontiguousarray(a, dtype=np.float64)


def _prep(g, pol):
    return _as_f64(g), _as_f64(pol)


def implementation(name=None):
    """Return the kernel module for ``name`` ('compiled', 'python') or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "compiled":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown kernel implementation {name!r}")


def correlation_product(g, pol, t, impl=None):
    g, pol = _prep(g, pol)
    return implementation(impl).correlation_product(g, pol, float(t))


def correlation_series(g, pol, times, impl=None):
    g, pol = _prep(g, pol)
    times = np.ascontiguousarray(times, dtype=np.float64)
    return implementation(impl).correlation_series(g, pol, times)
