"""Numpy implementations of the kernels in ``_ckernels.pyx``."""
import math

import numpy as np

# Below this size a scalar loop beats numpy's per-call overhead.
_SCALAR_MAX = 32

# Caps the (times x particles) scratch array in correlation_series.
_CHUNK_ELEMENTS = 1 << 20


def correlation_product(g, pol, t):
    if g.shape[0] <= _SCALAR_MAX:
        re, im = 1.0, 0.0
        cos, sin, w = math.cos, math.sin, 2.0 * t
        for gk, pk in zip(g.tolist(), pol.tolist()):
            x = w * gk
            c = cos(x)
            s = pk * sin(x)
            re, im = re * c - im * s, re * s + im * c
        return complex(re, im)
    phase = 2.0 * g * t
    return complex(np.prod(np.cos(phase) + 1j * pol * np.sin(phase)))


def correlation_series(g, pol, times):
    times = np.asarray(times, dtype=float)
    out = np.empty(times.shape[0], dtype=np.complex128)
    step = max(1, _CHUNK_ELEMENTS // max(1, g.shape[0]))
    for start in range(0, times.shape[0], step):
        phase = 2.0 * np.multiply.outer(times[start:start + step], g)
        out[start:start + step] = np.prod(np.cos(phase) + 1j * pol * np.sin(phase), axis=1)
    return out
