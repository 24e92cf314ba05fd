"""Timing helpers: dense versus product correlation amplitude, compiled versus numpy kernels."""
from __future__ import annotations

import time

import numpy as np

from . import kernels
from .decoherence import EnvironmentSpec, correlation_amplitude


def best_time(fn, repeats: int = 5, min_duration: float = 2e-3) -> float:
    """Best per-call wall time over ``repeats`` batches, each at least ``min_duration`` long."""
    fn()
    loops = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(loops):
            fn()
        el = time.perf_counter() - t0
        if el >= min_duration or loops >= 1 << 20:
            break
        loops *= 4
    best = el / loops
    for _ in range(repeats - 1):
        t0 = time.perf_counter()
        for _ in range(loops):
            fn()
        best = min(best, (time.perf_counter() - t0) / loops)
    return best


def benchmark_backends(n_values, repeats: int = 5, t: float = 0.7):
    """Rows ``(n, dense_seconds, product_seconds, ratio)``."""
    rows = []
    for n in n_values:
        env = EnvironmentSpec.uniform(int(n))
        dense = best_time(lambda: correlation_amplitude(env, t, "dense"), repeats)
        prod = best_time(lambda: correlation_amplitude(env, t, "product"), repeats)
        rows.append((int(n), dense, prod, dense / prod))
    return rows


def product_scaling(n_small: int = 1000, n_large: int = 10000, repeats: int = 5, t: float = 0.7):
    small = EnvironmentSpec.uniform(n_small)
    large = EnvironmentSpec.uniform(n_large)
    ts = best_time(lambda: correlation_amplitude(small, t), repeats)
    tl = best_time(lambda: correlation_amplitude(large, t), repeats)
    return ts, tl


def benchmark_kernels(n_values=(4, 16, 64), n_times: int = 20000, repeats: int = 3):
    """Rows ``(n, n_times, compiled_seconds, python_seconds)`` for ``correlation_series``.

    ``compiled_seconds`` is NaN when the extension is not built.
    """
    times = np.linspace(0.0, 100.0, n_times)
    try:
        kernels.implementation("compiled")
        have_compiled = True
    except ImportError:
        have_compiled = False
    rows = []
    for n in n_values:
        env = EnvironmentSpec.uniform(int(n))
        g, pol = env.couplings, env.polarizations
        py = best_time(lambda: kernels.correlation_series(g, pol, times, impl="python"), repeats)
        if have_compiled:
            c = best_time(lambda: kernels.correlation_series(g, pol, times, impl="compiled"), repeats)
        else:
            c = float("nan")
        rows.append((int(n), n_times, c, py))
    return rows
