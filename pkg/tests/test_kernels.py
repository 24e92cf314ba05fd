import os
import subprocess
import sys

import numpy as np
import pytest

from twotime import kernels
from twotime.decoherence import EnvironmentSpec, correlation_amplitude

try:
    kernels.implementation("compiled")
    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False

needs_compiled = pytest.mark.skipif(not HAVE_COMPILED, reason="extension not built")


def _env(rng, n):
    return EnvironmentSpec.random(n, rng)


@pytest.mark.parametrize("n", [1, 3, 14, 31, 32, 33, 200])
def test_python_product_matches_dense_formula(rng, n):
    env = _env(rng, n)
    for t in rng.uniform(-10, 10, size=5):
        want = np.prod(np.cos(2 * env.couplings * t) + 1j * env.polarizations * np.sin(2 * env.couplings * t))
        got = kernels.correlation_product(env.couplings, env.polarizations, t, impl="python")
        assert abs(got - want) < 1e-13


def test_python_series_chunks(rng):
    env = _env(rng, 7)
    t = rng.uniform(0, 100, size=5000)
    got = kernels.correlation_series(env.couplings, env.polarizations, t, impl="python")
    scalar = [kernels.correlation_product(env.couplings, env.polarizations, x, impl="python") for x in t[:50]]
    np.testing.assert_allclose(got[:50], scalar, atol=1e-13)


@needs_compiled
@pytest.mark.parametrize("n", [1, 5, 40, 1000])
def test_compiled_matches_python(rng, n):
    env = _env(rng, n)
    t = rng.uniform(-50, 50, size=300)
    a = kernels.correlation_series(env.couplings, env.polarizations, t, impl="compiled")
    b = kernels.correlation_series(env.couplings, env.polarizations, t, impl="python")
    np.testing.assert_allclose(a, b, atol=1e-12)
    for x in t[:10]:
        c = kernels.correlation_product(env.couplings, env.polarizations, x, impl="compiled")
        p = kernels.correlation_product(env.couplings, env.polarizations, x, impl="python")
        assert abs(c - p) < 1e-12


def test_unknown_implementation():
    with pytest.raises(ValueError):
        kernels.implementation("fortran")


def test_backend_constant():
    assert kernels.BACKEND in ("compiled", "python")
    assert kernels.BACKEND == ("compiled" if HAVE_COMPILED and os.environ.get("TWOTIME_KERNELS") != "python"
                               else "python")


def test_environment_variable_forces_fallback():
    code = "from twotime import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, TWOTIME_KERNELS="python")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_fallback_agrees_with_dense(rng):
    env = _env(rng, 6)
    z = kernels.correlation_product(env.couplings, env.polarizations, 0.9, impl="python")
    assert abs(z - correlation_amplitude(env, 0.9, "dense")) < 1e-12
