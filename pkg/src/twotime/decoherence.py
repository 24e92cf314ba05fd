"""Toy model of environment-induced decoherence.

A qubit system ``s`` is premeasured by a qubit pointer ``a`` through
``H_sa = -g sigma_z(s) sigma_y(a)`` for ``t1 = pi / (4 g)``.  The pointer is
then monitored by ``N`` environment qubits ``e1..eN`` through
``H_ae = -sigma_z(a) sum_k g_k sigma_z(e_k)``.

The correlation amplitude is

    z(t) = prod_k [cos(2 g_k t) + i (|alpha_k|^2 - |beta_k|^2) sin(2 g_k t)]
         = <eps_D(t) | eps_U(t)>

so that the reduced system-pointer density matrix carries ``z a b*`` on
``|uU><dD|``.  Two routes compute ``z``: the ``product`` backend evaluates
the closed form in O(N); the ``dense`` backend evolves the full
``2^(N+2)`` statevector and takes the environment overlap explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.integrate import trapezoid

from . import kernels
from .errors import DenseLimitExceeded, NormalizationError
from .qcore import (
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    Operator,
    StateVector,
    SubsystemLayout,
    evolve,
    partial_trace,
)

DENSE_LIMIT = 20
NORM_TOL = 1e-12

SYSTEM, POINTER = "s", "a"


def env_labels(n: int) -> tuple[str, ...]:
    return tuple(f"e{k}" for k in range(1, n + 1))


def first_primes(n: int) -> np.ndarray:
    primes = []
    cand = 2
    while len(primes) < n:
        if all(cand % p for p in primes if p * p <= cand):
            primes.append(cand)
        cand += 1
    return np.array(primes, dtype=float)


def prime_root_couplings(n: int) -> np.ndarray:
    """Default incommensurate couplings ``sqrt(p_k)`` over the first ``n`` primes."""
    return np.sqrt(first_primes(n))


@dataclass(frozen=True, eq=False)
class EnvironmentSpec:
    """``N`` two-level particles with couplings ``g_k`` and amplitudes ``(alpha_k, beta_k)``."""

    couplings: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        g = np.array(self.couplings, dtype=float).reshape(-1)
        al = np.array(self.alphas, dtype=complex).reshape(-1)
        be = np.array(self.betas, dtype=complex).reshape(-1)
        if g.size < 1:
            raise ValueError("environment needs at least one particle")
        if not (g.size == al.size == be.size):
            raise ValueError("couplings, alphas and betas must have equal length")
        if not np.all(np.isfinite(g)) or np.any(g == 0):
            raise ValueError("couplings must be finite and nonzero")
        norms = np.abs(al) ** 2 + np.abs(be) ** 2
        bad = np.flatnonzero(np.abs(norms - 1.0) > NORM_TOL)
        if bad.size:
            k = int(bad[0])
            raise NormalizationError(
                f"environment particle {k + 1}: |alpha|^2+|beta|^2 = {norms[k]:.15g}",
                field=f"env[{k}]",
                norm=float(norms[k]),
            )
        for arr in (g, al, be):
            arr.setflags(write=False)
        object.__setattr__(self, "couplings", g)
        object.__setattr__(self, "alphas", al)
        object.__setattr__(self, "betas", be)

    @property
    def n(self) -> int:
        return int(self.couplings.size)

    @cached_property
    def polarizations(self) -> np.ndarray:
        """``|alpha_k|^2 - |beta_k|^2``."""
        pol = np.abs(self.alphas) ** 2 - np.abs(self.betas) ** 2
        pol.setflags(write=False)
        return pol

    @classmethod
    def uniform(cls, n: int, alpha=2 ** -0.5, beta=2 ** -0.5, couplings=None) -> "EnvironmentSpec":
        g = prime_root_couplings(n) if couplings is None else np.broadcast_to(couplings, (n,))
        return cls(g, np.full(n, alpha, dtype=complex), np.full(n, beta, dtype=complex))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, couplings=None) -> "EnvironmentSpec":
        v = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        g = rng.uniform(0.2, 2.0, size=n) if couplings is None else couplings
        return cls(g, v[:, 0], v[:, 1])

    def initial_state(self) -> np.ndarray:
        """Unentangled environment product ket, length ``2^N``."""
        out = np.ones(1, dtype=complex)
        for al, be in zip(self.alphas, self.betas):
            out = np.kron(out, np.array([al, be]))
        return out


@dataclass(frozen=True)
class ToyModelConfig:
    """System amplitudes ``a, b``, system-pointer coupling ``g`` and environment."""

    a: complex
    b: complex
    env: EnvironmentSpec
    g: float = 1.0

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        nrm = abs(a) ** 2 + abs(b) ** 2
        if abs(nrm - 1.0) > NORM_TOL:
            raise NormalizationError(f"|a|^2+|b|^2 = {nrm:.15g}", field="a,b", norm=nrm)
        if not self.g > 0:
            raise ValueError("g must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "g", float(self.g))

    @property
    def t1(self) -> float:
        """Duration of the premeasurement, ``pi / (4 g)``."""
        return np.pi / (4.0 * self.g)


SA_LAYOUT = SubsystemLayout.qubits(SYSTEM, POINTER)
READY = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)


def system_pointer_hamiltonian(g: float) -> Operator:
    return Operator(SA_LAYOUT, -g * np.kron(SIGMA_Z, SIGMA_Y), hermitian=True)


def premeasure(cfg: ToyModelConfig, t: float | None = None) -> StateVector:
    """Dense evolution of ``(a|u> + b|d>) (x) |R>`` under ``H_sa`` up to ``t`` (default ``t1``)."""
    t = cfg.t1 if t is None else t
    psi0 = StateVector(SA_LAYOUT, np.kron([cfg.a, cfg.b], READY), 0.0)
    return evolve(psi0, system_pointer_hamiltonian(cfg.g), t)


@lru_cache(maxsize=32)
def _env_energy(couplings: tuple[float, ...]) -> np.ndarray:
    """Diagonal of ``sum_k g_k sigma_z(e_k)`` built from Kronecker sums."""
    n = len(couplings)
    z = np.array([1.0, -1.0])
    total = np.zeros(2 ** n)
    for k, gk in enumerate(couplings):
        term = np.kron(np.kron(np.ones(2 ** k), z), np.ones(2 ** (n - k - 1)))
        total += gk * term
    total.setflags(write=False)
    return total


def _check_dense(n_env: int, limit: int):
    required = n_env + 2
    if required > limit:
        raise DenseLimitExceeded(required, limit)


def pointer_environment_diagonal(env: EnvironmentSpec) -> np.ndarray:
    """Diagonal of ``H_ae`` on the ``(s, a, e1..eN)`` product basis."""
    e = _env_energy(tuple(float(x) for x in env.couplings))
    return np.kron(np.ones(2), np.kron(-np.array([1.0, -1.0]), e))


def pointer_environment_hamiltonian(env: EnvironmentSpec, dense_limit: int = 12) -> Operator:
    """``H_ae`` as a full matrix; only for small checks (``N + 2 <= dense_limit``)."""
    _check_dense(env.n, dense_limit)
    layout = SA_LAYOUT.concat(SubsystemLayout.qubits(*env_labels(env.n)))
    return Operator(layout, np.diag(pointer_environment_diagonal(env)), hermitian=True)


def couple_environment_dense(
    psi_sa: StateVector, env: EnvironmentSpec, dt: float, dense_limit: int = DENSE_LIMIT
) -> StateVector:
    """Attach the environment to ``psi_sa`` and evolve the full state under ``H_ae`` for ``dt``."""
    _check_dense(env.n, dense_limit)
    layout = psi_sa.layout.concat(SubsystemLayout.qubits(*env_labels(env.n)))
    full = np.kron(psi_sa.amplitudes, env.initial_state())
    phases = np.exp(-1j * dt * pointer_environment_diagonal(env))
    return StateVector(layout, phases * full, psi_sa.time + dt)


_BELL = StateVector(SA_LAYOUT, np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2.0))


def environment_branches(env: EnvironmentSpec, dt: float, dense_limit: int = DENSE_LIMIT):
    """``(eps_U(dt), eps_D(dt))`` read off a dense ``(|uU> + |dD>)/sqrt(2)`` evolution."""
    psi = couple_environment_dense(_BELL, env, dt, dense_limit)
    t = psi.amplitudes.reshape(2, 2, -1)
    return np.sqrt(2.0) * t[0, 0], np.sqrt(2.0) * t[1, 1]


def correlation_amplitude(
    env: EnvironmentSpec, dt: float, backend: str = "product", dense_limit: int = DENSE_LIMIT
) -> complex:
    if backend == "product":
        return kernels.correlation_product(env.couplings, env.polarizations, dt)
    if backend == "dense":
        eps_u, eps_d = environment_branches(env, dt, dense_limit)
        return complex(np.vdot(eps_d, eps_u))
    raise ValueError(f"unknown backend {backend!r}")


def correlation_series(env: EnvironmentSpec, times, backend: str = "product") -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if backend == "product":
        return kernels.correlation_series(env.couplings, env.polarizations, times)
    return np.array([correlation_amplitude(env, t, backend) for t in times])


def time_averaged_overlap(env: EnvironmentSpec) -> float:
    """Long-time average of ``|z|^2``: ``2^-N prod_k (1 + (|alpha_k|^2 - |beta_k|^2)^2)``."""
    return float(np.prod((1.0 + env.polarizations ** 2) / 2.0))


def factor_periods(env: EnvironmentSpec) -> np.ndarray:
    """Period of each ``|cos(2 g t) + i p sin(2 g t)|^2`` factor, ``pi / (2 |g_k|)``."""
    return np.pi / (2.0 * np.abs(env.couplings))


def numerical_time_average(env: EnvironmentSpec, T: float | None = None, step: float | None = None) -> float:
    """Trapezoidal mean of ``|z(tau)|^2`` over ``[0, T]``.

    Defaults: ``T = 500`` times the longest factor period, ``step`` a
    fiftieth of the shortest.
    """
    periods = factor_periods(env)
    T = 500.0 * periods.max() if T is None else T
    step = periods.min() / 50.0 if step is None else step
    n = int(np.ceil(T / step)) + 1
    tau = np.linspace(0.0, T, n)
    z2 = np.abs(correlation_series(env, tau)) ** 2
    return float(trapezoid(z2, tau) / T)


def recurrence_search(env: EnvironmentSpec, threshold: float, t_max: float, dt: float) -> float | None:
    """First sampled time at which ``|z|`` climbs back to ``threshold``.

    The scan runs on the grid ``dt, 2 dt, ...`` up to ``t_max``.  A
    recurrence is a sample with ``|z| >= threshold`` after ``|z|`` has
    dropped below it at least once.  If ``|z|`` never drops the amplitude
    has not decohered and the first sample past ``dt`` is returned.
    """
    onsets = recurrences(env, threshold, t_max, dt)
    return float(onsets[0]) if onsets.size else None


def recurrences(env: EnvironmentSpec, threshold: float, t_max: float, dt: float) -> np.ndarray:
    """Every recurrence onset on the grid, in increasing order."""
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = int(np.floor(t_max / dt + 1e-9))
    if n < 2:
        return np.empty(0)
    t = np.arange(1, n + 1) * dt
    high = np.abs(correlation_series(env, t)) >= threshold
    if high.all():
        return t[1:2]
    first_low = int(np.argmax(~high))
    rising = np.flatnonzero(high[1:] & ~high[:-1]) + 1
    return t[rising[rising > first_low]]


def reduced_system_pointer(cfg: ToyModelConfig, t: float, dense_limit: int = DENSE_LIMIT) -> DensityMatrix:
    """System-pointer density matrix at ``t >= t1`` through the dense pipeline."""
    if t < cfg.t1:
        raise ValueError(f"t = {t} precedes the end of premeasurement t1 = {cfg.t1}")
    psi = couple_environment_dense(premeasure(cfg), cfg.env, t - cfg.t1, dense_limit)
    return partial_trace(DensityMatrix.pure(psi), (SYSTEM, POINTER))
