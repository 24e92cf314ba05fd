"""Weak measurements with a Gaussian pointer.

Pointer wavefunctions are finite mixtures ``sum_j w_j G(q - mu_j)`` of real
Gaussians sharing one width.  ``G`` is normalized so that ``|G|^2`` has
standard deviation ``sigma``::

    G(q) = (2 pi sigma^2)^(-1/4) exp(-q^2 / (4 sigma^2))
    <G(. - mu1) | G(. - mu2)> = exp(-(mu1 - mu2)^2 / (8 sigma^2))

The coupling ``-g(t) P A`` with unit time integral translates the pointer
term paired with eigenvalue ``a_k`` by ``+a_k``; no time stepping is done.
A spatial grid is used only by :func:`grid_oracle` to check the closed forms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridTooNarrow, NearOrthogonalBoundaries, NormalizationError
from .measurement import ObservableSpec
from .qcore import StateVector, SubsystemLayout
from .twostate import EPS_ORTH, TwoState, reduce


@dataclass(frozen=True, eq=False)
class GaussianPointer:
    coefficients: np.ndarray
    centers: np.ndarray
    sigma: float

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex).reshape(-1)
        mu = np.array(self.centers, dtype=float).reshape(-1)
        if c.shape != mu.shape:
            raise ValueError("coefficients and centers differ in length")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        c.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "centers", mu)
        object.__setattr__(self, "sigma", float(self.sigma))

    @classmethod
    def single(cls, center: float, sigma: float) -> "GaussianPointer":
        return cls([1.0], [center], sigma)

    def overlap_matrix(self, other: "GaussianPointer | None" = None) -> np.ndarray:
        other = self if other is None else other
        if other.sigma != self.sigma:
            raise ValueError("pointers have different widths")
        d = np.subtract.outer(self.centers, other.centers)
        return np.exp(-d ** 2 / (8.0 * self.sigma ** 2))

    def inner(self, other: "GaussianPointer") -> complex:
        """``<self|other>``."""
        return complex(self.coefficients.conj() @ self.overlap_matrix(other) @ other.coefficients)

    @property
    def norm(self) -> float:
        return float(np.sqrt(max(self.inner(self).real, 0.0)))

    def normalized(self) -> "GaussianPointer":
        return GaussianPointer(self.coefficients / self.norm, self.centers, self.sigma)

    def translated(self, shift: float) -> "GaussianPointer":
        return GaussianPointer(self.coefficients, self.centers + shift, self.sigma)

    def mean(self) -> float:
        """``<q>``, using ``<G(mu1)|q|G(mu2)> = (mu1 + mu2)/2 <G(mu1)|G(mu2)>``."""
        c = self.coefficients
        s = self.overlap_matrix()
        mid = np.add.outer(self.centers, self.centers) / 2.0
        num = c.conj() @ (mid * s) @ c
        return float(num.real / (c.conj() @ s @ c).real)

    def wavefunction(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        amp = (2.0 * np.pi * self.sigma ** 2) ** -0.25
        diff = q[..., None] - self.centers
        return amp * np.exp(-diff ** 2 / (4.0 * self.sigma ** 2)) @ self.coefficients

    def outer(self) -> np.ndarray:
        """Coefficient matrix of ``|self><self|`` in the (non-orthogonal) Gaussian basis."""
        return np.outer(self.coefficients, self.coefficients.conj())


@dataclass(frozen=True, eq=False)
class WeakScenario:
    """Pre-selected ``sum_k c_k |a_k>``, post-selected ``sum_k c'_k |a_k>``, pointer width."""

    obs: ObservableSpec
    c_initial: np.ndarray
    c_final: np.ndarray
    sigma: float
    eps_orth: float = EPS_ORTH

    def __post_init__(self):
        k = len(self.obs.eigenvalues)
        for name in ("c_initial", "c_final"):
            v = np.array(getattr(self, name), dtype=complex).reshape(-1)
            if v.size != k:
                raise ValueError(f"{name} needs {k} coefficients")
            n2 = float(np.vdot(v, v).real)
            if abs(n2 - 1.0) > 1e-10:
                raise NormalizationError(f"{name} has squared norm {n2:.12g}", field=name, norm=n2)
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        ov = abs(self.pair_weights().sum())
        if ov <= self.eps_orth:
            raise NearOrthogonalBoundaries(ov, self.eps_orth)
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @classmethod
    def from_states(cls, obs: ObservableSpec, phi_1: StateVector, phi_2: StateVector, sigma: float):
        """Expand two system kets in the eigenbasis of ``obs``."""
        ci = [v.inner(phi_1) for v in obs.eigenvectors]
        cf = [v.inner(phi_2) for v in obs.eigenvectors]
        return cls(obs, ci, cf, sigma)

    def with_sigma(self, sigma: float) -> "WeakScenario":
        return WeakScenario(self.obs, self.c_initial, self.c_final, sigma, self.eps_orth)

    def pair_weights(self) -> np.ndarray:
        """``c_k c'_k*``."""
        return self.c_initial * np.conj(self.c_final)

    def state(self, which: str) -> StateVector:
        c = self.c_initial if which == "initial" else self.c_final
        amps = sum(ck * v.amplitudes for ck, v in zip(c, self.obs.eigenvectors))
        return StateVector(self.obs.layout, amps)


def weak_value(scn: WeakScenario) -> complex:
    """``sum_k c_k c'_k* a_k / sum_k c_k c'_k*``."""
    w = scn.pair_weights()
    den = w.sum()
    if abs(den) <= scn.eps_orth:
        raise NearOrthogonalBoundaries(abs(den), scn.eps_orth)
    return complex((w * scn.obs.eigenvalues).sum() / den)


@dataclass(frozen=True, eq=False)
class JointPointerState:
    """``sum_k c_k |a_k> (x) |Q(a_k)>``: one pointer term per eigenvector."""

    eigenvalues: np.ndarray
    coefficients: np.ndarray
    pointers: tuple[GaussianPointer, ...]


def couple_pointer(scn: WeakScenario, start: float = 0.0) -> JointPointerState:
    """Translate the pointer by ``a_k`` in the branch of eigenvector ``k``."""
    q0 = GaussianPointer.single(start, scn.sigma)
    ptrs = tuple(q0.translated(a) for a in scn.obs.eigenvalues)
    return JointPointerState(scn.obs.eigenvalues, scn.c_initial, ptrs)


def post_select_pointer(joint: JointPointerState, scn: WeakScenario) -> GaussianPointer:
    """Pointer left after projecting the system on the final state, ``sum_j c_j c'_j* |Q(a_j)>``."""
    w = joint.coefficients * np.conj(scn.c_final)
    if abs(w.sum()) <= scn.eps_orth:
        raise NearOrthogonalBoundaries(abs(w.sum()), scn.eps_orth)
    centers = np.array([p.centers[0] for p in joint.pointers])
    return GaussianPointer(w, centers, scn.sigma).normalized()


def weakness_residual(scn: WeakScenario) -> float:
    """``1 - |<G(Re A_w)|pointer>|`` for the normalized post-selected pointer."""
    pointer = post_select_pointer(couple_pointer(scn), scn)
    ideal = GaussianPointer.single(weak_value(scn).real, scn.sigma)
    return float(max(0.0, 1.0 - abs(ideal.inner(pointer))))


@dataclass(frozen=True)
class GridResult:
    q: np.ndarray
    density: np.ndarray
    norm: float
    mean: float

    @property
    def peak(self) -> float:
        return float(self.q[int(np.argmax(self.density))])


def default_grid(pointer: GaussianPointer, half_width: float = 8.0, n_points: int = 1 << 14):
    lo = pointer.centers.min() - half_width * pointer.sigma
    hi = pointer.centers.max() + half_width * pointer.sigma
    return lo, hi, n_points


def grid_oracle(pointer: GaussianPointer, grid=None, mass_tol: float = 1e-8) -> GridResult:
    """Sample ``|psi(q)|^2`` on a uniform grid and integrate norm and mean numerically."""
    q_min, q_max, n = grid if grid is not None else default_grid(pointer)
    if n < 1 << 10:
        raise ValueError("grid needs at least 1024 points")
    q = np.linspace(q_min, q_max, int(n))
    dens = np.abs(pointer.wavefunction(q)) ** 2
    h = q[1] - q[0]
    total = pointer.norm ** 2
    mass = np.sum(dens) * h
    if abs(total - mass) / total > mass_tol:
        raise GridTooNarrow(float(abs(total - mass) / total))
    dens = dens / total
    return GridResult(q, dens, float(np.sum(dens) * h), float(np.sum(q * dens) * h / (np.sum(dens) * h)))


def pointer_reduced_two_state(scn: WeakScenario, grid) -> np.ndarray:
    """Pointer two-state on a grid, through the full system-pointer two-state.

    The grid ket for each Gaussian carries ``sqrt(dq)`` so that discrete inner
    products approximate the continuum ones.  Returns the normalized reduced
    matrix indexed by grid points.
    """
    q_min, q_max, n = grid
    q = np.linspace(q_min, q_max, int(n))
    h = q[1] - q[0]
    joint = couple_pointer(scn)
    k = len(joint.pointers)
    layout = SubsystemLayout((("s", k), ("q", int(n))))
    cols = np.array([p.wavefunction(q) * np.sqrt(h) for p in joint.pointers])
    his = np.zeros((k, int(n)), dtype=complex)
    for j in range(k):
        his += np.outer(scn.obs.eigenvectors[j].amplitudes, joint.coefficients[j] * cols[j])
    final_sys = scn.state("final").amplitudes
    tail = (scn.pair_weights()[:, None] * cols).sum(axis=0)
    des = np.outer(final_sys, tail)
    ts = TwoState(StateVector(layout, his.reshape(-1)), StateVector(layout, des.reshape(-1)), scn.eps_orth)
    return reduce(ts, ("q",)).entries


def mixture_outer_on_grid(pointer: GaussianPointer, grid) -> np.ndarray:
    q_min, q_max, n = grid
    q = np.linspace(q_min, q_max, int(n))
    v = pointer.wavefunction(q) * np.sqrt(q[1] - q[0])
    return np.outer(v, v.conj()) / np.vdot(v, v)

