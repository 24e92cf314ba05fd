"""Two-state: a forward history ket paired with a backward destiny vector.

The matrix form is ``|his><des| / <des|his>``.  Both vectors are kept
unnormalized with the overlap cached; division happens only when a matrix
is requested.  The destiny vector is stored as a ket and its bra is taken
wherever the formulas need it, so evolving a two-state applies the same
unitary to both kets.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import LayoutError, NearOrthogonalBoundaries, NotDensityLike
from .qcore import DensityMatrix, Operator, StateVector, SubsystemLayout, evolve, partial_trace, same_time

EPS_ORTH = 1e-10
TRACE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TwoStateMatrix:
    """Normalized (unit-trace) two-state matrix, generally not hermitian."""

    layout: SubsystemLayout
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.shape != (self.layout.dim, self.layout.dim):
            raise LayoutError(f"matrix shape {m.shape} does not match layout dimension")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"two-state trace {tr:.15g} differs from 1")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return float(np.max(np.abs(self.entries - self.entries.conj().T))) < tol

    def as_tensor(self) -> np.ndarray:
        return self.entries.reshape(self.layout.dims + self.layout.dims)


@dataclass(frozen=True, eq=False)
class TwoState:
    history: StateVector
    destiny: StateVector
    eps_orth: float = field(default=EPS_ORTH, repr=False)
    overlap: complex = field(init=False)

    def __post_init__(self):
        if self.history.layout != self.destiny.layout:
            raise LayoutError("history and destiny live on different layouts")
        if not same_time(self.history.time, self.destiny.time):
            raise ValueError(
                f"history at t={self.history.time} but destiny at t={self.destiny.time}"
            )
        ov = self.destiny.inner(self.history)
        scale = self.history.norm * self.destiny.norm
        if scale == 0 or abs(ov) / scale <= self.eps_orth:
            raise NearOrthogonalBoundaries(abs(ov) / scale if scale else 0.0, self.eps_orth)
        object.__setattr__(self, "overlap", ov)

    @property
    def layout(self) -> SubsystemLayout:
        return self.history.layout

    @property
    def time(self) -> float:
        return self.history.time

    def matrix(self) -> TwoStateMatrix:
        h = self.history.amplitudes
        d = self.destiny.amplitudes
        return TwoStateMatrix(self.layout, np.outer(h, d.conj()) / self.overlap)


def make_two_state(history: StateVector, destiny: StateVector, eps_orth: float = EPS_ORTH) -> TwoState:
    return TwoState(history, destiny, eps_orth)


def evolve_two_state(ts: TwoState, schedule: Sequence[tuple[Operator, float]]) -> TwoState:
    """Apply a piecewise-constant schedule of ``(H, duration)`` steps."""
    his, des = ts.history, ts.destiny
    for H, dt in schedule:
        if dt <= 0:
            raise ValueError(f"schedule durations must be positive, got {dt}")
        his = evolve(his, H, dt)
        des = evolve(des, H, dt)
    return TwoState(his, des, ts.eps_orth)


def reduce(ts: TwoState, keep: Iterable[str]) -> TwoStateMatrix:
    """Partial trace of the normalized two-state onto ``keep``.

    Computed from the two kets directly, without forming the full matrix.
    """
    layout = ts.layout
    reduced = layout.restrict(keep)
    kept = [layout.index(lab) for lab in reduced.labels]
    traced = [i for i in range(len(layout)) if i not in kept]
    perm = kept + traced
    h = ts.history.as_tensor().transpose(perm).reshape(reduced.dim, -1)
    d = ts.destiny.as_tensor().transpose(perm).reshape(reduced.dim, -1)
    return TwoStateMatrix(reduced, (h @ d.conj().T) / ts.overlap)


def ray_deviation(a: StateVector, b: StateVector) -> float:
    """Distance between the rays of ``a`` and ``b`` after optimal phase alignment."""
    ua = a.amplitudes / a.norm
    ub = b.amplitudes / b.norm
    ov = np.vdot(ub, ua)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(ua - phase * ub))


def as_density_matrix(ts: TwoState, tol: float = 1e-10) -> DensityMatrix:
    """Density matrix of a two-state whose destiny is its own evolved history."""
    dev = ray_deviation(ts.history, ts.destiny)
    if dev > tol:
        raise NotDensityLike(dev)
    return DensityMatrix.pure(ts.history)


def reduce_density(ts: TwoState, keep: Iterable[str]) -> DensityMatrix:
    """Reduced density matrix in the density-like special case."""
    rho = as_density_matrix(ts)
    return partial_trace(rho, keep)
