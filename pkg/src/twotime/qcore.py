"""Complex linear algebra over labeled tensor-product spaces.

Units are chosen with hbar = 1.  Every qubit is stored with index 0 as the
"up"-type state (u, U, u_k) and index 1 as the "down"-type state; subsystem
order in a layout is the Kronecker order, leftmost slowest.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import LayoutError, NotHermitianError

# time tags reached by different float paths may differ by roundoff
TIME_TOL = 1e-9


def same_time(t1: float, t2: float) -> bool:
    return abs(t1 - t2) <= TIME_TOL * max(1.0, abs(t1), abs(t2))

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered ``(label, dimension)`` pairs describing a tensor-product space."""

    subsystems: tuple[tuple[str, int], ...]

    def __post_init__(self):
        subs = tuple((str(lab), int(dim)) for lab, dim in self.subsystems)
        if not subs:
            raise LayoutError("layout needs at least one subsystem")
        seen = set()
        for lab, dim in subs:
            if lab in seen:
                raise LayoutError(f"duplicate subsystem label {lab!r}", label=lab)
            if dim < 2:
                raise LayoutError(f"subsystem {lab!r} has dimension {dim} < 2", label=lab)
            seen.add(lab)
        object.__setattr__(self, "subsystems", subs)

    @classmethod
    def qubits(cls, *labels: str) -> "SubsystemLayout":
        return cls(tuple((lab, 2) for lab in labels))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.subsystems)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    def __len__(self):
        return len(self.subsystems)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutError(f"unknown subsystem label {label!r}", label=label) from None

    def concat(self, other: "SubsystemLayout") -> "SubsystemLayout":
        clash = set(self.labels) & set(other.labels)
        if clash:
            lab = sorted(clash)[0]
            raise LayoutError(f"label collision in tensor product: {lab!r}", label=lab)
        return SubsystemLayout(self.subsystems + other.subsystems)

    def restrict(self, keep: Iterable[str]) -> "SubsystemLayout":
        """Sub-layout with the ``keep`` labels, in this layout's order."""
        keep = set(keep)
        if not keep:
            raise LayoutError("keep set is empty")
        for lab in keep:
            self.index(lab)
        return SubsystemLayout(tuple(s for s in self.subsystems if s[0] in keep))


@dataclass(frozen=True, eq=False)
class StateVector:
    """Amplitudes over ``layout`` at a given time (history or destiny ket)."""

    layout: SubsystemLayout
    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != self.layout.dim:
            raise LayoutError(
                f"{amps.shape[0]} amplitudes for layout of dimension {self.layout.dim}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def basis(cls, layout: SubsystemLayout, *indices: int, time: float = 0.0) -> "StateVector":
        """Product basis state, one index per subsystem."""
        if len(indices) != len(layout):
            raise LayoutError(f"need {len(layout)} indices, got {len(indices)}")
        flat = np.ravel_multi_index(tuple(indices), layout.dims)
        amps = np.zeros(layout.dim, dtype=complex)
        amps[flat] = 1.0
        return cls(layout, amps, time)

    @classmethod
    def qubit(cls, label: str, amplitudes: Sequence[complex], time: float = 0.0) -> "StateVector":
        return cls(SubsystemLayout.qubits(label), np.asarray(amplitudes, dtype=complex), time)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(self.norm - 1.0) <= tol

    def normalized(self) -> "StateVector":
        return StateVector(self.layout, self.amplitudes / self.norm, self.time)

    def inner(self, other: "StateVector") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def with_time(self, time: float) -> "StateVector":
        return StateVector(self.layout, self.amplitudes, time)

    def tensor(self, other: "StateVector") -> "StateVector":
        return tensor_product(self, other)

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)

    def __repr__(self):
        return f"StateVector({list(self.layout.labels)}, t={self.time:g}, dim={self.layout.dim})"


@dataclass(frozen=True, eq=False)
class Operator:
    """Square matrix on ``layout``.

    Passing ``hermitian=True`` or ``unitary=True`` verifies the property and
    raises if it does not hold.
    """

    layout: SubsystemLayout
    entries: np.ndarray
    hermitian: bool | None = None
    unitary: bool | None = None

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        d = self.layout.dim
        if m.shape != (d, d):
            raise LayoutError(f"operator shape {m.shape} does not match dimension {d}")
        object.__setattr__(self, "entries", _frozen(m))
        if self.hermitian and not self.is_hermitian():
            raise NotHermitianError("operator flagged hermitian is not")
        if self.unitary and not self.is_unitary():
            raise ValueError("operator flagged unitary is not")

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return float(np.max(np.abs(self.entries - self.entries.conj().T))) < tol

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        m = self.entries
        return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))) < tol

    def dagger(self) -> "Operator":
        return Operator(self.layout, self.entries.conj().T)

    def apply(self, psi: StateVector) -> StateVector:
        _check_same_layout(self.layout, psi.layout)
        return StateVector(psi.layout, self.entries @ psi.amplitudes, psi.time)

    def __matmul__(self, other):
        if isinstance(other, StateVector):
            return self.apply(other)
        _check_same_layout(self.layout, other.layout)
        return Operator(self.layout, self.entries @ other.entries)

    def tensor(self, other: "Operator") -> "Operator":
        return tensor_product(self, other)

    @classmethod
    def single(cls, label: str, matrix, **flags) -> "Operator":
        m = np.asarray(matrix, dtype=complex)
        return cls(SubsystemLayout(((label, m.shape[0]),)), m, **flags)

    @classmethod
    def identity(cls, layout: SubsystemLayout) -> "Operator":
        return cls(layout, np.eye(layout.dim, dtype=complex))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix on ``layout``."""

    layout: SubsystemLayout
    entries: np.ndarray
    tol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        d = self.layout.dim
        if m.shape != (d, d):
            raise LayoutError(f"matrix shape {m.shape} does not match dimension {d}")
        if np.max(np.abs(m - m.conj().T)) >= self.tol:
            raise NotHermitianError("density matrix is not hermitian")
        if abs(np.trace(m) - 1.0) > self.tol:
            raise ValueError(f"density matrix trace {np.trace(m):.6g} != 1")
        if np.min(np.linalg.eigvalsh(m)) < -1e-10:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "entries", _frozen(m))

    @classmethod
    def pure(cls, psi: StateVector) -> "DensityMatrix":
        v = psi.amplitudes / psi.norm
        return cls(psi.layout, np.outer(v, v.conj()))

    def trace(self) -> complex:
        return complex(np.trace(self.entries))


def _check_same_layout(a: SubsystemLayout, b: SubsystemLayout):
    if a != b:
        raise LayoutError(f"layout mismatch: {a.labels} vs {b.labels}")


def tensor_product(a, b):
    """Kronecker product of two states or two operators, concatenating layouts."""
    layout = a.layout.concat(b.layout)
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        if not same_time(a.time, b.time):
            raise ValueError(f"cannot join states at times {a.time} and {b.time}")
        return StateVector(layout, np.kron(a.amplitudes, b.amplitudes), a.time)
    if isinstance(a, Operator) and isinstance(b, Operator):
        return Operator(layout, np.kron(a.entries, b.entries))
    raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")


def kron_all(items: Iterable) -> "StateVector | Operator":
    items = list(items)
    out = items[0]
    for it in items[1:]:
        out = tensor_product(out, it)
    return out


def partial_trace_entries(entries: np.ndarray, layout: SubsystemLayout, keep: Iterable[str]):
    """Trace out every subsystem not in ``keep``; returns (matrix, reduced layout)."""
    reduced = layout.restrict(keep)
    kept = set(reduced.labels)
    n = len(layout)
    t = np.asarray(entries).reshape(layout.dims + layout.dims)
    rows = list(range(n))
    cols = [i if layout.labels[i] not in kept else n + i for i in range(n)]
    out = [i for i in range(n) if layout.labels[i] in kept]
    out = out + [n + i for i in out]
    m = np.einsum(t, rows + cols, out)
    return m.reshape(reduced.dim, reduced.dim), reduced


def partial_trace(rho, keep: Iterable[str]):
    """Reduced matrix on ``keep`` (labels in original order), same type as ``rho``.

    Works for anything exposing ``layout`` and ``entries`` and constructible
    as ``type(rho)(layout, entries)``; in practice DensityMatrix and
    TwoStateMatrix.
    """
    m, reduced = partial_trace_entries(rho.entries, rho.layout, keep)
    return type(rho)(reduced, m)


def exp_i_sigma(axis: str, c: float, label: str = "q") -> Operator:
    """Closed form of ``exp(i c sigma_axis)`` for axis 'y' or 'z'."""
    if axis == "z":
        m = np.array([[np.exp(1j * c), 0], [0, np.exp(-1j * c)]], dtype=complex)
    elif axis == "y":
        co, si = np.cos(c), np.sin(c)
        m = np.array([[co, si], [-si, co]], dtype=complex)
    else:
        raise ValueError(f"axis must be 'y' or 'z', got {axis!r}")
    return Operator.single(label, m)


def _is_diagonal(m: np.ndarray) -> bool:
    return not np.any(m[~np.eye(m.shape[0], dtype=bool)])


def evolution_operator(H: Operator, dt: float) -> Operator:
    """``exp(-i H dt)`` for a time-independent hermitian ``H``."""
    if not H.is_hermitian():
        raise NotHermitianError("Hamiltonian is not hermitian")
    m = H.entries
    if _is_diagonal(m):
        u = np.diag(np.exp(-1j * dt * np.real(np.diag(m))))
    else:
        w, v = np.linalg.eigh(m)
        u = (v * np.exp(-1j * dt * w)) @ v.conj().T
    return Operator(H.layout, u)


def evolve(psi: StateVector, H: Operator, dt: float) -> StateVector:
    """Apply ``exp(-i H dt)``; negative ``dt`` evolves backwards."""
    _check_same_layout(psi.layout, H.layout)
    if dt == 0:
        return psi
    m = H.entries
    if not H.is_hermitian():
        raise NotHermitianError("Hamiltonian is not hermitian")
    if _is_diagonal(m):
        amps = np.exp(-1j * dt * np.real(np.diag(m))) * psi.amplitudes
    else:
        amps = evolution_operator(H, dt).entries @ psi.amplitudes
    return StateVector(psi.layout, amps, psi.time + dt)


def embed(op: Operator, layout: SubsystemLayout) -> Operator:
    """Extend ``op`` to ``layout`` by identities on the remaining subsystems."""
    sub = op.layout
    for lab, dim in sub.subsystems:
        if layout.dims[layout.index(lab)] != dim:
            raise LayoutError(f"dimension mismatch for {lab!r}", label=lab)
    rest = [s for s in layout.subsystems if s[0] not in set(sub.labels)]
    full = op.entries
    order = list(sub.labels)
    if rest:
        rest_layout = SubsystemLayout(tuple(rest))
        full = np.kron(full, np.eye(rest_layout.dim))
        order += list(rest_layout.labels)
    n = len(layout)
    dims_in_order = [layout.dims[layout.index(lab)] for lab in order]
    t = full.reshape(dims_in_order + dims_in_order)
    perm = [order.index(lab) for lab in layout.labels]
    t = t.transpose(perm + [n + p for p in perm])
    return Operator(layout, t.reshape(layout.dim, layout.dim))


def random_state(layout: SubsystemLayout, rng: np.random.Generator, time: float = 0.0) -> StateVector:
    v = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    return StateVector(layout, v / np.linalg.norm(v), time)


def random_hermitian(layout: SubsystemLayout, rng: np.random.Generator, scale: float = 1.0) -> Operator:
    d = layout.dim
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return Operator(layout, scale * (a + a.conj().T) / 2)
