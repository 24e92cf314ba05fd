"""Ideal measurements with final boundary conditions.

Probability rules (Born, ABL), the teleological assignment of a pointer's
final state, two-time decoherence of the reduced system-pointer two-state,
the backward-evolving system state, and the two-particle signaling setup.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .decoherence import (
    POINTER,
    SA_LAYOUT,
    SYSTEM,
    READY,
    ToyModelConfig,
    couple_environment_dense,
    premeasure,
    system_pointer_hamiltonian,
)
from .errors import ImpossibleBoundaryPair, NearOrthogonalBoundaries, NormalizationError
from .qcore import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    Operator,
    StateVector,
    SubsystemLayout,
    embed,
    evolve,
)
from .seeding import generator
from .twostate import EPS_ORTH, TwoState, TwoStateMatrix, reduce

POINTER_STATES = ("U", "D")
REDUCTION_THRESHOLD = 0.05
_PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


@dataclass(frozen=True, eq=False)
class ObservableSpec:
    """Hermitian operator with its spectral decomposition.

    Eigenvalues come sorted in decreasing order, so for ``sigma_z`` index 0
    is ``|u>`` (+1) and index 1 is ``|d>`` (-1).  Degenerate eigenvalues are
    grouped into projectors by :meth:`outcomes`.
    """

    operator: Operator
    eigenvalues: np.ndarray
    eigenvectors: tuple[StateVector, ...]

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        vecs = np.column_stack([v.amplitudes for v in self.eigenvectors])
        gram = vecs.conj().T @ vecs
        if np.max(np.abs(gram - np.eye(gram.shape[0]))) > 1e-10:
            raise ValueError("eigenvectors are not orthonormal")
        recon = (vecs * vals) @ vecs.conj().T
        if np.max(np.abs(recon - self.operator.entries)) > 1e-10:
            raise ValueError("spectral decomposition does not reconstruct the operator")
        vals.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", tuple(self.eigenvectors))

    @classmethod
    def from_operator(cls, op: Operator) -> "ObservableSpec":
        if not op.is_hermitian():
            raise ValueError("observable must be hermitian")
        w, v = np.linalg.eigh(op.entries)
        order = np.argsort(-w, kind="stable")
        vecs = tuple(StateVector(op.layout, v[:, i]) for i in order)
        return cls(op, w[order], vecs)

    @classmethod
    def pauli(cls, axis: str, label: str = SYSTEM) -> "ObservableSpec":
        """``sigma_x``, ``sigma_y`` or ``sigma_z`` on a single qubit."""
        op = Operator.single(label, _PAULI[axis])
        if axis == "z":
            vecs = (StateVector.qubit(label, [1, 0]), StateVector.qubit(label, [0, 1]))
            return cls(op, np.array([1.0, -1.0]), vecs)
        return cls.from_operator(op)

    @property
    def layout(self) -> SubsystemLayout:
        return self.operator.layout

    def embedded(self, layout: SubsystemLayout) -> "ObservableSpec":
        """The same observable acting on a larger layout."""
        own = set(self.layout.labels)
        rest = SubsystemLayout(tuple(s for s in layout.subsystems if s[0] not in own))
        order = list(self.layout.labels) + list(rest.labels)
        dims = [layout.dims[layout.index(lab)] for lab in order]
        perm = [order.index(lab) for lab in layout.labels]
        vals, vecs = [], []
        for val, vec in zip(self.eigenvalues, self.eigenvectors):
            for j in range(rest.dim):
                e = np.zeros(rest.dim, dtype=complex)
                e[j] = 1.0
                t = np.kron(vec.amplitudes, e).reshape(dims).transpose(perm)
                vals.append(val)
                vecs.append(StateVector(layout, t.reshape(-1)))
        return ObservableSpec(embed(self.operator, layout), np.array(vals), tuple(vecs))

    def outcomes(self, tol: float = 1e-10) -> list[tuple[float, np.ndarray]]:
        """Distinct eigenvalues in spectral order, each with its projector."""
        cache = self.__dict__.setdefault("_outcome_cache", {})
        if tol not in cache:
            cache[tol] = self._group_outcomes(tol)
        return cache[tol]

    def _group_outcomes(self, tol: float) -> list[tuple[float, np.ndarray]]:
        groups: list[tuple[float, list[np.ndarray]]] = []
        for val, vec in zip(self.eigenvalues, self.eigenvectors):
            for g in groups:
                if abs(g[0] - val) <= tol:
                    g[1].append(vec.amplitudes)
                    break
            else:
                groups.append((float(val), [vec.amplitudes]))
        out = []
        for val, vs in groups:
            m = np.column_stack(vs)
            proj = m @ m.conj().T
            proj.setflags(write=False)
            out.append((val, proj))
        return out


def _require_normalized(psi: StateVector, name: str, tol: float = 1e-8):
    if abs(psi.norm - 1.0) > tol:
        raise NormalizationError(f"{name} has norm {psi.norm:.12g}", field=name, norm=psi.norm)


def born_probabilities(psi: StateVector, obs: ObservableSpec) -> np.ndarray:
    """``prob(a_k | psi) = <psi|P_k|psi>`` for each distinct outcome."""
    _require_normalized(psi, "psi")
    v = psi.amplitudes
    p = np.array([np.real(np.vdot(v, P @ v)) for _, P in obs.outcomes()])
    return np.clip(p, 0.0, None)


def abl_probabilities(psi_i: StateVector, psi_f: StateVector, obs: ObservableSpec) -> np.ndarray:
    """Probability of each outcome given both boundary states at the measurement time.

    ``|<psi_f|P_k|psi_i>|^2 / sum_j |<psi_f|P_j|psi_i>|^2``; for
    nondegenerate outcomes the numerator is
    ``|<psi_f|a_k>|^2 |<a_k|psi_i>|^2``.
    """
    _require_normalized(psi_i, "psi_i")
    _require_normalized(psi_f, "psi_f")
    num = _abl_weights(psi_i, psi_f, obs)
    den = num.sum()
    if den <= 1e-14:
        raise ImpossibleBoundaryPair(float(den))
    return num / den


def _abl_weights(psi_i, psi_f, obs):
    i, f = psi_i.amplitudes, psi_f.amplitudes
    return np.array([abs(np.vdot(f, P @ i)) ** 2 for _, P in obs.outcomes()])


def abl_marginal(psi_i: StateVector, finals: Sequence[StateVector], obs: ObservableSpec):
    """Outcome distribution averaged over a complete set of final states.

    Each final state is weighted by its probability of being found after the
    intermediate measurement, ``sum_j |<f|P_j|psi_i>|^2``.  For an
    orthonormal basis of finals this reproduces the Born probabilities.
    Returns ``(marginal, weights)``.
    """
    weights, rows = [], []
    for f in finals:
        w = _abl_weights(psi_i, f, obs)
        weights.append(w.sum())
        rows.append(w / w.sum() if w.sum() > 1e-14 else np.zeros_like(w))
    weights = np.array(weights)
    return weights @ np.array(rows), weights


def expectation_value(psi: StateVector, obs: ObservableSpec) -> float:
    _require_normalized(psi, "psi")
    v = psi.amplitudes
    val = np.vdot(v, obs.operator.entries @ v)
    if abs(val.imag) > 1e-10:
        raise ArithmeticError(f"expectation value has imaginary part {val.imag:.3e}")
    return float(val.real)


@dataclass(frozen=True)
class BoundaryAssignment:
    """Final boundary state chosen for a pointer.

    ``chosen_state`` indexes ``POINTER_STATES`` (0 = U, 1 = D).  In sampled
    mode ``draw`` is the uniform variate and ``probabilities`` the Born
    weights it was compared against.
    """

    pointer_label: str
    chosen_state: int
    mode: str
    rng_seed: int
    stream_index: int = 0
    probabilities: tuple[float, ...] = ()
    draw: float | None = None

    @property
    def state_name(self) -> str:
        return POINTER_STATES[self.chosen_state]


def _draw_index(probs: np.ndarray, seed: int, stream: int) -> tuple[int, float]:
    u = float(generator(seed, stream).random())
    idx = int(np.searchsorted(np.cumsum(probs), u, side="right"))
    return min(idx, len(probs) - 1), u


def assign_final_boundary(
    a: complex,
    b: complex,
    mode: str = "sampled",
    seed: int = 0,
    chosen: int | str | None = None,
    pointer_label: str = POINTER,
    stream_index: int = 0,
) -> BoundaryAssignment:
    """Pick the pointer's final state from its post-decoherence branches ``a|U> + b|D>``.

    Sampled mode selects U with probability ``|a|^2``; the pick is a
    deterministic function of ``(seed, stream_index)``.
    """
    probs = np.array([abs(a) ** 2, abs(b) ** 2])
    if abs(probs.sum() - 1.0) > 1e-10:
        raise NormalizationError(f"|a|^2+|b|^2 = {probs.sum():.15g}", field="a,b", norm=probs.sum())
    if mode == "fixed":
        if chosen is None:
            raise ValueError("fixed mode needs a chosen state")
        idx = POINTER_STATES.index(chosen) if isinstance(chosen, str) else int(chosen)
        if idx not in (0, 1):
            raise ValueError(f"chosen state {chosen!r} is not a pointer state")
        return BoundaryAssignment(pointer_label, idx, "fixed", seed, stream_index, tuple(probs))
    if mode != "sampled":
        raise ValueError(f"unknown assignment mode {mode!r}")
    idx, u = _draw_index(probs, seed, stream_index)
    return BoundaryAssignment(pointer_label, idx, "sampled", seed, stream_index, tuple(probs), u)


@dataclass(frozen=True)
class EnsembleSummary:
    trials: int
    count_U: int
    p_target: float

    @property
    def freq_U(self) -> float:
        return self.count_U / self.trials

    @property
    def band_4sigma(self) -> float:
        p = self.p_target
        return 4.0 * np.sqrt(p * (1.0 - p) / self.trials)

    @property
    def within_band(self) -> bool:
        return abs(self.freq_U - self.p_target) <= self.band_4sigma


def teleo_ensemble(a: complex, b: complex, trials: int, seed: int):
    """Independent sampled assignments, trial ``k`` on stream ``k``."""
    recs = [assign_final_boundary(a, b, "sampled", seed, stream_index=k) for k in range(trials)]
    count = sum(1 for r in recs if r.chosen_state == 0)
    return recs, EnsembleSummary(trials, count, abs(a) ** 2)


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    outcome: int
    pre_state: StateVector
    post_state: StateVector
    probabilities: np.ndarray
    assignment: BoundaryAssignment


def measure(psi: StateVector, obs: ObservableSpec, seed: int, stream: int = 0,
            pointer_label: str = POINTER) -> MeasurementRecord:
    """Ideal measurement whose outcome comes from a sampled final boundary."""
    probs = born_probabilities(psi, obs)
    idx, u = _draw_index(probs, seed, stream)
    _, P = obs.outcomes()[idx]
    post = StateVector(psi.layout, P @ psi.amplitudes, psi.time).normalized()
    asg = BoundaryAssignment(pointer_label, idx, "sampled", seed, stream, tuple(probs), u)
    return MeasurementRecord(idx, psi, post, probs, asg)


def measurement_chain(psi: StateVector, observables: Sequence[ObservableSpec], seed: int):
    """Sequential measurements, each with a fresh pointer; each outcome prepares the next input."""
    records = []
    for k, obs in enumerate(observables):
        rec = measure(psi, obs, seed, stream=k, pointer_label=f"{POINTER}{k + 1}")
        records.append(rec)
        psi = rec.post_state
    return records


def _preparation(phi) -> np.ndarray:
    v = np.asarray(phi, dtype=complex).reshape(2)
    n = np.linalg.norm(v)
    if abs(n ** 2 - 1.0) > 1e-10:
        raise NormalizationError(f"|c|^2+|d|^2 = {n ** 2:.15g}", field="phi", norm=n ** 2)
    return v


def _pointer_ket(index: int) -> np.ndarray:
    e = np.zeros(2, dtype=complex)
    e[index] = 1.0
    return e


def two_time_state(cfg: ToyModelConfig, assignment: BoundaryAssignment, phi, t: float,
                   eps_orth: float = EPS_ORTH) -> TwoState:
    """Full system-pointer-environment two-state at ``t >= t1`` (dense).

    History: the premeasured state coupled to the environment.  Destiny:
    ``|phi> (x) |chosen> (x) eps_chosen``, obtained by evolving
    ``|phi> |chosen> |env(0)>`` with the same interaction.
    """
    if t < cfg.t1:
        raise ValueError(f"t = {t} precedes t1 = {cfg.t1}")
    phi = _preparation(phi)
    dt = t - cfg.t1
    his = couple_environment_dense(premeasure(cfg), cfg.env, dt)
    des0 = StateVector(SA_LAYOUT, np.kron(phi, _pointer_ket(assignment.chosen_state)), cfg.t1)
    des = couple_environment_dense(des0, cfg.env, dt)
    return TwoState(his, des, eps_orth)


def two_time_reduction(cfg: ToyModelConfig, assignment: BoundaryAssignment, phi, t: float,
                       backend: str = "dense", eps_orth: float = EPS_ORTH) -> TwoStateMatrix:
    """Reduced system-pointer two-state after the chosen pointer state is fixed.

    For assignment U this is ``(a|u><phi| |U><U| + z*(t-t1) b|d><phi| |D><U|) / (a <phi|u>)``.
    ``backend='product'`` evaluates that expression with the closed-form
    ``z``; ``'dense'`` traces the full two-state.
    """
    if backend == "dense":
        return reduce(two_time_state(cfg, assignment, phi, t, eps_orth), (SYSTEM, POINTER))
    if backend != "product":
        raise ValueError(f"unknown backend {backend!r}")
    if t < cfg.t1:
        raise ValueError(f"t = {t} precedes t1 = {cfg.t1}")
    phi = _preparation(phi)
    z = kernels.correlation_product(cfg.env.couplings, cfg.env.polarizations, t - cfg.t1)
    amps = np.array([cfg.a, cfg.b])
    k = assignment.chosen_state
    other = 1 - k
    # <eps_chosen|eps_other>: z* for U, z for D
    coh = np.conj(z) if k == 0 else z
    overlap = amps[k] * np.conj(phi[k])
    if abs(overlap) <= eps_orth:
        raise NearOrthogonalBoundaries(abs(overlap), eps_orth)
    m = np.zeros((2, 2, 2, 2), dtype=complex)
    m[k, k, :, k] = amps[k] * phi.conj()
    m[other, other, :, k] = coh * amps[other] * phi.conj()
    return TwoStateMatrix(SA_LAYOUT, m.reshape(4, 4) / overlap)


def coherence_ratio(rho_sa: TwoStateMatrix, chosen: int) -> float:
    """Frobenius norm of the cross-branch pointer block over the chosen-branch block.

    Blocks are ``<other|rho|chosen>`` and ``<chosen|rho|chosen>`` in the
    pointer index.
    """
    t = rho_sa.as_tensor()
    diag = np.linalg.norm(t[:, chosen, :, chosen])
    off = np.linalg.norm(t[:, 1 - chosen, :, chosen])
    return float(off / diag)


def backward_two_state(assignment: BoundaryAssignment, phi, cfg: ToyModelConfig) -> TwoState:
    """System-pointer two-state at ``t0 = 0`` from the destiny ``|phi>|chosen>`` at ``t1``."""
    phi = _preparation(phi)
    his = StateVector(SA_LAYOUT, np.kron([cfg.a, cfg.b], READY), 0.0)
    des1 = StateVector(SA_LAYOUT, np.kron(phi, _pointer_ket(assignment.chosen_state)), cfg.t1)
    des0 = evolve(des1, system_pointer_hamiltonian(cfg.g), -cfg.t1)
    return TwoState(his, des0.with_time(0.0))


def backward_system_state(assignment: BoundaryAssignment, phi, cfg: ToyModelConfig) -> StateVector:
    """Destiny direction of the system at ``t0``, as a normalized ket.

    The system's reduced two-state at ``t0`` is rank one, ``|h><w|``; the
    returned ket is ``|w>``.
    """
    rho_s = reduce(backward_two_state(assignment, phi, cfg), (SYSTEM,))
    _, s, vh = np.linalg.svd(rho_s.entries)
    return StateVector(rho_s.layout, vh[0].conj(), 0.0)


def chained_two_state(cfg: ToyModelConfig, assignment: BoundaryAssignment, chi: StateVector,
                      t: float, second: str = "a2") -> TwoState:
    """Two-state after a second apparatus ``second`` measures the system in the same basis.

    Layout ``(s, a, e1..eN, second)``.  History: the decohered state, then a
    premeasurement of ``s`` by ``second``.  Destiny:
    ``chi (x) |chosen> (x) eps_chosen`` with ``chi`` on ``(s, second)``.
    """
    if chi.layout.labels != (SYSTEM, second):
        raise ValueError(f"chi must live on ({SYSTEM!r}, {second!r})")
    dt = t - cfg.t1
    first = couple_environment_dense(premeasure(cfg), cfg.env, dt)
    n_env = cfg.env.n
    layout = first.layout.concat(SubsystemLayout.qubits(second))
    psi = StateVector(layout, np.kron(first.amplitudes, READY), first.time)
    h2 = embed(Operator(SubsystemLayout.qubits(SYSTEM, second), system_pointer_hamiltonian(cfg.g).entries),
               layout)
    his = evolve(psi, h2, cfg.t1).with_time(t)
    eps = couple_environment_dense(
        StateVector(SA_LAYOUT, np.kron([1, 0], _pointer_ket(assignment.chosen_state)), cfg.t1),
        cfg.env, dt,
    ).amplitudes.reshape(2, 2, -1)[0, assignment.chosen_state]
    c = chi.amplitudes.reshape(2, 2)
    des = np.einsum("sb,a,e->saeb", c, _pointer_ket(assignment.chosen_state), eps)
    assert des.size == 2 ** (n_env + 3)
    return TwoState(his, StateVector(layout, des.reshape(-1), t))


@dataclass(frozen=True)
class SignalingResult:
    rotate_left: bool
    final: str
    probabilities: tuple[float, float]
    outcome: int | None
    note: str = field(default="")

    @property
    def outcome_label(self) -> str | None:
        return None if self.outcome is None else ("u_R", "d_R")[self.outcome]


SIGNALING_NOTE = (
    "The right-hand outcome is certain only because the final two-particle "
    "state is treated as known in advance. That knowledge is not available "
    "to any observer, so no signal can be sent."
)


def signaling_demo(rotate_left: bool, final: str = "fixed") -> SignalingResult:
    """ABL distribution for the right particle's sigma_z given both boundary states.

    Initial ``(|uu> + |dd>)/sqrt(2)``, optionally followed by a left flip
    ``u <-> d``.  With ``final='fixed'`` the final state is
    ``(|uu> + |ud>)/sqrt(2)``; with ``final='evolved_initial'`` it is the
    initial state after the optional flip.
    """
    layout = SubsystemLayout.qubits("L", "R")
    s = 1 / np.sqrt(2.0)
    psi_i = StateVector(layout, [s, 0, 0, s])
    if rotate_left:
        flip = embed(Operator.single("L", SIGMA_X), layout)
        psi_i = flip @ psi_i
    if final == "fixed":
        psi_f = StateVector(layout, [s, s, 0, 0])
    elif final == "evolved_initial":
        psi_f = psi_i
    else:
        raise ValueError(f"unknown final state option {final!r}")
    obs = ObservableSpec.pauli("z", "R").embedded(layout)
    p = abl_probabilities(psi_i, psi_f, obs)
    certain = np.flatnonzero(np.abs(p - 1.0) <= 1e-12)
    outcome = int(certain[0]) if certain.size else None
    note = SIGNALING_NOTE if outcome is not None else "No final-state knowledge: outcomes stay random."
    return SignalingResult(bool(rotate_left), final, (float(p[0]), float(p[1])), outcome, note)
