"""Scenario files: strict JSON parsing and validation.

A scenario document looks like::

    {"kind": "toy_decoherence", "seed": 7, "backend": "product",
     "parameters": {"env": "primes:4", "times": {"start": 0, "stop": 10, "num": 201}}}

Complex numbers are written as a plain number or a ``[re, im]`` pair.  An
environment is either ``"primes:N"`` (N particles with ``alpha = beta =
1/sqrt(2)`` and couplings ``sqrt(p_k)``) or an object with keys ``n``,
``couplings`` (``"primes"``, a number or a list), and either ``alpha``/``beta``
or ``alphas``/``betas``.  Unknown keys anywhere are errors, and every error in
a document is reported together.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .decoherence import EnvironmentSpec, prime_root_couplings
from .errors import NormalizationError, ScenarioError
from .seeding import MASK64

KINDS = (
    "toy_decoherence",
    "two_time_reduction",
    "teleo_ensemble",
    "abl_table",
    "weak_sweep",
    "signaling_demo",
    "benchmark",
)
BACKENDS = ("dense", "product", "both")
NORM_TOL = 1e-8
TOP_KEYS = {"kind", "seed", "backend", "parameters"}
_H = 2 ** -0.5


@dataclass
class ScenarioConfig:
    kind: str
    parameters: dict[str, Any]
    seed: int = 0
    backend: str = "product"
    raw: dict[str, Any] = field(default_factory=dict, repr=False)

    def echo(self) -> dict[str, Any]:
        """Canonical JSON-ready form of the scenario as run."""
        return {
            "kind": self.kind,
            "seed": self.seed,
            "backend": self.backend,
            "parameters": _jsonable(self.raw.get("parameters", {})),
        }


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


class _Collector:
    def __init__(self):
        self.errors: list[Exception] = []

    def add(self, msg: str):
        self.errors.append(ValueError(msg))

    def norm(self, field_name: str, value: float):
        self.errors.append(NormalizationError(
            f"{field_name}: amplitudes not normalized (squared norm {value:.12g})",
            field=field_name, norm=value,
        ))


def _complex(v, where, errs):
    if isinstance(v, bool):
        errs.add(f"{where}: expected a number or [re, im], got a boolean")
        return None
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return complex(v[0], v[1])
    errs.add(f"{where}: expected a number or [re, im], got {v!r}")
    return None


def _complex_list(v, where, errs):
    if not isinstance(v, list) or not v:
        errs.add(f"{where}: expected a non-empty list of amplitudes")
        return None
    out = [_complex(x, f"{where}[{i}]", errs) for i, x in enumerate(v)]
    return None if any(x is None for x in out) else np.array(out)


def _number(v, where, errs, positive=False, integer=False):
    ok = isinstance(v, (int, float)) and not isinstance(v, bool)
    if integer:
        ok = ok and float(v).is_integer()
    if not ok:
        errs.add(f"{where}: expected {'an integer' if integer else 'a number'}, got {v!r}")
        return None
    if positive and not v > 0:
        errs.add(f"{where}: must be positive, got {v!r}")
        return None
    return int(v) if integer else float(v)


def _check_keys(obj, allowed, where, errs):
    if not isinstance(obj, dict):
        errs.add(f"{where}: expected an object")
        return False
    for k in obj:
        if k not in allowed:
            errs.add(f"{where}: unknown key {k!r}")
    return True


def _normalized_pair(p, errs, names=("a", "b"), default=(_H, _H)):
    vals = []
    for name, d in zip(names, default):
        vals.append(_complex(p.get(name, d), name, errs))
    if all(v is not None for v in vals):
        n2 = sum(abs(v) ** 2 for v in vals)
        if abs(n2 - 1.0) > NORM_TOL:
            errs.norm(",".join(names), n2)
            return None
        return tuple(v / np.sqrt(n2) for v in vals)
    return None


def _amplitudes(v, where, errs, size=None):
    arr = _complex_list(v, where, errs)
    if arr is None:
        return None
    if size is not None and arr.size != size:
        errs.add(f"{where}: expected {size} amplitudes, got {arr.size}")
        return None
    n2 = float(np.sum(np.abs(arr) ** 2))
    if abs(n2 - 1.0) > NORM_TOL:
        errs.norm(where, n2)
        return None
    return arr / np.sqrt(n2)


def parse_environment(v, errs, where="env") -> EnvironmentSpec | None:
    if isinstance(v, str):
        if v.startswith("primes:"):
            try:
                n = int(v.split(":", 1)[1])
            except ValueError:
                n = 0
            if n >= 1:
                return EnvironmentSpec.uniform(n)
        errs.add(f"{where}: shorthand must be 'primes:N' with N >= 1, got {v!r}")
        return None
    if not _check_keys(v, {"n", "couplings", "alpha", "beta", "alphas", "betas"}, where, errs):
        return None
    n = v.get("n")
    if "alphas" in v or "betas" in v:
        al = _complex_list(v.get("alphas"), f"{where}.alphas", errs)
        be = _complex_list(v.get("betas"), f"{where}.betas", errs)
        if al is None or be is None:
            return None
        if al.size != be.size:
            errs.add(f"{where}: alphas and betas differ in length")
            return None
        n = al.size if n is None else n
    else:
        if n is None:
            errs.add(f"{where}: needs 'n' or 'alphas'/'betas'")
            return None
        n = _number(n, f"{where}.n", errs, positive=True, integer=True)
        if n is None:
            return None
        a = _complex(v.get("alpha", _H), f"{where}.alpha", errs)
        b = _complex(v.get("beta", _H), f"{where}.beta", errs)
        if a is None or b is None:
            return None
        al, be = np.full(n, a), np.full(n, b)
    if al.size != n:
        errs.add(f"{where}: n = {n} but {al.size} amplitude pairs given")
        return None
    n2 = np.abs(al) ** 2 + np.abs(be) ** 2
    bad = np.flatnonzero(np.abs(n2 - 1.0) > NORM_TOL)
    for k in bad:
        errs.norm(f"{where}[{k}]", float(n2[k]))
    if bad.size:
        return None
    al, be = al / np.sqrt(n2), be / np.sqrt(n2)
    c = v.get("couplings", "primes")
    if c == "primes":
        g = prime_root_couplings(n)
    elif isinstance(c, (int, float)) and not isinstance(c, bool):
        g = np.full(n, float(c))
    elif isinstance(c, list) and len(c) == n and all(isinstance(x, (int, float)) for x in c):
        g = np.array(c, dtype=float)
    else:
        errs.add(f"{where}.couplings: expected 'primes', a number or {n} numbers")
        return None
    if np.any(g == 0):
        errs.add(f"{where}.couplings: must be nonzero")
        return None
    return EnvironmentSpec(g, al, be)


def _grid(v, where, errs, default):
    if v is None:
        v = default
    if isinstance(v, list):
        vals = [_number(x, f"{where}[{i}]", errs) for i, x in enumerate(v)]
        return None if any(x is None for x in vals) else np.array(vals)
    if not _check_keys(v, {"start", "stop", "num"}, where, errs):
        return None
    start = _number(v.get("start", 0.0), f"{where}.start", errs)
    stop = _number(v.get("stop", default["stop"]), f"{where}.stop", errs)
    num = _number(v.get("num", default["num"]), f"{where}.num", errs, positive=True, integer=True)
    if None in (start, stop, num):
        return None
    return np.linspace(start, stop, num)


def _observable(v, errs, where="observable"):
    if v in ("x", "y", "z"):
        return v
    if isinstance(v, dict) and _check_keys(v, {"matrix"}, where, errs):
        rows = v.get("matrix")
        if isinstance(rows, list) and rows and all(isinstance(r, list) and len(r) == len(rows) for r in rows):
            m = np.array([[_complex(x, where, errs) or 0 for x in r] for r in rows], dtype=complex)
            if np.max(np.abs(m - m.conj().T)) > 1e-12:
                errs.add(f"{where}: matrix is not hermitian")
                return None
            return m
    errs.add(f"{where}: expected 'x', 'y', 'z' or {{'matrix': [[...]]}}")
    return None


def _assignment(v, errs):
    v = {} if v is None else v
    if not _check_keys(v, {"mode", "state"}, "assignment", errs):
        return None
    mode = v.get("mode", "fixed")
    if mode not in ("fixed", "sampled"):
        errs.add(f"assignment.mode: expected 'fixed' or 'sampled', got {mode!r}")
        return None
    state = v.get("state", "U")
    if mode == "fixed" and state not in ("U", "D"):
        errs.add(f"assignment.state: expected 'U' or 'D', got {state!r}")
        return None
    if mode == "sampled" and "state" in v:
        errs.add("assignment.state: not allowed in sampled mode")
        return None
    return {"mode": mode, "state": state}


def _toy(p, errs):
    out = {}
    out["ab"] = _normalized_pair(p, errs)
    out["g"] = _number(p.get("g", 1.0), "g", errs, positive=True)
    if "env" not in p:
        errs.add("env: required")
    else:
        out["env"] = parse_environment(p["env"], errs)
    return out


def _parse_params(kind, p, errs):
    allowed = {
        "toy_decoherence": {"a", "b", "g", "env", "times"},
        "two_time_reduction": {"a", "b", "g", "env", "phi", "assignment", "delays", "threshold"},
        "teleo_ensemble": {"a", "b", "trials"},
        "abl_table": {"psi_i", "psi_f", "observable"},
        "weak_sweep": {"observable", "c_initial", "c_final", "sigmas", "grid"},
        "signaling_demo": {"rotate_left", "final"},
        "benchmark": {"n_min", "n_max", "repeats", "t"},
    }[kind]
    if not _check_keys(p, allowed, "parameters", errs):
        return {}
    if kind == "toy_decoherence":
        out = _toy(p, errs)
        out["times"] = _grid(p.get("times"), "times", errs, {"start": 0.0, "stop": 10.0, "num": 201})
        return out
    if kind == "two_time_reduction":
        out = _toy(p, errs)
        out["phi"] = _amplitudes(p.get("phi", [1, 0]), "phi", errs, size=2)
        out["assignment"] = _assignment(p.get("assignment"), errs)
        out["delays"] = _grid(p.get("delays"), "delays", errs, {"start": 0.0, "stop": 20.0, "num": 201})
        out["threshold"] = _number(p.get("threshold", 0.05), "threshold", errs, positive=True)
        return out
    if kind == "teleo_ensemble":
        out = {"ab": _normalized_pair(p, errs)}
        out["trials"] = _number(p.get("trials", 10000), "trials", errs, positive=True, integer=True)
        return out
    if kind == "abl_table":
        psi_i = _amplitudes(p.get("psi_i"), "psi_i", errs)
        psi_f = _amplitudes(p.get("psi_f"), "psi_f", errs)
        obs = _observable(p.get("observable", "z"), errs)
        if psi_i is not None and psi_f is not None and psi_i.size != psi_f.size:
            errs.add("psi_f: dimension differs from psi_i")
        return {"psi_i": psi_i, "psi_f": psi_f, "observable": obs}
    if kind == "weak_sweep":
        obs = _observable(p.get("observable", "z"), errs)
        out = {"observable": obs}
        out["c_initial"] = _amplitudes(p.get("c_initial"), "c_initial", errs)
        out["c_final"] = _amplitudes(p.get("c_final"), "c_final", errs)
        sig = p.get("sigmas", [1, 5, 20])
        if isinstance(sig, list) and sig:
            vals = [_number(s, f"sigmas[{i}]", errs, positive=True) for i, s in enumerate(sig)]
            out["sigmas"] = None if None in vals else vals
        else:
            errs.add("sigmas: expected a non-empty list")
        g = p.get("grid", {})
        if _check_keys(g, {"half_width", "n_points"}, "grid", errs):
            out["grid_half_width"] = _number(g.get("half_width", 8.0), "grid.half_width", errs, positive=True)
            out["grid_points"] = _number(g.get("n_points", 1 << 14), "grid.n_points", errs, positive=True,
                                         integer=True)
        return out
    if kind == "signaling_demo":
        rot = p.get("rotate_left", False)
        if not isinstance(rot, bool):
            errs.add("rotate_left: expected true or false")
        final = p.get("final", "fixed")
        if final not in ("fixed", "evolved_initial"):
            errs.add(f"final: expected 'fixed' or 'evolved_initial', got {final!r}")
        return {"rotate_left": rot, "final": final}
    out = {}
    out["n_min"] = _number(p.get("n_min", 4), "n_min", errs, positive=True, integer=True)
    out["n_max"] = _number(p.get("n_max", 14), "n_max", errs, positive=True, integer=True)
    out["repeats"] = _number(p.get("repeats", 5), "repeats", errs, positive=True, integer=True)
    out["t"] = _number(p.get("t", 0.7), "t", errs)
    if out["n_min"] and out["n_max"] and out["n_min"] > out["n_max"]:
        errs.add("n_min: exceeds n_max")
    return out


def validate(doc: Any) -> ScenarioConfig:
    errs = _Collector()
    if not _check_keys(doc, TOP_KEYS, "scenario", errs):
        raise ScenarioError(errs.errors)
    kind = doc.get("kind")
    if kind not in KINDS:
        errs.add(f"kind: unknown scenario kind {kind!r}")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= MASK64:
        errs.add(f"seed: expected an unsigned 64-bit integer, got {seed!r}")
    backend = doc.get("backend", "product")
    if backend not in BACKENDS:
        errs.add(f"backend: expected one of {BACKENDS}, got {backend!r}")
    params = doc.get("parameters", {})
    parsed = _parse_params(kind, params, errs) if kind in KINDS else {}
    if errs.errors:
        raise ScenarioError(errs.errors)
    return ScenarioConfig(kind, parsed, seed, backend, raw=doc)


def parse_scenario(text: str | bytes) -> ScenarioConfig:
    """Parse and validate a scenario document; raises ScenarioError listing every problem."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([ValueError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}")]) \
            from None
    return validate(doc)


def with_overrides(cfg: ScenarioConfig, seed: int | None = None, backend: str | None = None) -> ScenarioConfig:
    raw = dict(cfg.raw)
    if seed is not None:
        raw["seed"] = seed
    if backend is not None:
        raw["backend"] = backend
    return validate(raw)
