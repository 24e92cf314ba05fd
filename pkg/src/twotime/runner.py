"""Dispatch a validated scenario to the physics modules and collect a ResultSet.

Table schemas (column order is fixed):

============================  ==================================================
kind / table                  columns
============================  ==================================================
toy_decoherence / z_series    t, re_z, im_z, abs_z
toy_decoherence / agreement   t, abs_diff            (backend "both" only)
two_time_reduction / reduction  t, delay, abs_z, ratio, ratio_normalized
teleo_ensemble / trials       trial, stream_index, seed, draw, outcome
abl_table / abl               k, eigenvalue, born, abl
weak_sweep / weak             sigma, residual, pointer_mean, grid_mean, re_aw, im_aw
signaling_demo / abl          k, label, probability
benchmark / timing            n, dense_seconds, product_seconds, ratio
benchmark / kernels           n, n_times, compiled_seconds, python_seconds
============================  ==================================================

Time columns in ``z_series`` and ``delay`` are measured from the start of
the pointer-environment coupling.
"""
from __future__ import annotations

import platform
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any

import numpy as np

from . import __version__, bench, kernels
from .decoherence import (
    EnvironmentSpec,
    ToyModelConfig,
    correlation_series,
    time_averaged_overlap,
)
from .errors import NumericGuardError, TwoTimeError
from .measurement import (
    ObservableSpec,
    abl_probabilities,
    assign_final_boundary,
    born_probabilities,
    coherence_ratio,
    expectation_value,
    signaling_demo,
    teleo_ensemble,
    two_time_reduction,
)
from .qcore import Operator, StateVector, SubsystemLayout
from .scenario import ScenarioConfig
from .weakmeas import (
    WeakScenario,
    couple_pointer,
    grid_oracle,
    post_select_pointer,
    weak_value,
    weakness_residual,
)

SCHEMA_VERSION = 1
AGREEMENT_TOL = 1e-10
VOLATILE_PROVENANCE = ("created_at", "hostname")


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple]


@dataclass
class ResultSet:
    scenario: dict[str, Any]
    tables: dict[str, Table] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)
    provenance: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "summary": self.summary,
            "tables": {
                name: {"columns": list(t.columns), "rows": [list(r) for r in t.rows]}
                for name, t in self.tables.items()
            },
            "provenance": self.provenance,
        }


class RunError(TwoTimeError):
    """A module error raised while running a scenario, tagged with where it happened."""

    def __init__(self, kind: str, trial: int | None, cause: Exception):
        where = kind if trial is None else f"{kind} trial {trial}"
        super().__init__(f"{where}: {type(cause).__name__}: {cause}")
        self.kind = kind
        self.trial = trial
        self.cause = cause


def _obs_spec(obs, dim: int | None = None) -> ObservableSpec:
    if isinstance(obs, str):
        return ObservableSpec.pauli(obs)
    op = Operator(SubsystemLayout((("s", obs.shape[0]),)), obs)
    return ObservableSpec.from_operator(op)


def _toy_config(p) -> ToyModelConfig:
    a, b = p["ab"]
    return ToyModelConfig(a, b, p["env"], p["g"])


def _run_toy(cfg: ScenarioConfig, rs: ResultSet):
    p = cfg.parameters
    env: EnvironmentSpec = p["env"]
    times = p["times"]
    backend = cfg.backend
    z = correlation_series(env, times, "dense" if backend == "dense" else "product")
    if backend == "both":
        zd = correlation_series(env, times, "dense")
        diff = np.abs(zd - z)
        rs.tables["agreement"] = Table(("t", "abs_diff"), list(zip(times, diff)))
        rs.summary["max_backend_diff"] = float(diff.max())
        if diff.max() >= AGREEMENT_TOL:
            raise NumericGuardError(
                f"dense and product backends disagree by {diff.max():.3e} (tolerance {AGREEMENT_TOL:g})"
            )
    rs.tables["z_series"] = Table(
        ("t", "re_z", "im_z", "abs_z"), list(zip(times, z.real, z.imag, np.abs(z)))
    )
    rs.summary.update(
        n_env=env.n,
        t1=_toy_config(p).t1,
        time_average_abs_z2=time_averaged_overlap(env),
        z_first=[float(z[0].real), float(z[0].imag)],
        max_abs_z_after_start=float(np.abs(z[1:]).max()) if z.size > 1 else None,
    )


def _run_two_time(cfg: ScenarioConfig, rs: ResultSet):
    p = cfg.parameters
    toy = _toy_config(p)
    a, b = p["ab"]
    asg_p = p["assignment"]
    if asg_p["mode"] == "fixed":
        asg = assign_final_boundary(a, b, "fixed", cfg.seed, chosen=asg_p["state"])
    else:
        asg = assign_final_boundary(a, b, "sampled", cfg.seed)
    backends = ("dense", "product") if cfg.backend == "both" else (cfg.backend,)
    rows, max_diff = [], 0.0
    z = correlation_series(toy.env, p["delays"])
    ratio0 = None
    for delay, zk in zip(p["delays"], z):
        if delay < 0:
            raise ValueError(f"delay {delay} is negative")
        mats = [two_time_reduction(toy, asg, p["phi"], toy.t1 + delay, backend=bk) for bk in backends]
        if len(mats) == 2:
            max_diff = max(max_diff, float(np.abs(mats[0].entries - mats[1].entries).max()))
        r = coherence_ratio(mats[0], asg.chosen_state)
        if ratio0 is None:
            ratio0 = coherence_ratio(two_time_reduction(toy, asg, p["phi"], toy.t1, backend="product"),
                                     asg.chosen_state)
        rows.append((toy.t1 + delay, delay, abs(zk), r, r / ratio0 if ratio0 > 0 else 0.0))
    if cfg.backend == "both":
        rs.summary["max_backend_diff"] = max_diff
        if max_diff >= AGREEMENT_TOL:
            raise NumericGuardError(f"dense and product reductions disagree by {max_diff:.3e}")
    rs.tables["reduction"] = Table(("t", "delay", "abs_z", "ratio", "ratio_normalized"), rows)
    reduced = [r[1] for r in rows if r[4] < p["threshold"]]
    rs.summary.update(
        chosen_state=asg.state_name,
        assignment_mode=asg.mode,
        draw=asg.draw,
        t1=toy.t1,
        ratio_at_t1=ratio0,
        threshold=p["threshold"],
        first_reduced_delay=reduced[0] if reduced else None,
    )


def _run_teleo(cfg: ScenarioConfig, rs: ResultSet):
    a, b = cfg.parameters["ab"]
    recs, summ = teleo_ensemble(a, b, cfg.parameters["trials"], cfg.seed)
    rs.tables["trials"] = Table(
        ("trial", "stream_index", "seed", "draw", "outcome"),
        [(k, r.stream_index, r.rng_seed, r.draw, r.state_name) for k, r in enumerate(recs)],
    )
    rs.summary.update(
        trials=summ.trials,
        freq_U=summ.freq_U,
        p_target=summ.p_target,
        band_4sigma=summ.band_4sigma,
        within_band=summ.within_band,
    )


def _run_abl(cfg: ScenarioConfig, rs: ResultSet):
    p = cfg.parameters
    obs = _obs_spec(p["observable"])
    if obs.layout.dim != p["psi_i"].size:
        raise ValueError(f"observable dimension {obs.layout.dim} != state dimension {p['psi_i'].size}")
    psi_i = StateVector(obs.layout, p["psi_i"])
    psi_f = StateVector(obs.layout, p["psi_f"])
    born = born_probabilities(psi_i, obs)
    abl = abl_probabilities(psi_i, psi_f, obs)
    vals = [v for v, _ in obs.outcomes()]
    rs.tables["abl"] = Table(("k", "eigenvalue", "born", "abl"),
                             [(k, v, born[k], abl[k]) for k, v in enumerate(vals)])
    num = np.vdot(psi_f.amplitudes, obs.operator.entries @ psi_i.amplitudes)
    den = psi_f.inner(psi_i)
    rs.summary["expectation"] = expectation_value(psi_i, obs)
    if abs(den) > 1e-10:
        aw = num / den
        rs.summary.update(weak_value_re=float(aw.real), weak_value_im=float(aw.imag))
    else:
        rs.summary.update(weak_value_re=None, weak_value_im=None)


def _run_weak(cfg: ScenarioConfig, rs: ResultSet):
    p = cfg.parameters
    obs = _obs_spec(p["observable"])
    rows = []
    for s in p["sigmas"]:
        scn = WeakScenario(obs, p["c_initial"], p["c_final"], s)
        aw = weak_value(scn)
        ptr = post_select_pointer(couple_pointer(scn), scn)
        lo = ptr.centers.min() - p["grid_half_width"] * s
        hi = ptr.centers.max() + p["grid_half_width"] * s
        grid = grid_oracle(ptr, (lo, hi, p["grid_points"]))
        rows.append((s, weakness_residual(scn), ptr.mean(), grid.mean, aw.real, aw.imag))
    rs.tables["weak"] = Table(("sigma", "residual", "pointer_mean", "grid_mean", "re_aw", "im_aw"), rows)
    res = [r[1] for r in rows]
    rs.summary.update(
        weak_value=[rows[0][4], rows[0][5]],
        residual_nonincreasing=bool(all(x >= y for x, y in zip(res, res[1:]))),
    )


def _run_signaling(cfg: ScenarioConfig, rs: ResultSet):
    r = signaling_demo(cfg.parameters["rotate_left"], cfg.parameters["final"])
    rs.tables["abl"] = Table(("k", "label", "probability"),
                             [(0, "u_R", r.probabilities[0]), (1, "d_R", r.probabilities[1])])
    rs.summary.update(outcome=r.outcome_label, deterministic=r.outcome is not None, note=r.note)


def _run_benchmark(cfg: ScenarioConfig, rs: ResultSet):
    p = cfg.parameters
    ns = range(p["n_min"], p["n_max"] + 1)
    rows = bench.benchmark_backends(ns, p["repeats"], p["t"])
    rs.tables["timing"] = Table(("n", "dense_seconds", "product_seconds", "ratio"), rows)
    rs.tables["kernels"] = Table(("n", "n_times", "compiled_seconds", "python_seconds"),
                                 bench.benchmark_kernels())
    dense = [r[1] for r in rows]
    rs.summary.update(
        dense_time_increasing=bool(all(x < y for x, y in zip(dense[2:], dense[3:]))),
        ratio_at_n_max=rows[-1][3],
    )


_DISPATCH = {
    "toy_decoherence": _run_toy,
    "two_time_reduction": _run_two_time,
    "teleo_ensemble": _run_teleo,
    "abl_table": _run_abl,
    "weak_sweep": _run_weak,
    "signaling_demo": _run_signaling,
    "benchmark": _run_benchmark,
}


def run_scenario(cfg: ScenarioConfig) -> ResultSet:
    rs = ResultSet(scenario=cfg.echo())
    rs.provenance = {
        "seed": cfg.seed,
        "backend": cfg.backend,
        "version": __version__,
        "kernels": kernels.BACKEND,
        "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "hostname": platform.node(),
    }
    try:
        _DISPATCH[cfg.kind](cfg, rs)
    except NumericGuardError:
        raise
    except (TwoTimeError, ValueError, ArithmeticError) as exc:
        raise RunError(cfg.kind, None, exc) from exc
    return rs
