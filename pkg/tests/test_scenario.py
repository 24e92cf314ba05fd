import json

import numpy as np
import pytest

from twotime.errors import NormalizationError, ScenarioError
from twotime.scenario import parse_scenario, validate, with_overrides


def _doc(kind, **params):
    return {"kind": kind, "seed": 1, "parameters": params}


def test_minimal_toy_defaults():
    cfg = parse_scenario('{"kind": "toy_decoherence", "seed": 7, "parameters": {"env": "primes:4"}}')
    env = cfg.parameters["env"]
    np.testing.assert_allclose(env.couplings, np.sqrt([2, 3, 5, 7]))
    np.testing.assert_allclose(env.polarizations, 0, atol=1e-15)
    assert cfg.seed == 7 and cfg.backend == "product"
    assert cfg.parameters["times"].size == 201


def test_teleo_valid():
    r = 2 ** -0.5
    cfg = validate(_doc("teleo_ensemble", a=r, b=r, trials=10000))
    assert cfg.parameters["trials"] == 10000
    assert abs(cfg.parameters["ab"][0] - r) < 1e-15


def test_unnormalized_amplitudes_name_field():
    with pytest.raises(ScenarioError) as exc:
        validate(_doc("teleo_ensemble", a=1, b=1))
    norm = [e for e in exc.value.errors if isinstance(e, NormalizationError)]
    assert norm and norm[0].field == "a,b"


def test_all_errors_reported():
    doc = {"kind": "two_time_reduction", "seed": -1, "backend": "gpu", "extra": 1,
           "parameters": {"env": "primes:0", "phi": [1, 1], "typo": 3}}
    with pytest.raises(ScenarioError) as exc:
        validate(doc)
    text = "\n".join(str(e) for e in exc.value.errors)
    for needle in ("extra", "seed", "backend", "typo", "primes:N", "phi"):
        assert needle in text
    assert len(exc.value.errors) >= 6


def test_syntax_error_has_position():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario('{"kind": "abl_table",\n "seed": }')
    msg = str(exc.value.errors[0])
    assert "line 2" in msg and "column" in msg


def test_unknown_kind():
    with pytest.raises(ScenarioError) as exc:
        validate({"kind": "teleport"})
    assert "unknown scenario kind" in str(exc.value.errors[0])


def test_environment_object_forms():
    cfg = validate(_doc("toy_decoherence", env={"n": 3, "couplings": 0.5, "alpha": 0.6, "beta": 0.8}))
    env = cfg.parameters["env"]
    np.testing.assert_allclose(env.couplings, 0.5)
    np.testing.assert_allclose(env.polarizations, 0.36 - 0.64)
    cfg = validate(_doc("toy_decoherence", env={"alphas": [1, [0, 1]], "betas": [0, 0], "couplings": [1, 2]}))
    assert cfg.parameters["env"].n == 2
    with pytest.raises(ScenarioError) as exc:
        validate(_doc("toy_decoherence", env={"alphas": [1, 1], "betas": [0, 1]}))
    assert any(getattr(e, "field", None) == "env[1]" for e in exc.value.errors)


def test_complex_pairs_and_observable_matrix():
    r = 2 ** -0.5
    cfg = validate(_doc("abl_table", psi_i=[r, [0, r]], psi_f=[1, 0], observable={"matrix": [[0, 1], [1, 0]]}))
    assert cfg.parameters["psi_i"][1] == pytest.approx(1j * r)
    with pytest.raises(ScenarioError):
        validate(_doc("abl_table", psi_i=[1, 0], psi_f=[1, 0], observable={"matrix": [[0, 1], [0, 0]]}))
    with pytest.raises(ScenarioError):
        validate(_doc("abl_table", psi_i=[1, 0], psi_f=[1, 0, 0]))


def test_assignment_rules():
    base = dict(env="primes:2")
    validate(_doc("two_time_reduction", assignment={"mode": "sampled"}, **base))
    with pytest.raises(ScenarioError):
        validate(_doc("two_time_reduction", assignment={"mode": "sampled", "state": "U"}, **base))
    with pytest.raises(ScenarioError):
        validate(_doc("two_time_reduction", assignment={"mode": "fixed", "state": "X"}, **base))


def test_seed_range():
    validate({"kind": "signaling_demo", "seed": 2 ** 64 - 1})
    for bad in (2 ** 64, -1, 1.5, True):
        with pytest.raises(ScenarioError):
            validate({"kind": "signaling_demo", "seed": bad})


def test_overrides_revalidate():
    cfg = validate({"kind": "signaling_demo"})
    out = with_overrides(cfg, seed=9, backend="both")
    assert (out.seed, out.backend) == (9, "both")
    with pytest.raises(ScenarioError):
        with_overrides(cfg, backend="fast")


def test_echo_is_json_ready():
    cfg = validate(_doc("weak_sweep", c_initial=[1, 0], c_final=[0.6, 0.8], sigmas=[1, 2]))
    assert json.loads(json.dumps(cfg.echo()))["parameters"]["sigmas"] == [1, 2]


def test_benchmark_bounds():
    with pytest.raises(ScenarioError):
        validate(_doc("benchmark", n_min=10, n_max=4))
