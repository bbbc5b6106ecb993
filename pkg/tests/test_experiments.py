import json
import math

import numpy as np
import pytest

from rescorr.experiments import (
    DEFAULT_CONFIGS,
    ConfigError,
    ExperimentConfig,
    ResultRow,
    default_config,
    expected_sensing_branches,
    load_config,
    rows_to_csv,
    rows_to_json,
    run_example1,
    run_example2,
    run_example3,
    run_experiment,
    run_sensing,
    sensing_measurement,
    sensing_state,
    summary,
    xn_identity_residuals,
)
from rescorr.linalg import dm


def _pick(rows, quantity, **params):
    out = [r for r in rows if r.quantity == quantity and all(dict(r.parameters).get(k) == str(v) for k, v in params.items())]
    assert len(out) == 1, (quantity, params, len(out))
    return out[0]


def test_result_row_residual():
    r = ResultRow("x", (("p", "0.1"),), "q", 1.25, 1.0, "pass")
    assert r.residual == pytest.approx(0.25)
    assert ResultRow("x", (), "q", 1.0).residual is None
    assert r.params_text() == "p=0.1"


def test_config_validation():
    ok = ExperimentConfig.from_dict(DEFAULT_CONFIGS["sensing"])
    assert ok.theta == (0.4, 0.9, 1.3, 2.0, 2.7)
    bad = [
        {"experiment": "example1", "p_grid": [0.1], "colour": "red"},
        {"experiment": "example1", "p_grid": [1.5]},
        {"experiment": "example1", "p_grid": []},
        {"experiment": "example9", "p_grid": [0.1]},
        {"p_grid": [0.1]},
        {"experiment": "example2", "noise": "pauli:px=0.1", "modes": ["partial"]},
        {"experiment": "example2", "noise": "pauli:px=0.1", "modes": ["full"], "noise_model": "burst"},
        {"experiment": "sensing", "alpha_grid": [0.1], "p": [0.5, 0.5], "theta": [0.1, 0.2], "modes": ["full"]},
        {"experiment": "sensing", "alpha_grid": [0.1], "p": [0.5, 0.2, 0.2], "theta": [0.1, 0.2], "modes": ["full"]},
        {"experiment": "example1", "p_grid": [0.1], "seed": 1.5},
        {"experiment": "example1", "p_grid": [0.1], "tol": 0},
        {"experiment": "example1", "p_grid": [0.1], "format": "xml"},
        {"experiment": "example1", "p_grid": ["high"]},
    ]
    for data in bad:
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(data)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict([1, 2])


def test_scalar_promoted_to_grid():
    cfg = ExperimentConfig.from_dict({"experiment": "example1", "p_grid": 0.25})
    assert cfg.p_grid == (0.25,)


def test_load_config(tmp_path):
    assert load_config("default", "example2") == default_config("example2")
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"experiment": "example1", "p_grid": [0.5], "seed": 3}))
    cfg = load_config(str(path))
    assert cfg.p_grid == (0.5,) and cfg.seed == 3
    assert cfg.measure == DEFAULT_CONFIGS["example1"]["measure"]
    assert load_config(str(path), "example1") == cfg
    with pytest.raises(ConfigError):
        load_config(str(path), "sensing")
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(path))
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / "missing.json"))
    with pytest.raises(ConfigError):
        load_config("default")


def test_example1_plus_state():
    rows = run_example1([0.0, 0.3], cycles=2)
    for p in ("0", "0.3"):
        for c in (1, 2):
            r = _pick(rows, "coherence", p=p, state="plus", cycles=c)
            assert r.value == pytest.approx(1, abs=1e-12)
            assert r.status == "pass"
    third = _pick(rows, "coherence", p="0.3", state="plus_i", cycles=3)
    assert third.status == "info" and third.residual > 1e-4
    assert summary(rows)["fail"] == 0


def test_example1_seeded_states_are_reproducible():
    a = run_example1([0.5], n_random_states=3, seed=11)
    b = run_example1([0.5], n_random_states=3, seed=11)
    assert rows_to_csv(a) == rows_to_csv(b)
    assert rows_to_csv(a) != rows_to_csv(run_example1([0.5], n_random_states=3, seed=12))


def test_example2_modes():
    for mode in ("full", "combined"):
        rows = run_example2("pauli:px=0.04,py=0.03,pz=0.03", mode)
        after = [r for r in rows if r.quantity == "coherence_after"]
        assert after and all(r.status == "pass" and r.residual < 1e-9 for r in after)
    ident = run_example2("pauli:px=0,py=0,pz=0", "combined")
    assert all((r.residual or 0) == pytest.approx(0, abs=1e-13) for r in ident)


def test_example2_exploratory_rows_have_no_verdict():
    rows = run_example2("amplitude_damping:gamma=0.1", "combined")
    assert {r.status for r in rows} == {"info"}
    rows = run_example2("pauli:px=0.04,py=0.03,pz=0.03", "full", noise_model="iid")
    assert {r.status for r in rows} == {"info"}
    assert max(r.residual for r in rows if r.quantity == "coherence_after") > 1e-3


def test_example3_surface_gauge():
    rows = run_example3("surface3", "IIIIXIIII", "gauge")
    assert _pick(rows, "negativity_before").value == pytest.approx(0.5)
    after = _pick(rows, "negativity_after")
    assert after.value == pytest.approx(0.5) and after.status == "pass"
    cert = _pick(rows, "certified")
    assert cert.status == "pass" and cert.note.split()[-1] in {"I", "X", "Y", "Z"}


def test_example3_min_weight_identity_class():
    rows = run_example3("rep3", "IXI", "min-weight")
    assert _pick(rows, "certified").note == "logical class I"
    assert summary(rows)["fail"] == 0


def test_example3_beyond_distance_is_expected_failure():
    rows = run_example3("rep3", "XXI", "min-weight")
    assert _pick(rows, "error_weight").status == "expected-failure"
    assert _pick(rows, "certified").status == "expected-failure"
    assert summary(rows)["fail"] == 0
    with pytest.raises(ValueError):
        run_example3("rep3", "XX", "gauge")


def test_sensing_rows():
    theta = (0.4, 0.9, 1.3, 2.0, 2.7)
    rows = run_sensing([0.0, 0.7], (0.5, 0.1, 0.1, 0.1, 0.1, 0.1), theta, "combined")
    assert summary(rows)["fail"] == 0
    assert _pick(rows, "expval_ideal", alpha="0.7").value == pytest.approx(math.cos(3.5))
    assert _pick(rows, "branch_count", alpha="0").value == 4
    full = run_sensing([0.3], (0.5, 0.1, 0.1, 0.1, 0.1, 0.1), theta, "full")
    assert _pick(full, "branch_count").value == 6
    assert summary(full)["fail"] == 0


def test_sensing_state_and_identity():
    psi = sensing_state(0.3)
    assert psi[0] == pytest.approx(1 / math.sqrt(2))
    assert psi[31] == pytest.approx(np.exp(1.5j) / math.sqrt(2))
    assert xn_identity_residuals() == [0.0] * 5


def test_expected_branches_group_bit_flips():
    p = (0.4, 0.1, 0.15, 0.1, 0.15, 0.1)
    theta = (0.4, 0.9, 1.3, 2.0, 2.7)
    want = expected_sensing_branches(sensing_state(0.2), p, theta, sensing_measurement("combined"))
    assert sorted(want) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    s2 = [p[k + 1] * math.sin(theta[k] / 2) ** 2 for k in range(5)]
    assert want[(1, 0)][0] == pytest.approx(s2[0])
    assert want[(0, 1)][0] == pytest.approx(s2[4])
    assert want[(1, 1)][0] == pytest.approx(s2[1] + s2[2] + s2[3])
    assert sum(w for w, _ in want.values()) == pytest.approx(1)


def test_writers_are_deterministic():
    cfg = default_config("sensing")
    rows = run_experiment(cfg)
    text = rows_to_csv(rows)
    assert text == rows_to_csv(run_experiment(cfg))
    header, first = text.splitlines()[:2]
    assert header == "experiment,parameters,quantity,value,reference,residual,status,note,seed"
    assert first.endswith(f",pass,,{cfg.seed}")
    doc = json.loads(rows_to_json(rows, cfg))
    assert doc["config"]["seed"] == cfg.seed
    assert len(doc["rows"]) == len(rows)
    r = ResultRow("x", (), "q", 1 / 3, 0.0, "info")
    assert rows_to_csv([r]).splitlines()[1] == "x,,q,0.333333333333,0,0.333333333333,info,,"
