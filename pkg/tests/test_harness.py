import copy
import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from pssl import cli, harness
from pssl.errors import ConfigError, ResourceError
from pssl.mechanisms import utility_bound_check

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

ERM = {
    "learner": "erm",
    "params": {"m": 10, "alpha": 0.1},
    "concept_class": {"family": "thresh", "d": 3},
    "target": {"index": 4},
    "trials": 1,
    "root_seed": 0,
}


def parse(text: str) -> list[dict]:
    lines = text.splitlines()
    assert lines[0].startswith("# pssl-")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_single_erm_trial():
    rep = harness.run_experiment(harness.ExperimentConfig.from_dict(ERM))
    rows = parse(harness.trial_csv([rep]))
    assert len(rows) == 1 and rows[0]["error"] != ""
    assert rep.failure_fraction in (0.0, 1.0)


def test_rerun_is_byte_identical_and_threads_keep_order():
    raw = {**ERM, "trials": 12, "target": "random"}
    cfg = harness.ExperimentConfig.from_dict(raw)
    a = harness.trial_csv([harness.run_experiment(cfg)])
    b = harness.trial_csv([harness.run_experiment(harness.ExperimentConfig.from_dict(raw))])
    c = harness.trial_csv([harness.run_experiment(cfg, threads=4)])
    assert hashlib.sha256(a.encode()).digest() == hashlib.sha256(b.encode()).digest()
    assert a == c
    assert raw == {**ERM, "trials": 12, "target": "random"}


def test_failure_fraction_counts_errors_above_alpha():
    rep = harness.run_experiment(harness.ExperimentConfig.from_dict({**ERM, "trials": 30, "params": {"m": 2, "alpha": 0.05}}))
    assert rep.failures == sum(t.error > 0.05 for t in rep.trials)


def test_config_errors():
    for bad in ({**ERM, "learner": "oracle"}, {**ERM, "trials": 0}, {**ERM, "target": {"index": 99}},
                {k: v for k, v in ERM.items() if k != "concept_class"},
                {**ERM, "sweep": {"axis": "depth", "values": [1]}}):
        with pytest.raises(ConfigError):
            harness.ExperimentConfig.from_dict(bad)
    with pytest.raises(ConfigError):
        harness.ExperimentConfig.load("/nonexistent/config.json")


def test_missing_parameter_is_config_error():
    cfg = harness.ExperimentConfig.from_dict({**ERM, "params": {}})
    with pytest.raises(ConfigError):
        harness.run_experiment(cfg)


def test_resource_error_carries_trial_index():
    raw = {**ERM, "learner": "generic", "concept_class": {"family": "rect", "d": 2, "ell": 2},
           "params": {"alpha": 0.02, "beta": 0.2, "epsilon": 1.0, "m": 5, "n_unlabeled": 10}}
    cfg = harness.ExperimentConfig.from_dict(raw)
    with pytest.raises(ResourceError, match="trial 0"):
        harness.run_experiment(cfg)


def test_sweep_bound_column_matches_utility_bound():
    raw = json.loads((CONFIGS / "sweep_private_m.json").read_text())
    raw["trials"] = 300
    curve = harness.sample_complexity_curve(harness.ExperimentConfig.from_dict(raw))
    for m, b in zip(raw["sweep"]["values"], curve.bounds):
        assert b == utility_bound_check(9, 1.0, m, 0.25)
    fr = [r.failure_fraction for r in curve.reports]
    sig = [r.failure_sigma for r in curve.reports]
    for j in range(len(fr) - 1):
        assert fr[j + 1] <= fr[j] + 2 * math.hypot(sig[j], sig[j + 1])
    rows = parse(curve.csv())
    assert [int(r["value"]) for r in rows] == raw["sweep"]["values"]
    assert all(float(r["labeled_used_mean"]) == float(r["value"]) for r in rows)


def test_empty_sweep_gives_empty_table(tmp_path, capsys):
    raw = {**ERM, "sweep": {"axis": "m", "values": []}}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(raw))
    assert cli.main(["sweep", str(path), "--out-dir", str(tmp_path / "o")]) == 0
    rows = parse((tmp_path / "o" / "experiment_curve.csv").read_text())
    assert rows == []


def test_labeled_used_never_exceeds_configured_m():
    raw = json.loads((CONFIGS / "label_boost.json").read_text())
    raw["trials"] = 3
    cfg = harness.ExperimentConfig.from_dict(raw)
    rep = harness.run_experiment(cfg)
    assert all(t.labeled_used == harness.planned_labeled(cfg) for t in rep.trials)


def test_cli_exit_codes(tmp_path):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(ERM))
    assert cli.main(["run", str(good), "--out-dir", str(tmp_path / "o"), "--summary"]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["run", str(bad)]) == 2
    assert cli.main(["run", str(tmp_path / "missing.json")]) == 2
    assert cli.main(["vc", '{"family": "thresh", "d": 12}']) == 3
    assert cli.main(["vc", '{"family": "blob", "d": 2}']) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate", str(good)])
    assert exc.value.code == 2


def test_cli_overrides_and_outputs(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(ERM))
    out = tmp_path / "o"
    assert cli.main(["run", str(path), "--seed", "9", "--trials", "3", "--out-dir", str(out), "--threads", "2"]) == 0
    rows = parse((out / "experiment.csv").read_text())
    agg = json.loads((out / "experiment.json").read_text())
    assert len(rows) == 3 and agg["trials"] == 3
    assert [int(r["seed"]) for r in rows] == agg["seeds"]


def test_cli_vc(capsys):
    assert cli.main(["vc", str(CONFIGS / "vc_rect.json")]) == 0
    out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert out == {"class": "RECT_2^2", "cardinality": 101, "vc": 4, "vc_xor": 7}


def test_audit_config_is_deterministic(tmp_path):
    raw = json.loads((CONFIGS / "audit.json").read_text())
    raw["trials"] = 2000
    a = harness.audit_csv(harness.run_audits(raw))
    b = harness.audit_csv(harness.run_audits(copy.deepcopy(raw)))
    assert a == b
    rows = parse(a)
    assert [r["pair_id"] for r in rows] == ["rr", "em", "procedure"]


def test_audit_config_errors():
    with pytest.raises(ConfigError):
        harness.run_audits({"audits": [{"mechanism": "laplace"}]})
    with pytest.raises(ConfigError):
        harness.run_audits({"audits": [{"mechanism": "randomized_response"}]})


def test_fmt_is_stable():
    assert harness.fmt(0.1 + 0.2) == "0.3"
    assert harness.fmt(np.float64(1 / 3)) == "0.333333333333"
    assert harness.fmt(math.nan) == "nan"
