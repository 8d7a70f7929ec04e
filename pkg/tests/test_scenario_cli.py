"""Scenario schema/validation and the CLI front-end."""

import filecmp
import json
import os

import pytest

from mlvsim import cli, io, scenario as scen
from mlvsim.scenario import InvalidScenario, paper_preset


# -- preset and schema ------------------------------------------------------

def test_paper_preset_shape():
    s = paper_preset()
    assert s.name == "paper-s5"
    assert s.horizon_events == 1_000_000
    assert len(s.models) == 6
    pool = s.build_nodes()
    assert [n.id for n in pool] == ["edge-ml-1", "edge-ml-2", "regional-ml",
                                    "central-ml"]
    assert all(spec["role"] == "oran" for spec in s.nodes
               if spec["id"].startswith("edge-oran"))
    assert sorted(s.policies) == ["always", "load_based", "never", "random",
                                  "rl"]
    assert s.seeds == list(range(1, 11))


def test_preset_digest_stable():
    assert paper_preset().digest() == paper_preset().digest()
    assert paper_preset().digest() != paper_preset(events=500).digest()


def test_preset_no_semantic_warnings():
    assert scen.semantic_warnings(paper_preset()) == []


def test_save_load_roundtrip(tmp_path):
    s = paper_preset(events=1_000)
    path = tmp_path / "scenario.yaml"
    s.save(path)
    loaded = scen.load(path)
    assert loaded.digest() == s.digest()


def diag_of(raw):
    with pytest.raises(InvalidScenario) as err:
        scen.from_dict(raw)
    return err.value.diagnostics


def test_unknown_top_level_key():
    raw = paper_preset(events=100).canonical()
    raw["frobnicate"] = 1
    assert any("frobnicate: unknown key" in d for d in diag_of(raw))


def test_negative_cpu_names_field():
    raw = paper_preset(events=100).canonical()
    raw["nodes"][0]["cpu"] = -4
    assert any("nodes[0].cpu" in d for d in diag_of(raw))


def test_unknown_node_key_and_bad_layer():
    raw = paper_preset(events=100).canonical()
    raw["nodes"][0]["gpu"] = 2
    raw["nodes"][1]["layer"] = "space"
    diags = diag_of(raw)
    assert any("nodes[0].gpu: unknown key" in d for d in diags)
    assert any("nodes[1].layer" in d for d in diags)


def test_model_validation():
    raw = paper_preset(events=100).canonical()
    del raw["models"][0]["accuracy"]
    raw["models"][1]["service_time_ms"] = [100.0]
    diags = diag_of(raw)
    assert any("models[0].accuracy: required" in d for d in diags)
    assert any("models[1].service_time_ms" in d for d in diags)


def test_missing_horizon_and_bad_policy():
    raw = paper_preset(events=100).canonical()
    raw["horizon"] = {}
    raw["policies"]["sometimes"] = {}
    diags = diag_of(raw)
    assert any("horizon" in d for d in diags)
    assert any("policies.sometimes" in d for d in diags)


def test_semantic_warning_for_oversized_model(tmp_path):
    raw = paper_preset(events=100).canonical()
    raw["nodes"] = [n for n in raw["nodes"]
                    if n["id"].startswith(("edge-ml", "edge-oran"))]
    warnings = scen.semantic_warnings(scen.from_dict(raw))
    assert any("ML-r1" in w for w in warnings)  # 48 GB fits no 32 GB node


# -- CLI --------------------------------------------------------------------

def run_cli(*argv):
    return cli.main(list(argv))


def test_validate_preset(capsys):
    assert run_cli("validate", "--preset", "paper-s5") == 0
    assert "ok: scenario 'paper-s5'" in capsys.readouterr().out


def test_validate_bad_file(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("horizon: {events: 10}\nmodels: []\nnodes: []\n")
    assert run_cli("validate", "--scenario", str(path)) == 1
    assert "error:" in capsys.readouterr().err


def test_run_summarize_plot_data(tmp_path, capsys):
    out = tmp_path / "out"
    rc = run_cli("run", "--preset", "paper-s5", "--events", "20000",
                 "--policies", "always,never", "--seeds", "1,2",
                 "--out", str(out))
    assert rc == 0
    for policy in ("always", "never"):
        for seed in (1, 2):
            assert (out / io.trace_filename(policy, seed)).exists()
            assert (out / io.policy_log_filename(policy, seed)).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["policies"] == ["always", "never"]
    assert manifest["seeds"] == [1, 2]
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary["policies"]) == {"always", "never"}
    never_ci = summary["policies"]["never"]["ci"]["o3"]
    assert never_ci["mean"] == 1.0 and never_ci["half_width"] == 0.0
    capsys.readouterr()

    # summarize rebuilds the aggregates in place.
    summary_text = (out / "summary.json").read_text()
    assert run_cli("summarize", "--out", str(out)) == 0
    assert (out / "summary.json").read_text() == summary_text

    capsys.readouterr()
    assert run_cli("plot-data", "--out", str(out)) == 0
    plot = capsys.readouterr().out
    assert plot.splitlines()[0].startswith("policy,app_class,n,mean")
    assert any(line.startswith("always,dApp,") for line in plot.splitlines())


def test_run_refuses_nonempty_out(tmp_path, capsys):
    out = tmp_path / "out"
    out.mkdir()
    (out / "stale.txt").write_text("x")
    rc = run_cli("run", "--preset", "paper-s5", "--events", "1000",
                 "--policies", "never", "--seeds", "1", "--out", str(out))
    assert rc == 2
    assert "not empty" in capsys.readouterr().err


def test_rerun_byte_identical(tmp_path):
    args = ("run", "--preset", "paper-s5", "--events", "20000",
            "--policies", "never,rl", "--seeds", "3")
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run_cli(*args, "--out", str(out1)) == 0
    assert run_cli(*args, "--out", str(out2)) == 0
    names = sorted(os.listdir(out1))
    assert names == sorted(os.listdir(out2))
    match, mismatch, errors = filecmp.cmpfiles(out1, out2, names,
                                               shallow=False)
    assert mismatch == [] and errors == []


def test_out_dir_from_environment(tmp_path, monkeypatch):
    out = tmp_path / "env-out"
    monkeypatch.setenv("MLVSIM_OUT_DIR", str(out))
    rc = run_cli("run", "--preset", "paper-s5", "--events", "1000",
                 "--policies", "never", "--seeds", "1")
    assert rc == 0
    assert (out / io.trace_filename("never", 1)).exists()


def test_unknown_preset(capsys):
    assert run_cli("validate", "--preset", "nope") == 1
    assert "unknown preset" in capsys.readouterr().err
