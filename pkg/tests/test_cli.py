from __future__ import annotations

import json
import subprocess
import sys

import pytest

from qsc.cli import main


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["gen", "--system", "2q", "--noise", "ad", "--per-class", "12",
                 "--seed", "4", "--out", str(d / "d.jsonl")]) == 0
    assert main(["train", "--dataset", str(d / "d.jsonl"), "--maxiter", "15",
                 "--out", str(d / "m.json")]) == 0
    return d


def test_gen_rerun_from_embedded_config(workdir):
    assert main(["gen", "--config", str(workdir / "d.jsonl"), "--out", str(workdir / "d2.jsonl")]) == 0
    assert (workdir / "d.jsonl").read_bytes() == (workdir / "d2.jsonl").read_bytes()


def test_gen_threads_do_not_change_output(workdir, monkeypatch):
    monkeypatch.setenv("QSC_THREADS", "3")
    assert main(["gen", "--config", str(workdir / "d.jsonl"), "--out", str(workdir / "d3.jsonl")]) == 0
    assert (workdir / "d.jsonl").read_bytes() == (workdir / "d3.jsonl").read_bytes()


def test_train_rerun_and_loss_csv(workdir):
    assert (workdir / "m.loss.csv").read_text().startswith("iteration,loss\n")
    assert main(["train", "--config", str(workdir / "m.json"), "--out", str(workdir / "m2.json")]) == 0
    assert (workdir / "m.json").read_bytes() == (workdir / "m2.json").read_bytes()
    assert (workdir / "m.loss.csv").read_bytes() == (workdir / "m2.loss.csv").read_bytes()


def test_flag_overrides_config(workdir):
    assert main(["train", "--config", str(workdir / "m.json"), "--maxiter", "3",
                 "--out", str(workdir / "m3.json")]) == 0
    model = json.loads((workdir / "m3.json").read_text())
    assert model["config"]["maxiter"] == 3 and len(model["loss_trace"]) == 4


def test_key_value_config_file(workdir):
    cfg = workdir / "train.cfg"
    cfg.write_text(f"# comment\ndataset = {workdir / 'd.jsonl'}\nmax-iter = 1\nmaxiter = 2\nseed: 9\n")
    assert main(["train", "--config", str(cfg), "--out", str(workdir / "m4.json")]) == 0
    model = json.loads((workdir / "m4.json").read_text())
    assert model["config"]["maxiter"] == 2 and model["seed"] == 9


def test_eval_report_and_rerun(workdir, capsys):
    assert main(["eval", "--model", str(workdir / "m.json"), "--dataset", str(workdir / "d.jsonl"),
                 "--report", str(workdir / "r.json")]) == 0
    assert "accuracy" in capsys.readouterr().out
    report = json.loads((workdir / "r.json").read_text())
    assert report["split"] == "test" and report["num_test"] == 6
    assert sum(map(sum, report["confusion_matrix"])) == 6
    assert main(["eval", "--config", str(workdir / "r.json"), "--report", str(workdir / "r2.json")]) == 0
    assert (workdir / "r.json").read_bytes() == (workdir / "r2.json").read_bytes()
    assert (workdir / "r.txt").read_bytes() == (workdir / "r2.txt").read_bytes()


def test_landscape_and_rerun(workdir):
    out = workdir / "l.csv"
    assert main(["landscape", "--dataset", str(workdir / "d.jsonl"), "--grid", "5",
                 "--samples", "4", "--flatness-points", "10", "--out", str(out)]) == 0
    text = out.read_text()
    rows = [r for r in text.splitlines() if not r.startswith("#")]
    values = [float(v) for r in rows for v in r.split(",")]
    assert len(values) == 25 and all(0 <= v <= 1 for v in values)
    assert "# gradient_variance: " in text
    assert main(["landscape", "--config", str(out), "--out", str(workdir / "l2.csv")]) == 0
    assert out.read_bytes() == (workdir / "l2.csv").read_bytes()
    assert (workdir / "l.axis.csv").read_bytes() == (workdir / "l2.axis.csv").read_bytes()


def test_audit_pass_and_fault_injection(workdir, capsys):
    assert main(["audit", "--dataset", str(workdir / "d.jsonl")]) == 0
    lines = (workdir / "d.jsonl").read_text().splitlines(keepends=True)
    rec = json.loads(lines[16])
    assert rec["label"] == 1
    rec["params"][-1] += 0.3  # sample index 15 no longer reproduces its entropies
    lines[16] = json.dumps(rec) + "\n"
    bad = workdir / "bad.jsonl"
    bad.write_text("".join(lines))
    capsys.readouterr()
    assert main(["audit", "--dataset", str(bad)]) == 1
    assert "sample 15" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["gen", "--system", "2q", "--noise", "ad", "--per-class", "5", "--out", "x"],
    ["gen", "--system", "4q", "--noise", "ad", "--out", "x"],
    ["gen", "--noise", "ad", "--out", "x"],
    ["train", "--dataset", "does-not-exist.jsonl", "--out", "x"],
    ["train", "--out", "x"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2


def test_usage_error_on_mismatched_model(workdir, tmp_path):
    d3 = tmp_path / "d3q.jsonl"
    assert main(["gen", "--system", "3q", "--noise", "ad", "--per-class", "10", "--out", str(d3)]) == 0
    assert main(["eval", "--model", str(workdir / "m.json"), "--dataset", str(d3),
                 "--report", str(tmp_path / "r.json")]) == 2
    assert main(["train", "--dataset", str(workdir / "d.jsonl"), "--ansatz", "proposed",
                 "--out", str(tmp_path / "m.json")]) == 2


def test_corrupt_dataset_exit_2(workdir, tmp_path, capsys):
    data = (workdir / "d.jsonl").read_bytes()
    cut = tmp_path / "cut.jsonl"
    cut.write_bytes(data[: len(data) // 2])
    assert main(["audit", "--dataset", str(cut)]) == 2
    assert "byte offset" in capsys.readouterr().err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "qsc", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "qsc" in out.stdout
