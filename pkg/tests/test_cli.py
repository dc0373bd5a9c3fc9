import json
import subprocess
import sys

import numpy as np
import pytest

from landmarking.alignment import build_alignment, load_alignment, regularize_alignment
from landmarking.cli import run
from landmarking.data import load_dataset
from landmarking.graph import load_graph
from landmarking.landmark import gcls_select

from conftest import PATH3


@pytest.fixture
def pipeline(tmp_path):
    d = tmp_path
    assert run(["-q", "gen", "--kind", "swiss_roll", "--n", "60", "--seed", "1",
                "--out", str(d / "data.csv")]) == 0
    assert run(["-q", "graph", "--in", str(d / "data.csv"), "--k", "6",
                "--out", str(d / "graph.txt")]) == 0
    assert run(["-q", "align", "--in", str(d / "data.csv"), "--graph", str(d / "graph.txt"),
                "--method", "LE", "--out", str(d / "phi.txt")]) == 0
    return d


def test_full_pipeline(pipeline):
    d = pipeline
    assert run(["-q", "select", "--align", str(d / "phi.txt"), "--method", "gcls", "--L", "8",
                "--out", str(d / "sel.json")]) == 0
    assert run(["-q", "learn", "--align", str(d / "phi.txt"), "--labels", str(d / "data.csv"),
                "--landmarks", str(d / "sel.json"), "--out", str(d / "pred.csv")]) == 0
    pred = load_dataset(d / "pred.csv")
    truth = load_dataset(d / "data.csv")
    sel = json.loads((d / "sel.json").read_text())
    np.testing.assert_array_equal(pred.labels[:, sel["landmarks"]],
                                  truth.labels[:, sel["landmarks"]])
    assert pred.labels.shape == truth.labels.shape


def test_select_is_thin_wrapper(pipeline):
    d = pipeline
    for name in ("a.json", "b.json"):
        assert run(["-q", "select", "--align", str(d / "phi.txt"), "--method", "gcls",
                    "--L", "5", "--out", str(d / name)]) == 0
    assert (d / "a.json").read_bytes() == (d / "b.json").read_bytes()
    direct = gcls_select(regularize_alignment(load_alignment(d / "phi.txt")), 5)
    assert (d / "a.json").read_text() == direct.to_json() + "\n"


def test_align_matches_library(pipeline):
    d = pipeline
    a = build_alignment(load_dataset(d / "data.csv"), load_graph(d / "graph.txt"), "LE")
    np.testing.assert_array_equal(load_alignment(d / "phi.txt").matrix.toarray(),
                                  a.matrix.toarray())


@pytest.mark.parametrize("method,extra", [("maxmingeo", ["--graph", "graph.txt"]),
                                          ("approxdpp", ["--data", "data.csv"]),
                                          ("kmeans", ["--data", "data.csv"]),
                                          ("random", []), ("nystrom", []), ("mincond", [])])
def test_other_selectors(pipeline, method, extra):
    d = pipeline
    extra = [str(d / x) if x.endswith((".txt", ".csv")) else x for x in extra]
    assert run(["-q", "select", "--align", str(d / "phi.txt"), "--method", method, "--L", "4",
                "--seed", "3", "--out", str(d / "s.json")] + extra) == 0
    assert len(json.loads((d / "s.json").read_text())["landmarks"]) == 4


def test_missing_input_is_runtime_error(pipeline):
    assert run(["-q", "select", "--align", str(pipeline / "phi.txt"), "--method", "maxmingeo",
                "--L", "4", "--out", str(pipeline / "s.json")]) == 2


def test_bound_prints_hand_values(tmp_path, capsys):
    path = tmp_path / "psi.txt"
    path.write_text("0,0,2\n0,1,-1\n1,1,2\n1,2,-1\n2,2,2\n")
    assert run(["-q", "bound", "--align", str(path), "--landmarks", "0"]) == 0
    out = capsys.readouterr().out.split("\n")
    assert out[0] == "bound 4" and out[1] == "Q 4"


def test_missing_flag_is_usage_error(capsys):
    assert run(["select", "--method", "gcls"]) == 1
    err = capsys.readouterr().err
    assert "usage:" in err and "--align" in err


def test_unknown_flag_is_usage_error(capsys):
    assert run(["gen", "--kind", "grid2d", "--n", "9", "--out", "x", "--bogus", "1"]) == 1
    assert "--bogus" in capsys.readouterr().err


def test_runtime_error_exit_code(tmp_path, capsys):
    assert run(["gen", "--kind", "grid2d", "--n", "2", "--out", str(tmp_path / "x.csv")]) == 2
    assert "error" in capsys.readouterr().err


def test_config_echoed(tmp_path, caplog):
    import logging
    caplog.set_level(logging.INFO, logger="landmarking")
    run(["gen", "--kind", "grid2d", "--n", "9", "--out", str(tmp_path / "g.csv")])
    echoed = [r.getMessage() for r in caplog.records if "resolved configuration" in r.getMessage()]
    assert echoed and '"seed": 0' in echoed[0] and '"noise": 0.0' in echoed[0]


def test_bench_and_env_seed(tmp_path, monkeypatch):
    cfg = {"dataset": {"kind": "swiss_roll", "n": 60}, "k": 6, "methods": ["gcls", "random"],
           "landmark_counts": [5, 10], "trials": 2, "master_seed": 1, "timing": False}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert run(["-q", "bench", "--config", str(path), "--out", str(tmp_path / "a.json")]) == 0
    monkeypatch.setenv("BENCH_SEED", "9")
    assert run(["-q", "bench", "--config", str(path), "--out", str(tmp_path / "b.json")]) == 0
    a = json.loads((tmp_path / "a.json").read_text())
    b = json.loads((tmp_path / "b.json").read_text())
    assert a["config"]["master_seed"] == 1 and b["config"]["master_seed"] == 9
    assert run(["-q", "bench", "--config", str(path), "--out", str(tmp_path / "c.csv"),
                "--format", "csv"]) == 0
    assert len((tmp_path / "c.csv").read_text().splitlines()) == 5


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "landmarking", "--help"], capture_output=True,
                         text=True)
    assert out.returncode == 0 and "bound" in out.stdout
