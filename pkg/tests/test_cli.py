"""CLI dispatch, flags, exit codes, and output files."""

import json

import numpy as np
import pytest

from hullwalk.cli import dispatch
from hullwalk.traceio import read_summary, read_trace, strip_volatile


def test_k_constraint_rejected_with_message(capsys):
    code = dispatch(["walk", "--d", "2", "--k", "0", "--steps", "10"])
    assert code == 2
    assert "k must be >= d-1" in capsys.readouterr().err


def test_unknown_flag_exits_2(capsys):
    code = dispatch(["walk", "--bogus-flag", "1"])
    assert code == 2
    assert "usage" in capsys.readouterr().err.lower()


def test_unknown_subcommand_exits_2():
    assert dispatch(["frobnicate"]) == 2


def test_help_exits_zero():
    assert dispatch(["--help"]) == 0


def test_walk_writes_trace(tmp_path, capsys):
    out = tmp_path / "trace.jsonl"
    code = dispatch(["walk", "--d", "2", "--k", "1", "--steps", "200",
                     "--seed", "9", "--out", str(out)])
    assert code == 0
    recs = read_trace(out)
    assert len(recs) == 201
    assert recs[0].x == (0.0, 0.0)


def test_walk_csv_format(tmp_path):
    out = tmp_path / "trace.csv"
    code = dispatch(["walk", "--d", "3", "--k", "2", "--steps", "50",
                     "--seed", "9", "--out", str(out), "--format", "csv"])
    assert code == 0
    assert out.read_text().splitlines()[0] == "n,x0,x1,x2,theta,proposals"


def test_speed_summary(tmp_path):
    out = tmp_path / "s.json"
    code = dispatch(["speed", "--d", "2", "--k", "1", "--steps", "5000",
                     "--replicas", "4", "--seed", "2", "--out", str(out)])
    assert code == 0
    doc = read_summary(out)
    v = doc["results"]["speed"]["v_hat"]
    assert 0.05 < v < 0.14
    assert doc["config"]["sampler"] == "direct2d"


def test_angle_chain_reports_ks(tmp_path):
    out = tmp_path / "a.json"
    code = dispatch(["angle-chain", "--n", "20000", "--seed", "1",
                     "--out", str(out)])
    assert code == 0
    doc = read_summary(out)
    assert doc["results"]["ks_distance"] < 0.02
    assert doc["results"]["speed_closed_form"] == pytest.approx(
        0.09006327434874468, abs=1e-15)


def test_renewal_summary(tmp_path):
    out = tmp_path / "r.json"
    code = dispatch(["renewal", "--d", "2", "--k", "1", "--steps", "1",
                     "--blocks", "20000", "--seed", "3", "--out", str(out)])
    assert code == 0
    doc = read_summary(out)
    assert doc["results"]["n_renewals"] > 0
    assert doc["results"]["alpha"] == pytest.approx(0.01)


def test_threads_env_override(tmp_path, monkeypatch):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    dispatch(["speed", "--d", "2", "--k", "1", "--steps", "3000",
              "--replicas", "4", "--seed", "5", "--threads", "1",
              "--out", str(out1)])
    monkeypatch.setenv("HULLWALK_THREADS", "3")
    dispatch(["speed", "--d", "2", "--k", "1", "--steps", "3000",
              "--replicas", "4", "--seed", "5", "--threads", "1",
              "--out", str(out2)])
    a, b = read_summary(out1), read_summary(out2)
    assert strip_volatile(a) == strip_volatile(b)


def test_partial_trace_flushed_on_sampler_stall(tmp_path, monkeypatch):
    import hullwalk.cli as climod
    from hullwalk import SamplerStall, WalkConfig, run

    partial = run(WalkConfig(d=2, k=1, steps=100, seed=1, trace_thin=1))

    def boom(cfg):
        raise SamplerStall("forced stall", partial=partial)

    monkeypatch.setattr(climod, "run", boom)
    out = tmp_path / "t.jsonl"
    code = dispatch(["walk", "--d", "2", "--k", "1", "--steps", "100",
                     "--out", str(out)])
    assert code == 3
    assert out.exists()
    assert len(read_trace(out)) == 101


def test_summary_config_echo_reruns_identically(tmp_path):
    out1 = tmp_path / "a.json"
    dispatch(["speed", "--d", "2", "--k", "1", "--steps", "4000",
              "--replicas", "3", "--seed", "11", "--out", str(out1)])
    doc = read_summary(out1)
    cfg = doc["config"]
    out2 = tmp_path / "b.json"
    dispatch(["speed", "--d", str(cfg["d"]), "--k", str(cfg["k"]),
              "--steps", str(cfg["steps"]), "--replicas", "3",
              "--seed", str(cfg["seed"]), "--out", str(out2)])
    assert (strip_volatile(read_summary(out1))
            == strip_volatile(read_summary(out2)))
