import json
import subprocess
import sys

import numpy as np
import pytest
from scipy.stats import binom

from dcgames import channels as ch
from dcgames import io
from dcgames.cli import dispatch, main
from dcgames.cones import equals_cone, halfspace, noiseless, nonpositive


def run(*argv):
    report, status = dispatch([str(a) for a in argv])
    return report, status


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(io.dumps(obj))
    return path


def hb(x):
    return -x * np.log2(x) - (1 - x) * np.log2(1 - x)


# -- demos --------------------------------------------------------------------

def test_demo_bsc_feedback():
    report, status = run("demo", "bsc-feedback", "--beta", 0.25)
    assert status == 0
    assert report["results"]["capacity"] == pytest.approx(1 - hb(0.25), abs=1e-3)
    assert report["results"]["informative"] is True


def test_demo_mail():
    report, status = run("demo", "mail", "--n", 10, "--k", 7, "--p", 0.1)
    res = report["results"]
    assert status == 0 and res["win"] and res["verified_paths"] == 1024
    assert res["constant_loss"] == pytest.approx(binom.cdf(6, 10, 0.9), abs=1e-12)
    report, status = run("demo", "mail", "--n", 200, "--k", 100, "--p", 0.3)
    assert status == 0 and report["results"]["constant_loss"] < 0.01


def test_demo_fano_pentagon_avcf():
    report, status = run("demo", "fano", "--L", 4, "--eps", 0.1)
    assert status == 0 and report["results"]["closed_form"] == pytest.approx(1.372508, abs=1e-6)
    assert abs(report["results"]["solver"] - 1.372508) < 2e-3
    report, status = run("demo", "pentagon")
    assert status == 0 and report["results"]["zero_error"] and all(report["results"]["wins"].values())
    report, status = run("demo", "avcf-dual")
    assert status == 0 and report["results"]["pentagon_dual_is_covering"]


def test_usage_errors_exit_2():
    for argv in ([], ["bogus"], ["demo"], ["demo", "mail", "--n", "x"], ["demo", "mail", "--wat"]):
        report, status = run(*argv)
        assert status == 2 and "error" in report
    report, status = run("demo", "mail", "--n", 3, "--k", 5)
    assert status == 2 and "InputError" in report["error"]


def test_reports_are_deterministic(tmp_path, capsys):
    out1 = tmp_path / "a.json"
    assert main(["demo", "fano", "--json", str(out1)]) == 0
    first = out1.read_bytes()
    assert main(["demo", "fano", "--json", str(out1)]) == 0
    assert out1.read_bytes() == first
    report = json.loads(out1.read_text())
    assert report["tolerance"] == 1e-9 and report["status"] == 0 and len(report["inputs_digest"]) == 64


def test_main_prints_json(capsys):
    assert main(["demo", "avcf-dual"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["results"]["union_dual_is_intersection"] is True


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dcgames", "demo", "fano", "--L", "2", "--eps", "0.05"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["closed_form"] == pytest.approx(1 - hb(0.05))


# -- cone commands ------------------------------------------------------------

def test_cone_commands(tmp_path):
    A = write(tmp_path, "A.json", io.cone_to_json(nonpositive(3)))
    B = write(tmp_path, "B.json", io.cone_to_json(halfspace([0.2, 0.3, 0.5])))
    report, status = run("cone", "dual", A)
    assert status == 0 and equals_cone(io.cone_from_json(report["results"]["cone"]), noiseless(3))
    report, status = run("cone", "contains", B, A)
    assert status == 0 and report["results"]["contains"]
    report, status = run("cone", "contains", A, B)
    assert status == 1 and len(report["results"]["witness"]) == 3
    assert run("cone", "member", B, "--portfolio", "1,-1,0")[1] == 0
    assert run("cone", "member", A, "--portfolio", "1,-1,0")[1] == 1
    assert run("cone", "informative", A)[1] == 1
    assert run("cone", "informative", write(tmp_path, "N.json", io.cone_to_json(noiseless(3))))[1] == 0
    report, status = run("cone", "op", "union", A, B)
    assert status == 0 and len(report["results"]["cone"]["cells"]) == 2
    report, status = run("cone", "op", "robustify", B, "--lam", 0.1)
    assert status == 0
    report, status = run("cone", "op", "semidirect", B, B)
    assert status == 0 and len(report["results"]["cone"]["alphabet"]) == 9
    assert run("cone", "op", "union", A)[1] == 2
    assert run("cone", "dual", tmp_path / "nope.json")[1] == 2


def test_capacity_and_entropy_commands(tmp_path):
    A = write(tmp_path, "A.json", io.cone_to_json(ch.bsc(0.11, feedback=True).cone(0)))
    report, status = run("capacity", A)
    assert status == 0 and report["results"]["capacity"] == pytest.approx(1 - hb(0.11), abs=1e-3)
    H = write(tmp_path, "H.json", io.cone_to_json(halfspace([0.5, 0.5])))
    report, status = run("entropy", H)
    assert status == 0 and report["results"]["entropy"] == pytest.approx(1.0) and report["results"]["certified"]
    report, status = run("entropy", "--generators", "1,-1")
    assert report["results"]["entropy"] == pytest.approx(1.0)
    report, status = run("entropy", A, "--method", "search_upper_bound", "--seed", 3)
    assert status == 0 and report["results"]["certified"] is False
    assert run("entropy")[1] == 2


def test_channel_build_command():
    report, status = run("channel", "build", "bsc", "--params", '{"beta": 0.1, "feedback": true}')
    assert status == 0
    W = io.channel_from_json(report["results"]["channel"])
    assert equals_cone(W.cone(0), ch.bsc(0.1, feedback=True).cone(0))
    assert run("channel", "build", "bsc", "--params", "{oops")[1] == 2


# -- game and source commands -------------------------------------------------

def test_game_pipeline(tmp_path):
    scheme = {
        "kind": "martingale",
        "model": {"type": "dmc", "rows": [[0.8, 0.2], [0.2, 0.8]]},
        "scheme": {"model": "dmc", "codewords": [["0", "0", "0"], ["1", "1", "1"]],
                   "decoder": {",".join(y): int(y.count("1") >= 2)
                               for y in (f"{a}{b}{c}" for a in "01" for b in "01" for c in "01")}},
    }
    report, status = run("game", "synth", write(tmp_path, "scheme.json", scheme))
    assert status == 0 and report["results"]["worst_case_error"] == pytest.approx(0.104)
    strat = write(tmp_path, "strat.json", report["results"]["strategy"])
    for eps, code in ((0.104 + 1e-6, 0), (0.10, 1)):
        spec = write(tmp_path, f"spec{code}.json",
                     {"channel": report["results"]["channel"], "n": 3, "L": 2, "eps": eps, "prefix_rule": False})
        rep, status = run("game", "verify", spec, strat)
        assert status == code and rep["results"]["verdict"] == ("win" if code == 0 else "lose")
    W = write(tmp_path, "W.json", io.channel_to_json(ch.bsc(0.2)))
    assert run("game", "feasible", W, "--n", 3, "--L", 2, "--eps", 0.104 + 1e-9)[1] == 0
    assert run("game", "feasible", W, "--n", 1, "--L", 2, "--eps", 0.1)[1] == 1
    assert run("game", "synth", write(tmp_path, "junk.json", {"model": {"type": "dmc"}}))[1] == 2


def test_source_commands():
    report, status = run("source", "synth", "--p", "0.9,0.1", "--n", 2, "--code", "00,01,10")
    assert status == 0 and report["results"]["error_probability"] == pytest.approx(0.01)
    assert run("source", "verify", "--p", "0.5,0.5", "--n", 3, "--code", "000,001,010,011,100,101,110",
               "--eps", 0.125 + 1e-6)[1] == 0
    assert run("source", "verify", "--p", "0.5,0.5", "--n", 3, "--code", "000,001,010,011,100,101,110",
               "--eps", 0.1)[1] == 1
    report, status = run("source", "sanov", "--a", "1,-1", "--gamma", 4, "--eps", 0.2, "--n", 4)
    assert status == 0 and report["results"]["size"] == 11
    report, status = run("source", "sanov", "--a", "1,-1", "--gamma", 4, "--eps", 0.2, "--n", 4, "--verify")
    assert status == 1 and report["results"]["verify"]["min_payoff"] == pytest.approx(-4.0)
    assert run("source", "synth", "--p", "0.5,0.5", "--n", 2, "--code", "02")[1] == 2
