import json

import pytest

from luciopt.cli import EXIT_INFEASIBLE, EXIT_INVALID, EXIT_OK, main


def run(*argv):
    return main([str(a) for a in argv])


def test_pipeline(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    assert run("sample", "--d", 5, "--qubit-rate", 0.02, "--coupler-rate", 0.02, "--seed", 3, "--out", cfg) == EXIT_OK
    assert json.loads(cfg.read_text())["d"] == 5
    assert (tmp_path / "cfg.json.manifest.json").exists()

    diag = tmp_path / "default.luci"
    assert run("build", cfg, "--out", diag, "--report-distance") == EXIT_OK
    dist = json.loads(capsys.readouterr().out)["distance"]
    assert set(dist) == {"X", "Z"}

    opt = tmp_path / "opt.luci"
    summary = tmp_path / "summary.json"
    assert run("optimize", cfg, "--time-limit", 20, "--work-limit", 5, "--out", opt,
               "--summary-out", summary) == EXIT_OK
    res = json.loads(summary.read_text())
    res = res[0] if isinstance(res, list) else res
    assert res["status"] in ("optimal", "feasible")

    out = tmp_path / "analysis.json"
    cdf = tmp_path / "cdf.csv"
    assert run("analyze", opt, "--volumes", "--frequencies", "--paths", "--cycles", 2,
               "--out", out, "--cdf-out", cdf) == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep
    assert cdf.read_text().splitlines()[0] == "volume,count_at_least"

    txt = tmp_path / "opt.txt"
    assert run("render", opt, "--out", txt) == EXIT_OK
    assert "board 0" in txt.read_text()
    svg = tmp_path / "opt.svg"
    assert run("render", opt, "--format", "svg", "--out", svg) == EXIT_OK
    assert svg.read_text().startswith("<svg")

    stim_txt = tmp_path / "opt.stim"
    assert run("export", opt, "--cycles", 2, "--noise", "si1000:0.001", "--out", stim_txt) == EXIT_OK
    assert "DETECTOR" in stim_txt.read_text()

    assert run("replay", str(opt) + ".manifest.json") == EXIT_OK


def test_sample_ensemble(tmp_path):
    out = tmp_path / "ens"
    assert run("sample", "--d", 3, "--qubit-rate", 0.05, "--coupler-rate", 0.05, "--seed", 10,
               "--count", 3, "--out", out) == EXIT_OK
    names = sorted(p.name for p in out.iterdir())
    assert names == ["config_00010.json", "config_00011.json", "config_00012.json"]


def test_invalid_inputs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert run("build", bad, "--out", tmp_path / "x.luci") == EXIT_INVALID
    assert run("sample", "--d", 3, "--qubit-rate", 2, "--coupler-rate", 0, "--out", tmp_path / "y.json") == EXIT_INVALID
    assert run("render", tmp_path / "missing.luci") == EXIT_INVALID
    assert run("frobnicate") == EXIT_INVALID


def test_infeasible_exit_code(tmp_path):
    cfg = tmp_path / "neg.json"
    cfg.write_text(json.dumps({"d": 5, "broken_qubits": [],
                               "broken_couplers": [[[4, 4], [5, 5]], [[5, 5], [6, 6]]]}))
    assert run("optimize", cfg, "--rounds", 3, "--feasibility", "--time-limit", 60) == EXIT_INFEASIBLE


def test_replay_detects_tampering(tmp_path):
    diag = tmp_path / "c.luci"
    assert run("build", "--d", 3, "--out", diag) == EXIT_OK
    man = str(diag) + ".manifest.json"
    assert run("replay", man) == EXIT_OK
    data = json.loads(open(man).read())
    data["outputs"][str(diag)] = "0" * 64
    with open(man, "w") as fh:
        json.dump(data, fh)
    assert run("replay", man) == EXIT_INVALID
