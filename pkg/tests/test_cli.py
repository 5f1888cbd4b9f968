import json

import pytest

from botnet_rgg.harness.cli import EXIT_INFEASIBLE, EXIT_INVALID, EXIT_OK, main


@pytest.fixture
def graph_files(tmp_path):
    g, b = tmp_path / "g.txt", tmp_path / "b.txt"
    rc = main(["generate", "--n", "1500", "--d", "2", "--np", "10", "--k", "5", "--seed", "2",
               "--out", str(g), "--botnet", str(b), "--locations", str(tmp_path / "l.txt")])
    assert rc == EXIT_OK
    return g, b


def test_generate_is_seeded(tmp_path, graph_files):
    g, b = graph_files
    again = tmp_path / "again.txt"
    main(["generate", "--n", "1500", "--d", "2", "--np", "10", "--k", "5", "--seed", "2", "--out", str(again)])
    assert again.read_bytes() == g.read_bytes()
    assert len(b.read_text().split()) == 5


def test_detect_estimate_identify(tmp_path, graph_files, capsys):
    g, b = graph_files
    assert main(["detect", str(g), "--estimate-params"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["star"]["reject"] and out["estimated"]["d_hat"] == 2
    assert set(out) == {"estimated", "star", "distance"}

    assert main(["estimate", str(g)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["d_hat"] == 2

    sus = tmp_path / "sus.txt"
    assert main(["identify", str(g), "--k", "5", "--d", "2", "--suspects", str(sus)]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["p_source"] == "estimated"
    assert set(rep) >= {"threshold_used", "xi", "epsilon", "suspects", "topk_suspects"}
    assert sorted(int(v) for v in sus.read_text().split()) == rep["suspects"]


def test_calibrate_then_detect(tmp_path, graph_files, capsys):
    g, _ = graph_files
    cal = tmp_path / "cal.json"
    rc = main(["calibrate", "--n", "1500", "--d", "2", "--np", "10", "--replicates", "30",
               "--alpha", "0.05", "--seed", "9", "--out", str(cal)])
    assert rc == EXIT_OK
    tables = json.loads(cal.read_text())
    assert set(tables) == {"max_star", "avg_distance"}
    assert main(["detect", str(g), "--d", "2", "--calibration", str(cal)]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["star"]["threshold_source"] == "monte_carlo"
    assert out["distance"]["threshold_source"] == "monte_carlo"


def test_sweep_subcommands(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": [500], "d": [2], "np": [8], "k": [3], "replicates": 4, "seed": 1}))
    for cmd in ("power", "risk", "histogram"):
        out = tmp_path / f"{cmd}.csv"
        assert main([cmd, "--config", str(cfg), "--out", str(out)]) == EXIT_OK
        first = out.read_bytes()
        assert main([cmd, "--config", str(cfg), "--out", str(out), "--workers", "2"]) == EXIT_OK
        assert out.read_bytes() == first
    null_cfg = tmp_path / "null.json"
    null_cfg.write_text(json.dumps({"n": [500], "d": [2], "np": [8], "k": [0], "replicates": 3, "seed": 1}))
    assert main(["audit", "--config", str(null_cfg), "--out", str(tmp_path / "a.csv")]) == EXIT_OK


def test_exit_codes(tmp_path, graph_files):
    g, _ = graph_files
    assert main(["generate", "--n", "10", "--d", "2", "--r", "0.7", "--seed", "1"]) == EXIT_INFEASIBLE
    assert main(["generate", "--n", "10", "--d", "2", "--np", "20", "--seed", "1"]) == EXIT_INVALID
    assert main(["detect", str(tmp_path / "missing.txt"), "--d", "2"]) == EXIT_INVALID
    assert main(["detect", str(g)]) == EXIT_INVALID
    assert main(["detect", str(g), "--d", "2", "--test", "distance"]) == EXIT_INVALID
    bad = tmp_path / "bad.txt"
    bad.write_text("3 1\n0 0\n")
    assert main(["estimate", str(bad)]) == EXIT_INVALID
    assert main(["generate", "--n", "10"]) == EXIT_INVALID
    cfg = tmp_path / "far.json"
    cfg.write_text(json.dumps({"n": [100], "d": [40], "np": [10], "k": [3], "replicates": 2}))
    assert main(["power", "--config", str(cfg)]) == EXIT_INFEASIBLE
    cfg.write_text("{not json")
    assert main(["power", "--config", str(cfg)]) == EXIT_INVALID
