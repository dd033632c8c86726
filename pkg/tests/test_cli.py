import json

import pytest

from artifact.cli import EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_IO, EXIT_OK, main


def run(*args):
    return main([str(a) for a in args])


def test_generate_examples(tmp_path, capsys):
    assert run("generate", "--model", "ddelta2", "--delta", "4,3,2", "--out", tmp_path / "a") == EXIT_OK
    meta = json.loads((tmp_path / "a" / "graph.json").read_text())
    assert meta["nodes"] == 18 and len(meta["planted"]) == 2
    assert run("generate", "--model", "gnp", "--n", 4, "--p", 1, "--out", tmp_path / "b") == EXIT_OK
    assert len((tmp_path / "b" / "edges.csv").read_text().splitlines()) == 1 + 6
    assert run("generate", "--model", "pa", "--n", 1000, "--m", 2, "--out", tmp_path / "c") == EXIT_OK
    assert json.loads((tmp_path / "c" / "graph.json").read_text())["edges"] == 2 * (1000 - 3) + 3


def test_olap_reports_k(tmp_path, capsys):
    assert run("olap", "--epsilon", 0.1, "--delta", 0.05, "--cardinality", 2, "--out", tmp_path) == EXIT_OK
    assert "k = 600" in capsys.readouterr().out


def test_olap_unit_file_exact(tmp_path, capsys):
    p = tmp_path / "t.csv"
    p.write_text("channel,sa\nCNN,1\nPBS,1\nCNN,1\n")
    assert run("olap", "--tuples", p, "--dim", "channel", "--measure", "sa", "--k", 10, "--out", tmp_path / "o") == 0
    recs = [json.loads(x) for x in (tmp_path / "o" / "density.jsonl").read_text().splitlines()]
    est = {r["value"]: r["density"] for r in recs if r["kind"] == "estimate"}
    assert est == pytest.approx({"CNN": 2 / 3, "PBS": 1 / 3})


def test_olap_unknown_value_and_other_bucket(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("channel,sa\nCNN,1\nBBC,1\n")
    base = ("olap", "--tuples", p, "--dim", "channel", "--measure", "sa", "--k", 5, "--values", "CNN")
    assert run(*base, "--out", tmp_path / "a") != EXIT_OK
    assert run(*base, "--other", "--out", tmp_path / "b") == EXIT_OK


def test_detect_and_integrate(tmp_path):
    assert run("generate", "--model", "tweets", "--records", 1500, "--out", tmp_path / "t") == EXIT_OK
    tweets = tmp_path / "t" / "tweets.jsonl"
    for seed in (1, 2):
        assert run("detect", "--tweets", tweets, "--exclude-tag", "#onpc", "--seed", seed,
                   "--out", tmp_path / f"d{seed}") == EXIT_OK
    d1 = tmp_path / "d1"
    assert (d1 / "snapshots.jsonl").exists() and (d1 / "size_series.csv").exists()
    cfg = json.loads((d1 / "run_config.json").read_text())
    assert cfg["k"] == 400 and cfg["seed"] == 1
    assert run("integrate", d1, tmp_path / "d2", "--out", tmp_path / "i") == EXIT_OK
    res = json.loads((tmp_path / "i" / "integration.json").read_text())
    assert res["rho_v"] == 1.0
    assert run("integrate", d1, tmp_path / "d2", d1, "--matrix", "rho_c", "--out", tmp_path / "m") == EXIT_OK
    assert (tmp_path / "m" / "rho_c_matrix.csv").read_text().startswith("stream,d1,d2,d1")


def test_config_precedence(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("src,dst,timestamp\na,b,0\nb,c,1\n")
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"seed": 9, "detect": {"k": 50, "h": 2}}))
    assert run("detect", "--config", conf, "--edges", p, "--out", tmp_path / "a") == EXIT_OK
    got = json.loads((tmp_path / "a" / "run_config.json").read_text())
    assert (got["k"], got["h"], got["seed"]) == (50, 2, 9)
    assert run("detect", "--config", conf, "--edges", p, "--k", 7, "--out", tmp_path / "b") == EXIT_OK
    got = json.loads((tmp_path / "b" / "run_config.json").read_text())
    assert (got["k"], got["h"], got["c"]) == (7, 2, 3)


def test_exit_codes(tmp_path):
    assert run("detect", "--edges", tmp_path / "missing.csv", "--out", tmp_path / "x") == EXIT_IO
    p = tmp_path / "e.csv"
    p.write_text("src,dst,timestamp\na,b,0\n")
    assert run("detect", "--edges", p, "--k", 0, "--out", tmp_path / "x") == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run("detect", "--config", bad, "--edges", p, "--out", tmp_path / "x") == EXIT_CONFIG
    bad.write_text(json.dumps({"detect": {"bogus": 1}}))
    assert run("detect", "--config", bad, "--edges", p, "--out", tmp_path / "x") == EXIT_CONFIG
    with pytest.raises(SystemExit):
        run("experiment", "nonsense")
    assert EXIT_ACCEPTANCE not in (EXIT_OK, EXIT_CONFIG, EXIT_IO)


def test_experiment_report(tmp_path):
    assert run("experiment", "figure2", "--out", tmp_path) == EXIT_OK
    rep = json.loads((tmp_path / "figure2_report.json").read_text())
    assert rep["passed"] and rep["stats"]["k"] == 100


def test_split_reservoir_series(tmp_path):
    assert run("experiment", "split-reservoir", "--out", tmp_path) == EXIT_OK
    for i in (1, 2):
        assert (tmp_path / f"size_series_{i}.csv").read_text().startswith("time,lineage,component_id,size")
    rep = json.loads((tmp_path / "split-reservoir_report.json").read_text())
    assert rep["stats"]["reservoir_1"]["lineages"] > 0
