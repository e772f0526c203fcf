import json

import numpy as np
import pytest

from querylab.bench import (ExperimentConfig, InvalidConfig, comparable, loads_config, parse_range,
                            read_records, report, run_experiment)
from querylab.bench.cli import main
from querylab.bench.io import (load_certificate, load_game, load_path, save_certificate, save_game,
                               save_path)
from querylab.fixpoint import build_path_function, certify_displacement
from querylab.games import ExplicitGame
from querylab.paths import ParseError, cut_cycles, random_walk


def test_parse_range():
    assert parse_range("3") == [3]
    assert parse_range("1..4") == [1, 2, 3, 4]
    assert parse_range("2,5") == [2, 5]
    with pytest.raises(InvalidConfig):
        parse_range("a..b")
    with pytest.raises(InvalidConfig):
        parse_range("4..1")


def test_config_text_roundtrip_and_errors():
    cfg = loads_config("# campaign\nkind = htp\nn = 2..3\ntrials = 4\nT = 8  # rounds\n")
    assert cfg.n == [2, 3] and cfg.trials == 4 and cfg.T == 8
    assert loads_config(cfg.to_text()) == cfg
    with pytest.raises(InvalidConfig, match="line 2"):
        loads_config("kind = htp\nbogus = 1\n")
    with pytest.raises(InvalidConfig):
        loads_config("kind = nope\n")
    with pytest.raises(InvalidConfig):
        loads_config("kind = certify\nn = 5\n")
    with pytest.raises(InvalidConfig):
        ExperimentConfig("htp", trials=0).validate()


def test_walk_cycles_records_max_cycle():
    recs = run_experiment(ExperimentConfig("walk-cycles", n=[6], trials=3, steps=500))
    assert len(recs) == 3
    assert all("max_cycle" in r["extra"] for r in recs)
    w = random_walk(6, 500, recs[0]["seed"])
    from querylab.paths import max_cycle_length
    assert recs[0]["extra"]["max_cycle"] == max_cycle_length(w)


def test_chain_record_logs_fixed_point():
    (rec,) = run_experiment(ExperimentConfig("chain-e2e", n=[2], trials=1))
    assert rec["success"] and not rec["violation"]
    assert len(rec["extra"]["fixed_point"]) == 2


def test_certify_records_constants():
    recs = run_experiment(ExperimentConfig("certify", n=[1, 2, 3, 4], trials=1))
    assert [r["extra"]["lambda_star"] for r in recs] == [13, 29, 43, 57]
    assert all(r["extra"]["eps_star"] == pytest.approx(1 / 6) for r in recs)


def test_runs_are_reproducible_and_parallel_safe():
    cfg = ExperimentConfig("htp", n=[3, 4], trials=4, T=4, steps=200, seed=9)
    a = [comparable(r) for r in run_experiment(cfg, workers=1)]
    b = [comparable(r) for r in run_experiment(cfg, workers=2)]
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_campaign_directory_is_append_only_and_resumes(tmp_path):
    cfg = ExperimentConfig("sampling", n=[2], trials=2, out=str(tmp_path))
    run_experiment(cfg)
    first = (tmp_path / "records.jsonl").read_text()
    run_experiment(cfg.with_overrides(trials=3))
    text = (tmp_path / "records.jsonl").read_text()
    assert text.startswith(first)
    assert len(read_records(tmp_path)) == 3
    assert (tmp_path / "manifest.txt").read_text().count("kind = sampling") == 2


def rec(q, ok, kind="htp", n=2, **extra):
    return {"kind": kind, "n": n, "queries": q, "success": ok, "extra": extra}


def test_report_examples():
    text, summary = report([rec(3, True)])
    assert len(text.strip().splitlines()) == 2
    _, summary = report([rec(1, True), rec(2, False)])
    assert 0 < summary["htp/n=2"]["success_fraction"] < 1
    _, summary = report([rec(q, True) for q in range(1, 101)])
    assert summary["htp/n=2"]["queries_mean"] == 50.5
    _, summary = report([rec(0, True, "certify", 2, lambda_star=29.0, eps_star=1 / 6)])
    assert summary["certify/n=2"]["lambda_star_max"] == 29.0
    with pytest.raises(ValueError):
        report([])


def test_instance_files_roundtrip(tmp_path):
    path = cut_cycles(random_walk(4, 60, seed=1))
    save_path(path, tmp_path / "a.path")
    assert load_path(tmp_path / "a.path") == path
    G = ExplicitGame(np.random.default_rng(0).random((2, 3, 2)))
    save_game(G, tmp_path / "g.game")
    assert load_game(tmp_path / "g.game").payoffs.tobytes() == G.payoffs.tobytes()
    (tmp_path / "bad.path").write_text("oops\n1\n")
    with pytest.raises(ParseError) as e:
        load_path(tmp_path / "bad.path")
    assert e.value.line == 1
    c = certify_displacement(build_path_function(path))
    save_certificate(c, tmp_path / "c.cert")
    assert load_certificate(tmp_path / "c.cert").eps_star == c.eps_star


def test_experiments_do_not_mutate_inputs(tmp_path):
    path = cut_cycles(random_walk(2, 10, seed=2))
    before = path.vertices
    build_path_function(path).dense_signs()
    assert path.vertices == before


def test_cli_verbs(tmp_path, capsys):
    assert main(["generate", "path", "--n", "2..3", "--out", str(tmp_path / "inst")]) == 0
    files = sorted((tmp_path / "inst").glob("*.path"))
    assert len(files) == 2
    assert main(["certify", str(files[0])]) == 0
    assert "eps_star=" in capsys.readouterr().out
    assert main(["generate", "game", "--n", "2", "--out", str(tmp_path / "inst")]) == 0
    out = tmp_path / "run"
    assert main(["run", "--kind", "walk-cycles", "--n", "4", "--trials", "2", "--out", str(out)]) == 0
    assert (out / "summary.csv").exists() and (out / "summary.json").exists()
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    assert capsys.readouterr().out.startswith("kind,n,trials")
    assert main(["run", "--kind", "nonsense"]) == 2


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(f"kind = dynamics\nn = 2\nT = 300\nout = {tmp_path / 'd'}\n")
    assert main(["run", str(cfg), "--seed", "3"]) == 0
    assert read_records(tmp_path / "d")[0]["seed"] is not None
