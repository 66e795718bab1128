"""Config validation, run artifacts, resume, compare, sweep, evaluate, exits."""

import json
import math

import numpy as np
import pytest

from shapeopt import cli
from shapeopt.cli import (
    EXIT_CONFIG,
    EXIT_EVALUATOR,
    EXIT_OK,
    EXIT_PROPOSER,
    ConfigError,
    load_records,
    main,
    parse_config,
)
from shapeopt.problems import AirfoilProblem

ANALYTIC = {
    "problem": "analytic_test",
    "optimizer": "mock",
    "budget": 4,
    "population_size": 3,
    "n_ini": 1,
    "seeds": [0],
    "dimension": 2,
}

AXISYM_TINY = {
    "problem": "axisym_volume",
    "optimizer": "mock",
    "budget": 2,
    "population_size": 2,
    "n_ini": 1,
    "seeds": [0],
    "K": 1,
    "n_samples": 201,
    "n_elements": 8,
}


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run_cli(*argv):
    return main(list(argv))


# ------------------------------------------------------------ config parsing

def test_parse_config_materializes_defaults():
    settings = parse_config({"problem": "analytic_test", "optimizer": "mock"})
    assert settings.budget == 40
    assert settings.population_size == 8
    assert settings.n_ini == 2
    assert settings.sigma is None
    assert settings.selection.top_generations == 3
    assert settings.selection.recent_generations == 2
    assert settings.selection.designs_per_generation == 3
    assert settings.seeds == [0]
    assert settings.output_dir == "runs"
    assert settings.problem_params == {"dimension": 3, "target": None}


@pytest.mark.parametrize(
    "overrides",
    [
        {"problem": "unknown"},
        {"optimizer": "sgd"},
        {"budget": 0},
        {"budget": True},
        {"budget": "4"},
        {"population_size": 0},
        {"n_ini": 0},
        {"sigma": -1.0},
        {"seeds": []},
        {"seeds": [1, 1]},
        {"seeds": "0"},
        {"output_dir": ""},
        {"top_generations": 0, "recent_generations": 0},
        {"designs_per_generation": 0},
        {"mystery_key": 1},
        {"dimension": 0},
        {"target": [1.0]},  # wrong length for dimension 3
    ],
)
def test_parse_config_rejects(overrides):
    doc = {"problem": "analytic_test", "optimizer": "mock", **overrides}
    with pytest.raises(ConfigError):
        parse_config(doc)


@pytest.mark.parametrize(
    "overrides",
    [
        {"K": 0},
        {"K": 9},
        {"n_samples": 200},  # even
        {"n_samples": 199},  # too small
        {"n_elements": 4},
        {"n_elements": 500},
    ],
)
def test_parse_config_axisym_limits(overrides):
    doc = {"problem": "axisym_volume", "optimizer": "mock", **overrides}
    with pytest.raises(ConfigError):
        parse_config(doc)


def test_parse_config_airfoil_requires_evaluator():
    doc = {"problem": "airfoil", "optimizer": "mock"}
    with pytest.raises(ConfigError, match="evaluator_command"):
        parse_config(doc)
    doc["evaluator_command"] = []
    with pytest.raises(ConfigError):
        parse_config(doc)
    doc["evaluator_command"] = ["solver"]
    settings = parse_config(doc)
    assert settings.problem_params["n_F"] == 3
    assert settings.problem_params["reynolds"] == 100.0


def test_parse_config_llm_block():
    doc = {"problem": "analytic_test", "optimizer": "llm"}
    with pytest.raises(ConfigError):
        parse_config(doc)  # llm block missing
    doc["llm"] = {"endpoint": "http://x/v1"}
    with pytest.raises(ConfigError):
        parse_config(doc)  # model missing
    doc["llm"]["model"] = "m"
    settings = parse_config(doc)
    assert settings.llm == {
        "endpoint": "http://x/v1",
        "model": "m",
        "max_retries": 2,
        "timeout": 60.0,
        "api_key_env": "SHAPEOPT_API_KEY",
    }
    doc["llm"]["temperature"] = 0.5
    with pytest.raises(ConfigError, match="unknown llm"):
        parse_config(doc)


def test_parse_config_ga_block():
    doc = {"problem": "analytic_test", "optimizer": "ga", "population_size": 4}
    settings = parse_config(doc)
    assert settings.ga["elite_count"] == 1
    assert settings.ga["tournament_size"] == 2
    doc["ga"] = {"elite_count": 5}
    with pytest.raises(ConfigError, match="elite_count"):
        parse_config(doc)
    doc["ga"] = {"nonsense": 1}
    with pytest.raises(ConfigError, match="unknown ga"):
        parse_config(doc)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        cli.load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        cli.load_config(bad)


# -------------------------------------------------------------- run artifacts

def test_run_writes_expected_artifacts(tmp_path, capsys):
    config = write_config(tmp_path, {**ANALYTIC, "seeds": [0, 1]})
    out = tmp_path / "runs"
    assert run_cli("run", "--config", config, "--out", str(out)) == EXIT_OK
    stdout = capsys.readouterr().out
    assert f"seed 0: {out / 'seed_0'}" in stdout
    for seed in (0, 1):
        run_dir = out / f"seed_{seed}"
        records = (run_dir / "records.jsonl").read_text().splitlines()
        assert len(records) == 4 * 3
        entries = [json.loads(line) for line in records]
        assert [e["timestamp"] for e in entries] == list(range(12))
        assert all(
            set(e) == {"generation", "design", "encoded", "score", "status", "timestamp"}
            for e in entries
        )
        trajectory = (run_dir / "trajectory.csv").read_text().splitlines()
        assert trajectory[0] == "generation,best_score_in_generation,best_score_so_far"
        assert len(trajectory) == 1 + 4
        summary = json.loads((run_dir / "summary.json").read_text())
        assert summary["n_records"] == 12
        assert summary["best_score"] == max(e["score"] for e in entries)
        snapshot = json.loads((run_dir / "config.json").read_text())
        assert snapshot["seeds"] == [seed]


def test_run_is_bit_deterministic(tmp_path):
    config = write_config(tmp_path, ANALYTIC)
    run_cli("run", "--config", config, "--out", str(tmp_path / "a"))
    run_cli("run", "--config", config, "--out", str(tmp_path / "b"))
    a = (tmp_path / "a" / "seed_0" / "records.jsonl").read_bytes()
    b = (tmp_path / "b" / "seed_0" / "records.jsonl").read_bytes()
    assert a == b


def test_run_refuses_overwrite_without_resume(tmp_path, capsys):
    config = write_config(tmp_path, ANALYTIC)
    out = str(tmp_path / "runs")
    assert run_cli("run", "--config", config, "--out", out) == EXIT_OK
    assert run_cli("run", "--config", config, "--out", out) == EXIT_CONFIG
    assert "--resume" in capsys.readouterr().err


def test_resume_after_truncation_matches_full_run(tmp_path):
    config = write_config(tmp_path, ANALYTIC)
    run_cli("run", "--config", config, "--out", str(tmp_path / "full"))
    reference = (tmp_path / "full" / "seed_0" / "records.jsonl").read_bytes()

    run_cli("run", "--config", config, "--out", str(tmp_path / "partial"))
    records = tmp_path / "partial" / "seed_0" / "records.jsonl"
    lines = records.read_text().splitlines()
    # keep two complete generations plus one dangling record
    records.write_text("\n".join(lines[:7]) + "\n")
    assert (
        run_cli("run", "--config", config, "--out", str(tmp_path / "partial"), "--resume")
        == EXIT_OK
    )
    assert records.read_bytes() == reference


def test_resume_with_complete_file_keeps_bytes(tmp_path):
    config = write_config(tmp_path, ANALYTIC)
    out = str(tmp_path / "runs")
    run_cli("run", "--config", config, "--out", out)
    records = tmp_path / "runs" / "seed_0" / "records.jsonl"
    before = records.read_bytes()
    assert run_cli("run", "--config", config, "--out", out, "--resume") == EXIT_OK
    assert records.read_bytes() == before


def test_snapshot_replays_bit_exactly(tmp_path):
    config = write_config(tmp_path, {**ANALYTIC, "seeds": [3]})
    run_cli("run", "--config", config, "--out", str(tmp_path / "first"))
    first = tmp_path / "first" / "seed_3"
    replay_config = str(first / "config.json")
    run_cli("run", "--config", replay_config, "--out", str(tmp_path / "second"))
    assert (tmp_path / "second" / "seed_3" / "records.jsonl").read_bytes() == (
        first / "records.jsonl"
    ).read_bytes()


def test_ga_run_budget_counts_generations(tmp_path):
    doc = {**ANALYTIC, "optimizer": "ga", "budget": 5}
    config = write_config(tmp_path, doc)
    run_cli("run", "--config", config, "--out", str(tmp_path / "ga"))
    records = (tmp_path / "ga" / "seed_0" / "records.jsonl").read_text().splitlines()
    assert len(records) == 5 * 3
    generations = {json.loads(line)["generation"] for line in records}
    assert generations == set(range(5))


def test_ga_run_resume_matches(tmp_path):
    doc = {**ANALYTIC, "optimizer": "ga", "budget": 6}
    config = write_config(tmp_path, doc)
    run_cli("run", "--config", config, "--out", str(tmp_path / "full"))
    reference = (tmp_path / "full" / "seed_0" / "records.jsonl").read_bytes()
    run_cli("run", "--config", config, "--out", str(tmp_path / "cut"))
    records = tmp_path / "cut" / "seed_0" / "records.jsonl"
    records.write_text("\n".join(records.read_text().splitlines()[:10]) + "\n")
    run_cli("run", "--config", config, "--out", str(tmp_path / "cut"), "--resume")
    assert records.read_bytes() == reference


# ------------------------------------------------------------------ records io

def test_load_records_drops_partial_tail(tmp_path):
    path = tmp_path / "records.jsonl"
    rows = [
        {"generation": g, "design": [0.0], "encoded": [500],
         "score": float(g * 2 + i), "status": "ok", "timestamp": g * 2 + i}
        for g in range(2)
        for i in range(2)
    ]
    rows.append({"generation": 2, "design": [0.0], "encoded": [500],
                 "score": 9.0, "status": "ok", "timestamp": 4})
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    buffer, kept, dropped = load_records(path, population_size=2)
    assert (buffer.n_generations, kept, dropped) == (2, 4, True)
    assert len(path.read_text().splitlines()) == 4


def test_load_records_rejects_corruption(tmp_path):
    path = tmp_path / "records.jsonl"
    path.write_text("{broken\n")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_records(path, 2)
    good = {"generation": 0, "design": [0.0], "encoded": [500],
            "score": 1.0, "status": "ok", "timestamp": 0}
    path.write_text(
        json.dumps(good) + "\n" + json.dumps({**good, "generation": 2}) + "\n"
    )
    with pytest.raises(ConfigError, match="out of order"):
        load_records(path, 1)
    path.write_text(
        json.dumps(good) + "\n" + json.dumps({**good, "generation": 1}) + "\n"
        + json.dumps({**good, "generation": 1}) + "\n"
    )
    with pytest.raises(ConfigError, match="interior generation"):
        load_records(path, 2)


# --------------------------------------------------------------------- compare

def make_run(tmp_path, name, seeds, budget=4):
    doc = {**ANALYTIC, "seeds": seeds, "budget": budget}
    config = write_config(tmp_path, doc, name=f"{name}.json")
    out = tmp_path / name
    run_cli("run", "--config", config, "--out", str(out))
    return out


def test_compare_groups_by_directory(tmp_path, capsys):
    a = make_run(tmp_path, "method_a", [0, 1])
    b = make_run(tmp_path, "method_b", [2])
    out = tmp_path / "comparison.csv"
    assert run_cli("compare", "--runs", str(a), str(b), "--out", str(out)) == EXIT_OK
    rows = out.read_text().splitlines()
    header = rows[0].split(",")
    assert header == [
        "generation",
        "method_a_mean", "method_a_min", "method_a_max",
        "method_b_mean", "method_b_min", "method_b_max",
    ]
    assert len(rows) == 1 + 4
    # single-seed group has zero spread
    for row in rows[1:]:
        cells = row.split(",")
        assert cells[4] == cells[5] == cells[6]
        assert float(cells[2]) <= float(cells[1]) <= float(cells[3])


def test_compare_accepts_single_seed_directory(tmp_path):
    a = make_run(tmp_path, "direct", [0])
    out = tmp_path / "one.csv"
    assert run_cli("compare", "--runs", str(a / "seed_0"), "--out", str(out)) == EXIT_OK
    assert out.read_text().splitlines()[0].startswith("generation,seed_0_mean")


def test_compare_truncates_mismatched_budgets(tmp_path, capsys):
    a = make_run(tmp_path, "long", [0], budget=6)
    b = make_run(tmp_path, "short", [1], budget=3)
    out = tmp_path / "mixed.csv"
    assert run_cli("compare", "--runs", str(a), str(b), "--out", str(out)) == EXIT_OK
    assert "truncating to 3" in capsys.readouterr().err
    assert len(out.read_text().splitlines()) == 1 + 3


def test_compare_missing_directory(tmp_path, capsys):
    out = tmp_path / "x.csv"
    code = run_cli("compare", "--runs", str(tmp_path / "nope"), "--out", str(out))
    assert code == EXIT_CONFIG


# ------------------------------------------------------------------ sweep-nini

def test_sweep_nini_runs_axisym(tmp_path):
    config = write_config(tmp_path, AXISYM_TINY)
    out = tmp_path / "sweep"
    assert run_cli("sweep-nini", "--config", config, "--nini", "1", "2",
                   "--out", str(out)) == EXIT_OK
    table = (out / "sweep_nini.csv").read_text().splitlines()
    assert table[0] == "generation,nini1_mean_best_so_far,nini2_mean_best_so_far"
    assert len(table) == 1 + AXISYM_TINY["budget"]
    summary = json.loads((out / "sweep_summary.json").read_text())
    assert set(summary) == {"1", "2"}
    assert all("mean_final_best" in v and "final_bests" in v for v in summary.values())
    assert (out / "nini_1" / "seed_0" / "records.jsonl").exists()
    assert (out / "nini_2" / "seed_0" / "records.jsonl").exists()


def test_sweep_nini_rejects_wrong_problem_or_optimizer(tmp_path, capsys):
    config = write_config(tmp_path, ANALYTIC)
    assert run_cli("sweep-nini", "--config", config, "--nini", "1",
                   "--out", str(tmp_path / "s")) == EXIT_CONFIG
    config = write_config(tmp_path, {**AXISYM_TINY, "optimizer": "ga"}, "ga.json")
    assert run_cli("sweep-nini", "--config", config, "--nini", "1",
                   "--out", str(tmp_path / "s2")) == EXIT_CONFIG
    config = write_config(tmp_path, AXISYM_TINY, "dup.json")
    assert run_cli("sweep-nini", "--config", config, "--nini", "2", "2",
                   "--out", str(tmp_path / "s3")) == EXIT_CONFIG


# -------------------------------------------------------------------- evaluate

def test_evaluate_analytic_to_stdout(tmp_path, capsys):
    config = write_config(tmp_path, ANALYTIC)
    assert run_cli("evaluate", "--config", config, "--design", "0.3, 0.3") == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["score"] == 0.0
    assert report["encoded"] == [650, 650]


def test_evaluate_axisym_with_exports(tmp_path, capsys):
    config = write_config(tmp_path, {**AXISYM_TINY, "K": 2, "n_elements": 40})
    report_path = tmp_path / "report.json"
    profile_path = tmp_path / "profile.csv"
    traction_path = tmp_path / "traction.csv"
    assert run_cli(
        # the --design=value form keeps argparse from reading the leading
        # minus sign as an option prefix
        "evaluate", "--config", config, f"--design={-math.pi / 2},0",
        "--out", str(report_path),
        "--profile-out", str(profile_path),
        "--traction-out", str(traction_path),
    ) == EXIT_OK
    report = json.loads(report_path.read_text())
    assert report["normalized_drag"] == pytest.approx(1.0, abs=5e-3)
    assert report["scale_lambda"] == pytest.approx(math.pi / 2, rel=1e-4)
    assert report["score"] == -report["normalized_drag"]
    assert profile_path.read_text().splitlines()[0] == "s,r,z,phi"
    assert traction_path.read_text().splitlines()[0] == "s,f_r,f_z"


def test_evaluate_rejects_bad_designs(tmp_path, capsys):
    config = write_config(tmp_path, ANALYTIC)
    assert run_cli("evaluate", "--config", config, "--design", "0.1") == EXIT_CONFIG
    assert run_cli("evaluate", "--config", config, "--design", "2.0,0.0") == EXIT_CONFIG
    assert run_cli("evaluate", "--config", config, "--design", "a,b") == EXIT_CONFIG


# ------------------------------------------------------------------ exit codes

def test_unreachable_llm_endpoint_exits_3_with_partial_outputs(tmp_path, capsys):
    doc = {
        **ANALYTIC,
        "optimizer": "llm",
        "budget": 3,
        "llm": {
            "endpoint": "http://127.0.0.1:9/v1/chat/completions",
            "model": "m",
            "max_retries": 0,
            "timeout": 0.5,
        },
    }
    config = write_config(tmp_path, doc)
    out = tmp_path / "llm_run"
    assert run_cli("run", "--config", config, "--out", str(out)) == EXIT_PROPOSER
    assert "partial outputs preserved" in capsys.readouterr().err
    records = (out / "seed_0" / "records.jsonl").read_text().splitlines()
    assert len(records) == 3  # the seeded generation persisted before the abort
    audit = (out / "seed_0" / "llm_audit.jsonl").read_text().splitlines()
    assert len(audit) == 1
    assert json.loads(audit[0])["error"]


def test_missing_flow_solver_exits_4(tmp_path, capsys, monkeypatch):
    # a problem whose evaluator is unusable at run time, not just misconfigured
    monkeypatch.setattr(
        cli, "make_problem", lambda settings: AirfoilProblem(n_free_points=3)
    )
    doc = {
        "problem": "airfoil",
        "optimizer": "mock",
        "budget": 2,
        "population_size": 2,
        "n_ini": 1,
        "seeds": [0],
        "evaluator_command": ["ignored"],
    }
    config = write_config(tmp_path, doc)
    code = run_cli("run", "--config", config, "--out", str(tmp_path / "af"))
    assert code == EXIT_EVALUATOR
    assert "evaluator failure" in capsys.readouterr().err


def test_airfoil_run_with_stub_evaluator(tmp_path):
    stub = tmp_path / "stub.py"
    stub.write_text(
        "import json, sys\n"
        "out = sys.argv[sys.argv.index('--out') + 1]\n"
        "n = sum(1 for _ in open(sys.argv[1]))\n"
        "json.dump({'lift': 1.0, 'drag': 2.0, 'ratio': 1.0 / n}, open(out, 'w'))\n"
    )
    import sys as _sys

    doc = {
        "problem": "airfoil",
        "optimizer": "mock",
        "budget": 2,
        "population_size": 2,
        "n_ini": 1,
        "seeds": [0],
        "n_F": 2,
        "samples_per_segment": 8,
        "evaluator_command": [_sys.executable, str(stub)],
    }
    config = write_config(tmp_path, doc)
    out = tmp_path / "airfoil_run"
    assert run_cli("run", "--config", config, "--out", str(out)) == EXIT_OK
    summary = json.loads((out / "seed_0" / "summary.json").read_text())
    assert summary["best_score"] == pytest.approx(2.0 / 33)  # 4*8+1 lines, doubled
