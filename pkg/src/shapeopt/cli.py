"""Command-line runner: configure, run, resume, compare, sweep, evaluate.

One JSON config document describes a run; the only environment input is
the API key variable named inside it.  Each seed gets its own directory
with a resolved config snapshot, incremental JSON Lines records, a
trajectory table, and a summary, so interrupted runs resume bit-exactly
and finished runs replay bit-exactly from their snapshots.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .airfoil import EvaluatorConfig
from .axisym import GeometricConstraint, export_profile_csv
from .evolution import (
    Bounds,
    EsConfig,
    EvaluatorFatal,
    ProposerError,
    RecordBuffer,
    RunResult,
    ScoredRecord,
    SelectionConfig,
    encode_design,
    run_optimization,
)
from .ga import GaConfig, run_ga
from .llm import LlmConfig, LlmProposer, MockProposer
from .problems import AirfoilProblem, AxisymDragProblem, QuadraticProblem
from .stokesbem import export_traction_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROPOSER = 3
EXIT_EVALUATOR = 4

PROBLEMS = ("airfoil", "axisym_volume", "axisym_area", "analytic_test")
OPTIMIZERS = ("llm", "mock", "ga")

_TOP_KEYS = {
    "problem", "optimizer", "budget", "population_size", "sigma", "n_ini",
    "top_generations", "recent_generations", "designs_per_generation",
    "seeds", "output_dir", "max_workers", "K", "n_samples", "n_elements",
    "n_F", "free_indices", "samples_per_segment", "handle_fraction",
    "evaluator_command", "reynolds", "baseline_ratio", "evaluator_timeout",
    "dimension", "target", "llm", "ga",
}
_LLM_KEYS = {"endpoint", "model", "max_retries", "timeout", "api_key_env"}
_GA_KEYS = {
    "tournament_size", "crossover_rate", "blend_alpha", "mutation_rate",
    "mutation_sigma", "elite_count",
}


class ConfigError(ValueError):
    """The configuration document cannot drive a run."""


@dataclass
class RunSettings:
    """A validated configuration with every default materialized."""

    problem: str
    optimizer: str
    budget: int
    population_size: int
    sigma: float | None
    n_ini: int
    selection: SelectionConfig
    seeds: list[int]
    output_dir: str
    max_workers: int
    problem_params: dict
    llm: dict | None
    ga: dict = field(default_factory=dict)

    def snapshot(self, seed: int) -> dict:
        """Flat JSON document that replays this single seed."""
        doc = {
            "problem": self.problem,
            "optimizer": self.optimizer,
            "budget": self.budget,
            "population_size": self.population_size,
            "sigma": self.sigma,
            "n_ini": self.n_ini,
            "top_generations": self.selection.top_generations,
            "recent_generations": self.selection.recent_generations,
            "designs_per_generation": self.selection.designs_per_generation,
            "seeds": [seed],
            "output_dir": self.output_dir,
            "max_workers": self.max_workers,
        }
        doc.update(self.problem_params)
        if self.llm is not None:
            doc["llm"] = dict(self.llm)
        if self.ga:
            doc["ga"] = dict(self.ga)
        return doc


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _as_int(raw: dict, key: str, default: int, minimum: int, maximum: int | None = None) -> int:
    value = raw.get(key, default)
    _require(isinstance(value, int) and not isinstance(value, bool), f"{key} must be an integer")
    _require(value >= minimum, f"{key} must be at least {minimum}")
    if maximum is not None:
        _require(value <= maximum, f"{key} must be at most {maximum}")
    return value


def parse_config(raw: dict) -> RunSettings:
    """Validate a config document and materialize every default."""
    _require(isinstance(raw, dict), "config must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    _require(not unknown, f"unknown config keys: {sorted(unknown)}")

    problem = raw.get("problem")
    _require(problem in PROBLEMS, f"problem must be one of {PROBLEMS}")
    optimizer = raw.get("optimizer")
    _require(optimizer in OPTIMIZERS, f"optimizer must be one of {OPTIMIZERS}")

    budget = _as_int(raw, "budget", 40, 1)
    population_size = _as_int(raw, "population_size", 8, 1)
    n_ini = _as_int(raw, "n_ini", 2, 1)
    sigma = raw.get("sigma")
    if sigma is not None:
        _require(
            isinstance(sigma, (int, float)) and not isinstance(sigma, bool) and sigma > 0,
            "sigma must be a positive number or null",
        )
        sigma = float(sigma)
    try:
        selection = SelectionConfig(
            top_generations=_as_int(raw, "top_generations", 3, 0),
            recent_generations=_as_int(raw, "recent_generations", 2, 0),
            designs_per_generation=_as_int(raw, "designs_per_generation", 3, 1),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    seeds = raw.get("seeds", [0])
    _require(
        isinstance(seeds, list) and len(seeds) >= 1
        and all(isinstance(s, int) and not isinstance(s, bool) for s in seeds),
        "seeds must be a non-empty list of integers",
    )
    _require(len(set(seeds)) == len(seeds), "seeds must be distinct")

    output_dir = raw.get("output_dir", "runs")
    _require(isinstance(output_dir, str) and output_dir, "output_dir must be a path")
    max_workers = _as_int(raw, "max_workers", 1, 1)

    params: dict = {}
    if problem in ("axisym_volume", "axisym_area"):
        params["K"] = _as_int(raw, "K", 2, 1, 8)
        params["n_samples"] = _as_int(raw, "n_samples", 801, 201)
        _require(params["n_samples"] % 2 == 1, "n_samples must be odd")
        params["n_elements"] = _as_int(raw, "n_elements", 120, 8, 400)
    elif problem == "airfoil":
        params["n_F"] = _as_int(raw, "n_F", 3, 1, 4)
        free = raw.get("free_indices")
        if free is not None:
            _require(
                isinstance(free, list) and all(isinstance(i, int) for i in free),
                "free_indices must be a list of integers",
            )
        params["free_indices"] = free
        params["samples_per_segment"] = _as_int(raw, "samples_per_segment", 32, 2)
        handle = raw.get("handle_fraction", 0.3)
        _require(
            isinstance(handle, (int, float)) and 0 < handle,
            "handle_fraction must be positive",
        )
        params["handle_fraction"] = float(handle)
        command = raw.get("evaluator_command")
        _require(
            isinstance(command, list) and command
            and all(isinstance(c, str) for c in command),
            "airfoil runs need evaluator_command: a non-empty list of strings",
        )
        params["evaluator_command"] = command
        params["reynolds"] = float(raw.get("reynolds", 100.0))
        params["baseline_ratio"] = float(raw.get("baseline_ratio", 0.0))
        timeout = raw.get("evaluator_timeout", 300.0)
        params["evaluator_timeout"] = None if timeout is None else float(timeout)
    else:  # analytic_test
        params["dimension"] = _as_int(raw, "dimension", 3, 1)
        target = raw.get("target")
        if target is not None:
            _require(
                isinstance(target, list) and len(target) == params["dimension"]
                and all(isinstance(v, (int, float)) for v in target),
                "target must be a list of numbers matching dimension",
            )
        params["target"] = target

    llm = raw.get("llm")
    if optimizer == "llm":
        _require(isinstance(llm, dict), "optimizer 'llm' needs an llm config object")
        unknown = set(llm) - _LLM_KEYS
        _require(not unknown, f"unknown llm config keys: {sorted(unknown)}")
        _require(
            isinstance(llm.get("endpoint"), str) and llm["endpoint"],
            "llm.endpoint must be a URL",
        )
        _require(
            isinstance(llm.get("model"), str) and llm["model"],
            "llm.model must be a model identifier",
        )
        llm = {
            "endpoint": llm["endpoint"],
            "model": llm["model"],
            "max_retries": _as_int(llm, "max_retries", 2, 0),
            "timeout": float(llm.get("timeout", 60.0)),
            "api_key_env": str(llm.get("api_key_env", "SHAPEOPT_API_KEY")),
        }
    else:
        llm = None

    ga = raw.get("ga", {})
    if optimizer == "ga":
        _require(isinstance(ga, dict), "ga config must be an object")
        unknown = set(ga) - _GA_KEYS
        _require(not unknown, f"unknown ga config keys: {sorted(unknown)}")
        sigma_mut = ga.get("mutation_sigma")
        ga = {
            "tournament_size": _as_int(ga, "tournament_size", 2, 2),
            "crossover_rate": float(ga.get("crossover_rate", 0.9)),
            "blend_alpha": float(ga.get("blend_alpha", 0.5)),
            "mutation_rate": float(ga.get("mutation_rate", 0.2)),
            "mutation_sigma": None if sigma_mut is None else float(sigma_mut),
            "elite_count": _as_int(ga, "elite_count", 1, 0),
        }
        _require(
            ga["elite_count"] <= population_size,
            "ga.elite_count cannot exceed population_size",
        )
    else:
        ga = {}

    return RunSettings(
        problem=problem,
        optimizer=optimizer,
        budget=budget,
        population_size=population_size,
        sigma=sigma,
        n_ini=n_ini,
        selection=selection,
        seeds=list(seeds),
        output_dir=output_dir,
        max_workers=max_workers,
        problem_params=params,
        llm=llm,
        ga=ga,
    )


def load_config(path: str | Path) -> RunSettings:
    try:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(raw)


def make_problem(settings: RunSettings):
    params = settings.problem_params
    if settings.problem in ("axisym_volume", "axisym_area"):
        constraint = (
            GeometricConstraint.fixed_volume()
            if settings.problem == "axisym_volume"
            else GeometricConstraint.fixed_area()
        )
        return AxisymDragProblem(
            n_modes=params["K"],
            constraint=constraint,
            n_samples=params["n_samples"],
            n_elements=params["n_elements"],
        )
    if settings.problem == "airfoil":
        evaluator = EvaluatorConfig(
            command=list(params["evaluator_command"]),
            reynolds=params["reynolds"],
            timeout=params["evaluator_timeout"],
            baseline_ratio=params["baseline_ratio"],
        )
        free = params["free_indices"]
        return AirfoilProblem(
            n_free_points=params["n_F"],
            free_indices=None if free is None else tuple(free),
            evaluator=evaluator,
            samples_per_segment=params["samples_per_segment"],
            handle_fraction=params["handle_fraction"],
        )
    return QuadraticProblem(
        dimension=params["dimension"],
        target=params["target"],
    )


class RecordWriter:
    """Appends one JSON line per record; timestamps count evaluations."""

    def __init__(self, path: Path, bounds: Bounds, start_index: int = 0) -> None:
        self.path = path
        self.bounds = bounds
        self.index = start_index

    def __call__(self, records: Sequence[ScoredRecord]) -> None:
        with open(self.path, "a", encoding="utf-8") as handle:
            for record in records:
                encoded = encode_design(record.design, self.bounds)
                handle.write(
                    json.dumps(
                        {
                            "generation": record.generation,
                            "design": [float(v) for v in record.design],
                            "encoded": [int(v) for v in encoded],
                            "score": float(record.score),
                            "status": record.status,
                            "timestamp": self.index,
                        }
                    )
                    + "\n"
                )
                self.index += 1


def load_records(
    path: Path, population_size: int
) -> tuple[RecordBuffer, int, bool]:
    """Rebuild the buffer from disk, dropping a partial trailing generation.

    Returns (buffer, records kept, whether the file was rewritten).
    """
    lines = [
        line
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    parsed = []
    for n, line in enumerate(lines):
        try:
            parsed.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} line {n + 1} is not valid JSON: {exc}") from exc
    generations: list[list[dict]] = []
    for n, entry in enumerate(parsed):
        g = entry.get("generation")
        _require(isinstance(g, int), f"{path} line {n + 1} lacks a generation index")
        if g == len(generations):
            generations.append([])
        _require(
            g == len(generations) - 1,
            f"{path} line {n + 1}: generation {g} out of order",
        )
        generations[g].append(entry)
    for body in generations[:-1]:
        _require(
            len(body) == population_size,
            f"{path}: interior generation with {len(body)} records"
            f" (expected {population_size})",
        )
    dropped = False
    if generations and len(generations[-1]) != population_size:
        generations.pop()
        dropped = True
    buffer = RecordBuffer()
    kept = 0
    for g, body in enumerate(generations):
        buffer.append_generation(
            [
                ScoredRecord(
                    design=np.array(entry["design"], dtype=float),
                    score=float(entry["score"]),
                    generation=g,
                    status=str(entry["status"]),
                )
                for entry in body
            ]
        )
        kept += len(body)
    if dropped:
        with open(path, "w", encoding="utf-8") as handle:
            handle.writelines(line + "\n" for line in lines[:kept])
    return buffer, kept, dropped


def write_trajectory(path: Path, buffer: RecordBuffer) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["generation", "best_score_in_generation", "best_score_so_far"]
        )
        best_so_far = -np.inf
        for g in range(buffer.n_generations):
            best = buffer.best_in(g).score
            best_so_far = max(best_so_far, best)
            writer.writerow([g, repr(float(best)), repr(float(best_so_far))])


def _write_summary(path: Path, settings: RunSettings, problem, result: RunResult) -> None:
    best = result.best
    summary = {
        "problem": settings.problem,
        "optimizer": settings.optimizer,
        "n_generations": result.buffer.n_generations,
        "n_records": len(result.buffer),
        "best_score": float(best.score),
        "best_generation": best.generation,
        "best_design": [float(v) for v in best.design],
        "best_encoded": [int(v) for v in encode_design(best.design, problem.bounds)],
    }
    if isinstance(problem, AxisymDragProblem) and best.status == "ok":
        score, profile, drag = problem.evaluate_detail(best.design)
        summary["best_normalized_drag"] = drag.normalized
        summary["best_drag_force"] = drag.drag
        summary["scale_lambda"] = profile.lam
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(summary, handle, indent=2)
        handle.write("\n")


def run_single_seed(settings: RunSettings, seed: int, resume: bool) -> Path:
    run_dir = Path(settings.output_dir) / f"seed_{seed}"
    run_dir.mkdir(parents=True, exist_ok=True)
    records_path = run_dir / "records.jsonl"

    buffer = RecordBuffer()
    kept = 0
    if records_path.exists() and records_path.stat().st_size > 0:
        if not resume:
            raise ConfigError(
                f"{records_path} already holds records; pass --resume to continue"
            )
        buffer, kept, _ = load_records(records_path, settings.population_size)

    with open(run_dir / "config.json", "w", encoding="utf-8") as handle:
        json.dump(settings.snapshot(seed), handle, indent=2)
        handle.write("\n")

    problem = make_problem(settings)
    writer = RecordWriter(records_path, problem.bounds, start_index=kept)

    if settings.optimizer == "ga":
        ga_cfg = GaConfig(
            population_size=settings.population_size,
            seed=seed,
            **settings.ga,
        )
        result = run_ga(
            problem,
            ga_cfg,
            settings.budget - 1,
            initial_buffer=buffer,
            on_generation=writer,
            max_workers=settings.max_workers,
        )
    else:
        if settings.optimizer == "mock":
            proposer = MockProposer()
        else:
            llm_cfg = LlmConfig(
                audit_path=str(run_dir / "llm_audit.jsonl"), **settings.llm
            )
            proposer = LlmProposer(config=llm_cfg, objective=problem.objective)
        es_cfg = EsConfig(
            budget=settings.budget,
            population_size=settings.population_size,
            sigma=settings.sigma,
            n_initial=settings.n_ini,
            selection=settings.selection,
            seed=seed,
            max_workers=settings.max_workers,
        )
        result = run_optimization(
            problem, proposer, es_cfg, initial_buffer=buffer, on_generation=writer
        )

    write_trajectory(run_dir / "trajectory.csv", result.buffer)
    _write_summary(run_dir / "summary.json", settings, problem, result)
    if isinstance(problem, AxisymDragProblem) and result.best.status == "ok":
        _, profile, _ = problem.evaluate_detail(result.best.design)
        export_profile_csv(profile, run_dir / "best_profile.csv")
    return run_dir


def cmd_run(config_path: str, out: str | None, resume: bool) -> int:
    settings = load_config(config_path)
    if out is not None:
        settings.output_dir = out
    for seed in settings.seeds:
        run_dir = run_single_seed(settings, seed, resume)
        print(f"seed {seed}: {run_dir}")
    return EXIT_OK


def _read_trajectory(path: Path) -> np.ndarray:
    with open(path, encoding="utf-8", newline="") as handle:
        rows = list(csv.DictReader(handle))
    return np.array([float(row["best_score_so_far"]) for row in rows])


def _collect_trajectories(root: Path) -> list[np.ndarray]:
    direct = root / "trajectory.csv"
    if direct.exists():
        return [_read_trajectory(direct)]
    found = sorted(root.glob("seed_*/trajectory.csv"))
    _require(bool(found), f"no trajectory.csv under {root}")
    return [_read_trajectory(p) for p in found]


def cmd_compare(run_dirs: list[str], out: str) -> int:
    """Per-generation mean/min/max of best-so-far, one column group per method."""
    _require(bool(run_dirs), "compare needs at least one run directory")
    groups = []
    for raw in run_dirs:
        root = Path(raw)
        _require(root.exists(), f"run directory {root} does not exist")
        groups.append((root.name, _collect_trajectories(root)))
    lengths = [len(t) for _, ts in groups for t in ts]
    horizon = min(lengths)
    if horizon != max(lengths):
        print(
            f"warning: budgets differ ({max(lengths)} vs {horizon});"
            f" truncating to {horizon} generations",
            file=sys.stderr,
        )
    header = ["generation"]
    columns = []
    for label, trajectories in groups:
        stacked = np.vstack([t[:horizon] for t in trajectories])
        header += [f"{label}_mean", f"{label}_min", f"{label}_max"]
        columns += [stacked.mean(axis=0), stacked.min(axis=0), stacked.max(axis=0)]
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for g in range(horizon):
            writer.writerow([g] + [repr(float(col[g])) for col in columns])
    print(out_path)
    return EXIT_OK


def cmd_sweep_nini(config_path: str, nini_values: list[int], out: str | None) -> int:
    """Mean best-so-far trajectory per seeding-generation count."""
    settings = load_config(config_path)
    _require(
        settings.problem in ("axisym_volume", "axisym_area"),
        "the seeding sweep is defined for the axisymmetric problems",
    )
    _require(
        settings.optimizer in ("mock", "llm"),
        "the seeding sweep varies n_ini, which the ga optimizer does not use",
    )
    _require(
        bool(nini_values) and all(v >= 1 for v in nini_values),
        "nini values must be positive integers",
    )
    _require(
        len(set(nini_values)) == len(nini_values), "nini values must be distinct"
    )
    base_out = Path(out) if out is not None else Path(settings.output_dir)
    mean_columns = {}
    final_bests: dict[int, list[float]] = {}
    for value in nini_values:
        sub = RunSettings(**{**settings.__dict__, "n_ini": value,
                             "output_dir": str(base_out / f"nini_{value}")})
        trajectories = []
        for seed in sub.seeds:
            run_dir = run_single_seed(sub, seed, resume=False)
            trajectories.append(_read_trajectory(run_dir / "trajectory.csv"))
        stacked = np.vstack(trajectories)
        mean_columns[value] = stacked.mean(axis=0)
        final_bests[value] = [float(t[-1]) for t in trajectories]
    sweep_path = base_out / "sweep_nini.csv"
    with open(sweep_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["generation"] + [f"nini{v}_mean_best_so_far" for v in nini_values]
        )
        for g in range(settings.budget):
            writer.writerow(
                [g] + [repr(float(mean_columns[v][g])) for v in nini_values]
            )
    with open(base_out / "sweep_summary.json", "w", encoding="utf-8") as handle:
        json.dump(
            {
                str(v): {
                    "final_bests": final_bests[v],
                    "mean_final_best": float(np.mean(final_bests[v])),
                }
                for v in nini_values
            },
            handle,
            indent=2,
        )
        handle.write("\n")
    print(sweep_path)
    return EXIT_OK


def cmd_evaluate(
    config_path: str,
    design_text: str,
    out: str | None,
    profile_out: str | None,
    traction_out: str | None,
) -> int:
    """Score one design vector outside any run."""
    settings = load_config(config_path)
    problem = make_problem(settings)
    try:
        design = np.array(
            [float(tok) for tok in design_text.replace(" ", "").split(",") if tok],
            dtype=float,
        )
    except ValueError as exc:
        raise ConfigError(f"cannot parse design vector: {exc}") from exc
    _require(
        design.shape == (problem.bounds.dimension,),
        f"design needs {problem.bounds.dimension} components, got {design.size}",
    )
    _require(
        problem.bounds.contains(design, atol=1e-9),
        "design lies outside the problem bounds",
    )
    report: dict = {
        "problem": settings.problem,
        "design": [float(v) for v in design],
        "encoded": [int(v) for v in encode_design(design, problem.bounds)],
    }
    if isinstance(problem, AxisymDragProblem):
        score, profile, drag = problem.evaluate_detail(design)
        report.update(
            score=score,
            normalized_drag=drag.normalized,
            drag_force=drag.drag,
            n_elements=drag.n_elements,
            scale_lambda=profile.lam,
        )
        if profile_out:
            export_profile_csv(profile, profile_out)
            report["profile_csv"] = profile_out
        if traction_out:
            mesh, (q_r, q_z) = problem.traction_profile(design)
            export_traction_csv(mesh, q_r, q_z, traction_out)
            report["traction_csv"] = traction_out
    else:
        report["score"] = float(problem.evaluate(design))
    text = json.dumps(report, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
        print(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shapeopt",
        description="Shape optimization runs: Gaussian search with a"
        " proposer-driven mean, or a genetic-algorithm baseline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute the configured optimization")
    p_run.add_argument("--config", required=True, help="JSON config path")
    p_run.add_argument("--out", help="override the configured output directory")
    p_run.add_argument(
        "--resume",
        action="store_true",
        help="continue from persisted records instead of refusing to overwrite",
    )

    p_cmp = sub.add_parser("compare", help="aggregate best-so-far across runs")
    p_cmp.add_argument(
        "--runs", nargs="+", required=True,
        help="run directories (each a seed dir or a directory of seed_* dirs)",
    )
    p_cmp.add_argument("--out", required=True, help="comparison CSV path")

    p_sweep = sub.add_parser(
        "sweep-nini", help="sweep the number of randomly seeded generations"
    )
    p_sweep.add_argument("--config", required=True, help="JSON config path")
    p_sweep.add_argument(
        "--nini", nargs="+", type=int, required=True, help="n_ini values to sweep"
    )
    p_sweep.add_argument("--out", help="override the configured output directory")

    p_eval = sub.add_parser("evaluate", help="score a single design vector")
    p_eval.add_argument("--config", required=True, help="JSON config path")
    p_eval.add_argument(
        "--design", required=True, help="comma-separated design components"
    )
    p_eval.add_argument("--out", help="write the JSON report here (default stdout)")
    p_eval.add_argument("--profile-out", help="meridian profile CSV (axisym only)")
    p_eval.add_argument("--traction-out", help="traction CSV (axisym only)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config, args.out, args.resume)
        if args.command == "compare":
            return cmd_compare(args.runs, args.out)
        if args.command == "sweep-nini":
            return cmd_sweep_nini(args.config, args.nini, args.out)
        return cmd_evaluate(
            args.config, args.design, args.out, args.profile_out, args.traction_out
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ProposerError as exc:
        print(f"proposer failure: {exc} (partial outputs preserved)", file=sys.stderr)
        return EXIT_PROPOSER
    except EvaluatorFatal as exc:
        print(f"evaluator failure: {exc}", file=sys.stderr)
        return EXIT_EVALUATOR


if __name__ == "__main__":
    raise SystemExit(main())
