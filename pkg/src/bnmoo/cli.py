"""Command-line interface.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .bn_model import BayesianNetwork, Dag, load_network, network_to_dict, save_network, to_dot
from .evalmetrics import compare, structural_confusion
from .harness import (
    TRACE_COLUMNS,
    ConfigError,
    ExperimentGrid,
    run_grid,
    write_dicts_csv,
)
from .hillclimb import HcConfig, hill_climb
from .likelihood import FamilyScorer
from .nsga2 import Nsga2Config, evolve, trace_rows
from .synth import forward_sample, inject_noise, random_cpts, random_dag, read_dataset_csv, write_dataset_csv

log = logging.getLogger("bnmoo")

DEFAULTS: dict[str, Any] = {
    "nodes": 15,
    "density": [0.2],
    "samples": [50],
    "noise": [0.0],
    "cpt_skew": 0.0,
    "pop_size": 100,
    "generations": 100,
    "pmu": None,
    "pchi": 0.9,
    "init_density": 0.1,
    "crossover": "single_point",
    "score": ["aic", "bic"],
    "complexity": "parameters",
    "max_iterations": 10_000,
    "restarts": 0,
    "reps": 50,
    "seed": 0,
    "out_dir": "out",
    "threads": 1,
}

FULL_GRID = {
    "nodes": 15,
    "density": [0.2, 0.5, 0.8],
    "samples": [50, 100, 500],
    "noise": [0.0, 0.1, 0.2],
    "reps": 50,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p, *flags):
    adders = {
        "nodes": lambda: p.add_argument("--nodes", type=int),
        "density": lambda: p.add_argument("--density", type=float, nargs="+"),
        "samples": lambda: p.add_argument("--samples", type=int, nargs="+"),
        "noise": lambda: p.add_argument("--noise", type=float, nargs="+"),
        "cpt_skew": lambda: p.add_argument("--cpt-skew", type=float, help="0 = flat Dirichlet rows"),
        "pop_size": lambda: p.add_argument("--pop-size", type=int),
        "generations": lambda: p.add_argument("--generations", type=int),
        "pmu": lambda: p.add_argument("--pmu", type=float, help="default 1/(n(n-1))"),
        "pchi": lambda: p.add_argument("--pchi", type=float),
        "init_density": lambda: p.add_argument("--init-density", type=float),
        "crossover": lambda: p.add_argument("--crossover", choices=["single_point", "uniform"]),
        "score": lambda: p.add_argument("--score", choices=["aic", "bic"], nargs="+"),
        "complexity": lambda: p.add_argument("--complexity", choices=["parameters", "edges"]),
        "max_iterations": lambda: p.add_argument("--max-iterations", type=int),
        "restarts": lambda: p.add_argument("--restarts", type=int),
        "reps": lambda: p.add_argument("--reps", type=int),
        "seed": lambda: p.add_argument("--seed", type=int),
        "out_dir": lambda: p.add_argument("--out-dir"),
        "threads": lambda: p.add_argument("--threads", type=int),
    }
    for f in flags:
        adders[f]()
    p.add_argument("--config", help="JSON or YAML file mirroring the flags")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bnmoo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="sample a ground-truth network and a dataset")
    _add_common(p, "nodes", "density", "samples", "noise", "cpt_skew", "seed", "out_dir")

    p = sub.add_parser("learn-nsga2", help="learn a Pareto front from a dataset CSV")
    p.add_argument("--data", required=True)
    _add_common(p, "pop_size", "generations", "pmu", "pchi", "init_density", "crossover", "seed", "out_dir")

    p = sub.add_parser("learn-hc", help="hill climbing with an AIC or BIC score")
    p.add_argument("--data", required=True)
    _add_common(p, "score", "complexity", "max_iterations", "restarts", "seed", "out_dir")

    p = sub.add_parser("evaluate", help="compare learned structures against a ground truth")
    p.add_argument("--truth", required=True, help="network JSON")
    p.add_argument("--learned", required=True, help="network JSON, HC result or front JSON")
    p.add_argument("--data", help="dataset CSV; adds log-likelihood to the output")
    p.add_argument("--undirected", action="store_true")

    p = sub.add_parser("experiment", help="run a scenario grid")
    _add_common(
        p, "nodes", "density", "samples", "noise", "cpt_skew", "pop_size", "generations",
        "pmu", "pchi", "init_density", "crossover", "score", "complexity", "max_iterations",
        "restarts", "reps", "seed", "out_dir", "threads",
    )
    p.add_argument("--full-grid", action="store_true", help="3 densities x 3 sizes x 3 noises, 50 reps")
    return parser


def _load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    doc = yaml.safe_load(text) if path.endswith((".yml", ".yaml")) else json.loads(text)
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a mapping")
    return {k.replace("-", "_"): v for k, v in doc.items()}


def resolve(args: argparse.Namespace) -> dict:
    """Defaults, then config file, then explicit flags."""
    opts = dict(DEFAULTS)
    if getattr(args, "full_grid", False):
        opts.update(FULL_GRID)
    if getattr(args, "config", None):
        file_opts = _load_config_file(args.config)
        unknown = set(file_opts) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        opts.update(file_opts)
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            opts[key] = value
    for key in ("density", "samples", "noise", "score"):
        if not isinstance(opts[key], list):
            opts[key] = [opts[key]]
    return opts


def _single(opts, key):
    if len(opts[key]) != 1:
        raise ConfigError(f"--{key} takes a single value for this command")
    return opts[key][0]


def _nsga_config(opts) -> Nsga2Config:
    return Nsga2Config(
        population_size=opts["pop_size"],
        generations=opts["generations"],
        p_mu=opts["pmu"],
        p_chi=opts["pchi"],
        seed=opts["seed"],
        init_density=opts["init_density"],
        crossover=opts["crossover"],
    )


def _hc_config(opts, score) -> HcConfig:
    return HcConfig(
        score=score,
        complexity=opts["complexity"],
        max_iterations=opts["max_iterations"],
        restarts=opts["restarts"],
        seed=opts["seed"],
    )


def _out_dir(opts) -> Path:
    out = Path(opts["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_generate(opts) -> None:
    rng = np.random.default_rng(opts["seed"])
    try:
        dag = random_dag(opts["nodes"], _single(opts, "density"), rng)
        bn = random_cpts(dag, None, rng, opts["cpt_skew"])
        clean = forward_sample(bn, _single(opts, "samples"), rng)
        noisy = inject_noise(clean, _single(opts, "noise"), rng)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _out_dir(opts)
    save_network(bn, out / "truth.json")
    (out / "truth.dot").write_text(to_dot(dag, "truth"))
    write_dataset_csv(clean, out / "data_clean.csv")
    write_dataset_csv(noisy, out / "data.csv")
    print(json.dumps({"edges": dag.edge_count, "samples": noisy.m, "out_dir": str(out)}))


def cmd_learn_nsga2(opts, args) -> None:
    data = read_dataset_csv(args.data)
    try:
        cfg = _nsga_config(opts)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    result = evolve(data, cfg, np.random.default_rng(cfg.seed), FamilyScorer(data))
    out = _out_dir(opts)
    (out / "front.json").write_text(json.dumps(result.front.to_records(), indent=1) + "\n")
    write_dicts_csv(out / "trace.csv", trace_rows(result.trace), TRACE_COLUMNS)
    print(json.dumps({"front_size": len(result.front), "evaluations": result.evaluations}))


def cmd_learn_hc(opts, args) -> None:
    data = read_dataset_csv(args.data)
    try:
        cfg = _hc_config(opts, _single(opts, "score"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    res = hill_climb(data, cfg, np.random.default_rng(cfg.seed))
    doc = network_to_dict(res.dag, data.arities)
    doc.update(
        score_kind=cfg.score,
        complexity=cfg.complexity,
        score_value=res.score,
        iterations=res.iterations,
        restarts_used=res.restarts_used,
    )
    out = _out_dir(opts)
    (out / "result.json").write_text(json.dumps(doc, indent=2) + "\n")
    (out / "result.dot").write_text(to_dot(res.dag, f"hc_{cfg.score}"))
    print(json.dumps({"score": res.score, "edges": res.dag.edge_count}))


def _learned_dags(path: str, n: int) -> list[Dag]:
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, list):
        return [Dag(n, frozenset(tuple(e) for e in rec["edges"])) for rec in doc]
    return [Dag(int(doc["n"]), frozenset(tuple(e) for e in doc["edges"]))]


def cmd_evaluate(args) -> None:
    truth = load_network(args.truth)
    truth_dag = truth.dag if isinstance(truth, BayesianNetwork) else truth
    scorer = FamilyScorer(read_dataset_csv(args.data)) if args.data else None
    rows = []
    for dag in _learned_dags(args.learned, truth_dag.n):
        c = structural_confusion(dag, truth_dag, directed=not args.undirected)
        row = {"edges": dag.edge_count, "tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn}
        row.update(compare(dag, truth_dag, directed=not args.undirected).as_dict())
        if scorer is not None:
            row["f1"] = scorer.log_likelihood(dag)
        rows.append(row)
    print(json.dumps(rows, indent=1))


def cmd_experiment(opts) -> None:
    try:
        grid = ExperimentGrid(
            n=opts["nodes"],
            densities=opts["density"],
            sample_sizes=opts["samples"],
            noises=opts["noise"],
            repetitions=opts["reps"],
            nsga2=_nsga_config(opts),
            hc=[_hc_config(opts, s) for s in opts["score"]],
            master_seed=opts["seed"],
            cpt_skew=opts["cpt_skew"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if opts["threads"] < 1:
        raise ConfigError("--threads must be positive")
    reports = run_grid(grid, opts["out_dir"], threads=opts["threads"])
    print(json.dumps({
        "scenarios": len(reports),
        "out_dir": str(opts["out_dir"]),
        "dominance_rates": [r.dominance_rates() for r in reports],
    }))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "evaluate":
            cmd_evaluate(args)
            return 0
        opts = resolve(args)
        if args.command == "generate":
            cmd_generate(opts)
        elif args.command == "learn-nsga2":
            cmd_learn_nsga2(opts, args)
        elif args.command == "learn-hc":
            cmd_learn_hc(opts, args)
        else:
            cmd_experiment(opts)
    except ConfigError as exc:
        print(f"bnmoo: configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        log.debug("failure", exc_info=True)
        print(f"bnmoo: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
