"""Scenario grid orchestration, seeded repetitions and report writing.

Random streams: repetition ``r`` of scenario ``s`` under master seed ``S``
uses ``numpy.random.SeedSequence([S, s, r])``. Its ``spawn`` children feed, in
order, data generation, NSGA-II, and one child per hill-climbing config.
Results therefore do not depend on worker count or scheduling.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .bn_model import Dag, Dataset, network_to_dict, to_dot
from .evalmetrics import SLOTS, aggregate, compare, front_dominates_point, front_summary
from .hillclimb import HcConfig, hill_climb
from .likelihood import FamilyScorer
from .nsga2 import Nsga2Config, evolve, trace_rows
from .synth import ScenarioConfig, forward_sample, inject_noise, random_cpts, random_dag, write_dataset_csv

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
METRIC_COLUMNS = [
    "scenario_id", "density", "m", "noise", "repetition",
    "algorithm", "slot", "f1", "f2", "precision", "recall", "specificity",
]
TRACE_COLUMNS = ["generation", "best_f1", "median_f1", "best_f2", "front_size"]


class ConfigError(ValueError):
    pass


def repetition_seed(master_seed: int, scenario_id: int, repetition: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master_seed), int(scenario_id), int(repetition)])


def hc_name(cfg: HcConfig) -> str:
    return f"hc_{cfg.score}" if cfg.score else "hc_ll"


@dataclass
class ExperimentGrid:
    n: int = 15
    densities: Sequence[float] = (0.2, 0.5, 0.8)
    sample_sizes: Sequence[int] = (50, 100, 500)
    noises: Sequence[float] = (0.0, 0.1, 0.2)
    repetitions: int = 50
    nsga2: Nsga2Config = field(default_factory=Nsga2Config)
    hc: list[HcConfig] = field(
        default_factory=lambda: [HcConfig(score="aic"), HcConfig(score="bic")]
    )
    master_seed: int = 0
    cpt_skew: float = 0.0

    def __post_init__(self):
        for name in ("densities", "sample_sizes", "noises"):
            if len(getattr(self, name)) == 0:
                raise ConfigError(f"grid dimension {name!r} is empty")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be positive")
        if not self.hc:
            raise ConfigError("at least one hill-climbing baseline is required")
        names = [hc_name(c) for c in self.hc]
        if len(set(names)) != len(names):
            raise ConfigError("hill-climbing baselines must use distinct score kinds")
        try:
            self.scenarios()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def scenarios(self) -> list[ScenarioConfig]:
        """Density-major order; the list index is the scenario id."""
        return [
            ScenarioConfig(n=self.n, density=d, m=m, noise=e, seed=self.master_seed)
            for d, m, e in itertools.product(self.densities, self.sample_sizes, self.noises)
        ]


def _point(f1: float, f2: int) -> dict:
    return {"f1": f1, "f2": f2}


def _solution(dag: Dag, scorer: FamilyScorer, truth: Dag) -> dict:
    out = {
        "edges": [list(e) for e in dag.sorted_edges()],
        "f1": scorer.log_likelihood(dag),
        "f2": dag.edge_count,
    }
    out.update(compare(dag, truth).as_dict())
    return out


def run_repetition(
    scenario: ScenarioConfig,
    scenario_id: int,
    repetition: int,
    nsga_cfg: Nsga2Config,
    hc_cfgs: Sequence[HcConfig],
    master_seed: int,
    cpt_skew: float = 0.0,
) -> dict:
    """One seeded repetition: fresh truth, data, noise, all learners, metrics."""
    streams = repetition_seed(master_seed, scenario_id, repetition).spawn(2 + len(hc_cfgs))
    data_rng = np.random.default_rng(streams[0])
    truth_bn = random_cpts(random_dag(scenario.n, scenario.density, data_rng), None, data_rng, cpt_skew)
    truth = truth_bn.dag
    clean = forward_sample(truth_bn, scenario.m, data_rng)
    noisy = inject_noise(clean, scenario.noise, data_rng)

    scorer = FamilyScorer(noisy)
    result = evolve(noisy, nsga_cfg, np.random.default_rng(streams[1]), scorer)
    summary = front_summary(result.front, truth)
    front = []
    for ind in result.front:
        rec = ind.to_record()
        rec.update(compare(ind.dag, truth).as_dict())
        front.append(rec)
    representatives = []
    for slot, ind, met in zip(SLOTS, summary.representatives, summary.metrics):
        rec = {"slot": slot, "edges": [list(e) for e in ind.dag.sorted_edges()], "f1": ind.f1, "f2": ind.f2}
        rec.update(met.as_dict())
        representatives.append(rec)

    truth_point = _point(scorer.log_likelihood(truth), truth.edge_count)
    baselines = {}
    dominance = {"truth": front_dominates_point(result.front, (truth_point["f1"], truth_point["f2"]))}
    for cfg, stream in zip(hc_cfgs, streams[2:]):
        hc = hill_climb(noisy, cfg, np.random.default_rng(stream), scorer)
        sol = _solution(hc.dag, scorer, truth)
        sol.update(
            score_kind=cfg.score,
            complexity=cfg.complexity,
            score_value=hc.score,
            iterations=hc.iterations,
            restarts_used=hc.restarts_used,
        )
        name = hc_name(cfg)
        baselines[name] = sol
        dominance[name] = front_dominates_point(result.front, (sol["f1"], sol["f2"]))

    return {
        "repetition": repetition,
        "status": "ok",
        "truth": network_to_dict(truth_bn),
        "truth_point": truth_point,
        "nsga2": {
            "front": front,
            "representatives": representatives,
            "evaluations": result.evaluations,
        },
        "baselines": baselines,
        "dominance": dominance,
        # not serialized into the report; consumed by the writer
        "_data": {"clean": clean.cells, "noisy": noisy.cells, "arities": noisy.arities},
        "_trace": trace_rows(result.trace),
    }


def _safe_repetition(args) -> dict:
    scenario_id, r = args[1], args[2]
    try:
        return run_repetition(*args)
    except Exception as exc:  # one bad repetition must not sink the scenario
        log.exception("scenario %d repetition %d failed", scenario_id, r)
        return {"repetition": r, "status": "failed", "error": f"{type(exc).__name__}: {exc}"}


@dataclass
class ScenarioReport:
    scenario_id: int
    config: ScenarioConfig
    nsga2: Nsga2Config
    hc: list[HcConfig]
    master_seed: int
    records: list[dict]

    @property
    def algorithms(self) -> list[str]:
        return ["nsga2"] + [hc_name(c) for c in self.hc]

    def ok_records(self) -> list[dict]:
        return [r for r in self.records if r["status"] == "ok"]

    def aggregates(self) -> dict:
        ok = self.ok_records()
        out: dict = {"nsga2": {}}
        for k, slot in enumerate(SLOTS):
            reps = [r["nsga2"]["representatives"][k] for r in ok]
            out["nsga2"][slot] = {
                key: aggregate(rep[key] for rep in reps).as_dict()
                for key in ("f1", "f2", "precision", "recall", "specificity")
            }
        for name in self.algorithms[1:]:
            sols = [r["baselines"][name] for r in ok]
            out[name] = {
                key: aggregate(s[key] for s in sols).as_dict()
                for key in ("f1", "f2", "precision", "recall", "specificity")
            }
        out["truth"] = {
            key: aggregate(r["truth_point"][key] for r in ok).as_dict() for key in ("f1", "f2")
        }
        return out

    def dominance_rates(self) -> dict:
        ok = self.ok_records()
        keys = self.algorithms[1:] + ["truth"]
        if not ok:
            return {k: None for k in keys}
        return {k: sum(r["dominance"][k] for r in ok) / len(ok) for k in keys}

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "scenario_id": self.scenario_id,
            "scenario": asdict(self.config),
            "nsga2_config": asdict(self.nsga2),
            "hc_configs": [asdict(c) for c in self.hc],
            "master_seed": self.master_seed,
            "repetitions": len(self.records),
            "failed_repetitions": sum(r["status"] != "ok" for r in self.records),
            "records": [
                {k: v for k, v in r.items() if not k.startswith("_")} for r in self.records
            ],
            "aggregate": self.aggregates(),
            "dominance_rates": self.dominance_rates(),
        }

    def metric_rows(self) -> list[dict]:
        rows = []
        base = {
            "scenario_id": self.scenario_id,
            "density": self.config.density,
            "m": self.config.m,
            "noise": self.config.noise,
        }
        for r in self.ok_records():
            sols = [("nsga2", rep["slot"], rep) for rep in r["nsga2"]["representatives"]]
            sols += [(name, "solution", r["baselines"][name]) for name in self.algorithms[1:]]
            for algo, slot, sol in sols:
                row = dict(base, repetition=r["repetition"], algorithm=algo, slot=slot)
                for key in ("f1", "f2", "precision", "recall", "specificity"):
                    row[key] = "" if sol[key] is None else sol[key]
                rows.append(row)
        return rows

    def plot_data(self) -> dict:
        """Three panels: objective plane, precision-recall, sensitivity-specificity."""
        agg = self.aggregates()

        def pick(entry, x, y):
            return {
                f"{x}_mean": entry[x]["mean"], f"{x}_std": entry[x]["std"],
                f"{y}_mean": entry[y]["mean"], f"{y}_std": entry[y]["std"],
            }

        panels = {}
        for panel, (x, y) in {
            "objective_plane": ("f2", "f1"),
            "precision_recall": ("recall", "precision"),
            "sensitivity_specificity": ("specificity", "recall"),
        }.items():
            series = {"nsga2": [dict(slot=s, **pick(agg["nsga2"][s], x, y)) for s in SLOTS]}
            for name in self.algorithms[1:]:
                series[name] = pick(agg[name], x, y)
            if panel == "objective_plane":
                series["truth"] = pick(agg["truth"], x, y)
            panels[panel] = {"x": x, "y": y, "series": series}
        return {"schema": SCHEMA_VERSION, "scenario_id": self.scenario_id, "panels": panels}


def run_scenario(
    config: ScenarioConfig,
    nsga_cfg: Nsga2Config,
    hc_cfgs: Sequence[HcConfig],
    repetitions: int,
    master_seed: int,
    scenario_id: int = 0,
    threads: int = 1,
    cpt_skew: float = 0.0,
) -> ScenarioReport:
    jobs = [
        (config, scenario_id, r, nsga_cfg, list(hc_cfgs), master_seed, cpt_skew)
        for r in range(repetitions)
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_safe_repetition, jobs))
    else:
        records = [_safe_repetition(job) for job in jobs]
    return ScenarioReport(scenario_id, config, nsga_cfg, list(hc_cfgs), master_seed, records)


def scenario_label(report: ScenarioReport) -> str:
    c = report.config
    return f"scenario_{report.scenario_id:02d}_d{c.density:g}_m{c.m}_e{c.noise:g}"


def write_dicts_csv(path: Path, rows: list[dict], columns: Sequence[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def write_scenario(report: ScenarioReport, out_dir: Path) -> Path:
    """Report JSON, plot data, and per-repetition datasets, DOT files and traces."""
    out_dir = Path(out_dir)
    label = scenario_label(report)
    try:
        for sub in ("reports", "plots"):
            (out_dir / sub).mkdir(parents=True, exist_ok=True)
        report_path = out_dir / "reports" / f"{label}.json"
        report_path.write_text(json.dumps(report.to_dict(), indent=1) + "\n")
        (out_dir / "plots" / f"{label}.json").write_text(
            json.dumps(report.plot_data(), indent=1) + "\n"
        )
        for rec in report.ok_records():
            rep_dir = out_dir / label / f"rep_{rec['repetition']:03d}"
            rep_dir.mkdir(parents=True, exist_ok=True)
            arities = rec["_data"]["arities"]
            write_dataset_csv(Dataset(rec["_data"]["clean"], arities), rep_dir / "data_clean.csv")
            write_dataset_csv(Dataset(rec["_data"]["noisy"], arities), rep_dir / "data.csv")
            n = rec["truth"]["n"]
            dots = {"truth": rec["truth"]["edges"]}
            dots.update({f"nsga2_{r['slot']}": r["edges"] for r in rec["nsga2"]["representatives"]})
            dots.update({name: sol["edges"] for name, sol in rec["baselines"].items()})
            for name, edges in dots.items():
                dag = Dag(n, frozenset(tuple(e) for e in edges))
                (rep_dir / f"{name}.dot").write_text(to_dot(dag, name))
            write_dicts_csv(rep_dir / "trace.csv", rec["_trace"], TRACE_COLUMNS)
    except OSError as exc:
        raise OSError(f"{label}: {exc}") from exc
    return report_path


def run_grid(grid: ExperimentGrid, out_dir, threads: int = 1) -> list[ScenarioReport]:
    """Run every scenario, writing one report per scenario and a combined metrics CSV."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = []
    rows: list[dict] = []
    for sid, scenario in enumerate(grid.scenarios()):
        log.info("scenario %d: %s", sid, scenario)
        report = run_scenario(
            scenario, grid.nsga2, grid.hc, grid.repetitions, grid.master_seed,
            scenario_id=sid, threads=threads, cpt_skew=grid.cpt_skew,
        )
        write_scenario(report, out_dir)
        rows.extend(report.metric_rows())
        reports.append(report)
    write_dicts_csv(out_dir / "metrics.csv", rows, METRIC_COLUMNS)
    return reports
