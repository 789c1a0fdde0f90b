"""Structural comparison against ground truth and Pareto-front summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .bn_model import Dag
from .nsga2 import Individual, ParetoFront, dominates

SLOTS = ("min", "q1", "median", "q3", "max")
QUANTILES = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class StructuralConfusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class Metrics:
    """``None`` marks an undefined ratio (0/0), which is not the same as 0."""

    precision: float | None
    recall: float | None
    specificity: float | None

    @property
    def sensitivity(self) -> float | None:
        return self.recall

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "specificity": self.specificity,
        }


def structural_confusion(learned: Dag, truth: Dag, directed: bool = True) -> StructuralConfusion:
    """Confusion counts over ordered pairs (or unordered pairs with ``directed=False``).

    In the directed mode a reversed edge counts as one false positive and one
    false negative.
    """
    if learned.n != truth.n:
        raise ValueError(f"graph sizes differ: {learned.n} vs {truth.n}")
    n = truth.n
    if directed:
        a, b = learned.edges, truth.edges
        pairs = n * (n - 1)
    else:
        a = {frozenset(e) for e in learned.edges}
        b = {frozenset(e) for e in truth.edges}
        pairs = n * (n - 1) // 2
    tp = len(a & b)
    fp = len(a - b)
    fn = len(b - a)
    return StructuralConfusion(tp, fp, pairs - tp - fp - fn, fn)


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def metrics(c: StructuralConfusion) -> Metrics:
    return Metrics(
        precision=_ratio(c.tp, c.tp + c.fp),
        recall=_ratio(c.tp, c.tp + c.fn),
        specificity=_ratio(c.tn, c.tn + c.fp),
    )


def compare(learned: Dag, truth: Dag, directed: bool = True) -> Metrics:
    return metrics(structural_confusion(learned, truth, directed))


@dataclass
class FrontSummary:
    representatives: list[Individual]
    metrics: list[Metrics] | None = None

    @property
    def slots(self) -> tuple[str, ...]:
        return SLOTS[: len(self.representatives)]


def quartile_indices(k: int) -> list[int]:
    """Positions ``round(q (k - 1))`` for q in 0, .25, .5, .75, 1 (half to even)."""
    return [int(round(q * (k - 1))) for q in QUANTILES]


def front_summary(
    front: ParetoFront | Sequence[Individual], truth: Dag | None = None, directed: bool = True
) -> FrontSummary:
    """Extremes and quartiles of the front ordered by ascending f1."""
    members = sorted(front, key=lambda ind: ind.f1)
    if not members:
        raise ValueError("cannot summarize an empty front")
    reps = [members[i] for i in quartile_indices(len(members))]
    mets = [compare(r.dag, truth, directed) for r in reps] if truth is not None else None
    return FrontSummary(reps, mets)


def front_dominates_point(front: Iterable, baseline) -> bool:
    return any(dominates(member, baseline) for member in front)


@dataclass(frozen=True)
class Aggregate:
    mean: float | None
    std: float | None
    count: int
    excluded: int

    def as_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "count": self.count, "excluded": self.excluded}


def aggregate(values: Iterable[float | None]) -> Aggregate:
    """Mean and population standard deviation, skipping undefined values."""
    vals = list(values)
    defined = [v for v in vals if v is not None and not math.isnan(v)]
    excluded = len(vals) - len(defined)
    if not defined:
        return Aggregate(None, None, 0, excluded)
    mean = sum(defined) / len(defined)
    var = sum((v - mean) ** 2 for v in defined) / len(defined)
    return Aggregate(mean, math.sqrt(var), len(defined), excluded)
