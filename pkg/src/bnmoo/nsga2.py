"""NSGA-II over bitstring genomes: maximize log-likelihood, minimize arc count.

Random-number consumption is sequential and fixed, so a seed fully determines
a run. Per offspring pair, :func:`make_offspring` draws, in order: tournament
one (two distinct indices, then a coin only on a tie), tournament two,
the crossover decision, the cut point (or uniform mask) if crossing over,
one uniform per bit for each child's mutation mask, then the cycle-repair
choices of child one and child two.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .bn_model import Dag, Dataset, Genome, genome_from_adjacency, genome_length, repair_adjacency
from .likelihood import FamilyScorer

CROSSOVERS = ("single_point", "uniform")


@dataclass
class Individual:
    genome: Genome
    dag: Dag
    f1: float
    f2: int
    rank: int | None = None
    crowding: float | None = None

    @property
    def objectives(self) -> tuple[float, int]:
        return self.f1, self.f2

    def to_record(self) -> dict:
        return {
            "edges": [list(e) for e in self.dag.sorted_edges()],
            "f1": self.f1,
            "f2": self.f2,
            "rank": self.rank,
            "crowding": _json_float(self.crowding),
        }


def _json_float(x):
    if x is None:
        return None
    return "inf" if x == float("inf") else float(x)


@dataclass
class Nsga2Config:
    population_size: int = 100
    generations: int = 100
    p_mu: float | None = None  # None -> 1 / (n (n - 1))
    p_chi: float = 0.9
    seed: int = 0
    init_density: float = 0.1
    crossover: str = "single_point"

    def __post_init__(self):
        if self.population_size < 4 or self.population_size % 2:
            raise ValueError("population size must be an even integer >= 4")
        if self.generations < 0:
            raise ValueError("generations must be non-negative")
        for name in ("p_chi", "init_density"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.p_mu is not None and not 0.0 <= self.p_mu <= 1.0:
            raise ValueError("p_mu must lie in [0, 1]")
        if self.crossover not in CROSSOVERS:
            raise ValueError(f"crossover must be one of {CROSSOVERS}")

    def mutation_rate(self, n: int) -> float:
        if self.p_mu is not None:
            return self.p_mu
        return 1.0 / genome_length(n) if n > 1 else 0.0


@dataclass
class ParetoFront:
    """Rank-1 members ordered by ascending arc count, ties by descending f1."""

    members: list[Individual]

    def __post_init__(self):
        self.members = sorted(self.members, key=lambda ind: (ind.f2, -ind.f1))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def to_records(self) -> list[dict]:
        return [ind.to_record() for ind in self.members]


@dataclass
class GenerationStats:
    generation: int
    best_f1: float
    median_f1: float
    best_f2: int
    front_size: int


@dataclass
class EvolutionResult:
    front: ParetoFront
    trace: list[GenerationStats]
    population: list[Individual] = field(repr=False)
    evaluations: int = 0


class Comparison(enum.Enum):
    A_BETTER = 1
    B_BETTER = -1
    TIE = 0


def _point(x) -> tuple[float, float]:
    if isinstance(x, Individual):
        return x.f1, x.f2
    f1, f2 = x
    return f1, f2


def dominates(a, b) -> bool:
    """``a`` dominates ``b``: f1 no lower, f2 no higher, one strictly better.

    Accepts :class:`Individual` objects or raw ``(f1, f2)`` pairs.
    """
    a1, a2 = _point(a)
    b1, b2 = _point(b)
    return a1 >= b1 and a2 <= b2 and (a1 > b1 or a2 < b2)


def _maximization_matrix(population: Sequence) -> np.ndarray:
    pts = np.asarray([_point(x) for x in population], dtype=np.float64).reshape(-1, 2)
    pts[:, 1] = -pts[:, 1]
    return pts


def fast_non_dominated_sort(population: Sequence) -> list[list[int]]:
    """Partition indices into fronts; front 0 is non-dominated.

    Individuals get ``rank`` set to their 1-based front number. Indices within
    a front are ascending.
    """
    if len(population) == 0:
        raise ValueError("cannot sort an empty population")
    ranks = kernels.nondominated_ranks(_maximization_matrix(population))
    fronts: list[list[int]] = [[] for _ in range(int(ranks.max()) + 1)]
    for i, r in enumerate(ranks.tolist()):
        fronts[r].append(i)
        if isinstance(population[i], Individual):
            population[i].rank = r + 1
    return fronts


def crowding_distance(front: Sequence) -> list[float]:
    """Per-member crowding distance (assigned to Individuals as a side effect)."""
    k = len(front)
    dist = np.zeros(k)
    if k <= 2:
        dist[:] = np.inf
    else:
        pts = np.asarray([_point(x) for x in front], dtype=np.float64)
        for obj in range(pts.shape[1]):
            order = np.argsort(pts[:, obj], kind="stable")
            vals = pts[order, obj]
            dist[order[0]] = np.inf
            dist[order[-1]] = np.inf
            span = vals[-1] - vals[0]
            if span == 0:
                continue
            dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    out = dist.tolist()
    for x, d in zip(front, out):
        if isinstance(x, Individual):
            x.crowding = d
    return out


def crowded_compare(a: Individual, b: Individual) -> Comparison:
    if a.rank is None or b.rank is None or a.crowding is None or b.crowding is None:
        raise ValueError("rank and crowding must be assigned before comparison")
    if a.rank != b.rank:
        return Comparison.A_BETTER if a.rank < b.rank else Comparison.B_BETTER
    if a.crowding != b.crowding:
        return Comparison.A_BETTER if a.crowding > b.crowding else Comparison.B_BETTER
    return Comparison.TIE


def _evaluate(adj: np.ndarray, scorer: FamilyScorer, rng: np.random.Generator) -> Individual:
    """Repair ``adj`` in place, write the result back into the genome, score it."""
    repair_adjacency(adj, rng)
    dag = Dag.from_adjacency(adj)
    return Individual(genome_from_adjacency(adj), dag, scorer.log_likelihood(dag), dag.edge_count)


def _tournament(parents: Sequence[Individual], rng: np.random.Generator) -> Individual:
    i, j = rng.choice(len(parents), size=2, replace=False)
    outcome = crowded_compare(parents[i], parents[j])
    if outcome is Comparison.TIE:
        return parents[i] if rng.random() < 0.5 else parents[j]
    return parents[i] if outcome is Comparison.A_BETTER else parents[j]


def make_offspring(
    parents: Sequence[Individual],
    config: Nsga2Config,
    scorer: FamilyScorer,
    rng: np.random.Generator,
) -> list[Individual]:
    """Q children via tournament, crossover, bit-flip mutation and cycle repair."""
    q = config.population_size
    n = parents[0].genome.n
    length = genome_length(n)
    p_mu = config.mutation_rate(n)
    children = []
    while len(children) < q:
        a = _tournament(parents, rng).genome.bits
        b = _tournament(parents, rng).genome.bits
        if rng.random() < config.p_chi and length >= 2:
            if config.crossover == "single_point":
                cut = int(rng.integers(1, length))
                c1 = np.concatenate([a[:cut], b[cut:]])
                c2 = np.concatenate([b[:cut], a[cut:]])
            else:
                mask = rng.random(length) < 0.5
                c1 = np.where(mask, a, b)
                c2 = np.where(mask, b, a)
        else:
            c1, c2 = a.copy(), b.copy()
        flips = rng.random((2, length)) < p_mu
        for bits, flip in ((c1, flips[0]), (c2, flips[1])):
            bits = np.bitwise_xor(bits, flip.astype(np.uint8))
            children.append(_evaluate(Genome(n, bits).adjacency(), scorer, rng))
    return children[:q]


def _assign_ranks_and_crowding(population: list[Individual]) -> list[list[int]]:
    fronts = fast_non_dominated_sort(population)
    for front in fronts:
        crowding_distance([population[i] for i in front])
    return fronts


def _select(union: list[Individual], q: int) -> list[Individual]:
    fronts = _assign_ranks_and_crowding(union)
    chosen: list[Individual] = []
    for front in fronts:
        members = [union[i] for i in front]
        if len(chosen) + len(members) <= q:
            chosen.extend(members)
            if len(chosen) == q:
                break
        else:
            members.sort(key=lambda ind: -ind.crowding)
            chosen.extend(members[: q - len(chosen)])
            break
    return chosen


def _stats(generation: int, population: list[Individual]) -> GenerationStats:
    f1 = np.asarray([ind.f1 for ind in population])
    return GenerationStats(
        generation=generation,
        best_f1=float(f1.max()),
        median_f1=float(np.median(f1)),
        best_f2=min(ind.f2 for ind in population),
        front_size=sum(1 for ind in population if ind.rank == 1),
    )


def _check_front(population: list[Individual]) -> None:
    front = [ind for ind in population if ind.rank == 1]
    for a in front:
        for b in front:
            if dominates(a, b):
                raise AssertionError("rank-1 member dominated by another rank-1 member")
    for ind in population:
        if ind.f2 != ind.dag.edge_count:
            raise AssertionError("arc-count objective out of sync with DAG")


def pareto_front(population: Sequence[Individual]) -> ParetoFront:
    """Rank-1 members with duplicate edge sets removed."""
    seen = set()
    members = []
    for ind in population:
        if ind.rank == 1 and ind.dag.edges not in seen:
            seen.add(ind.dag.edges)
            members.append(ind)
    return ParetoFront(members)


def evolve(
    dataset: Dataset,
    config: Nsga2Config,
    rng: np.random.Generator | None = None,
    scorer: FamilyScorer | None = None,
    check_invariants: bool = False,
) -> EvolutionResult:
    """Run NSGA-II for ``config.generations`` generations and return the final front."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    if scorer is None:
        scorer = FamilyScorer(dataset)
    n = dataset.n
    length = genome_length(n)
    q = config.population_size

    population = []
    for _ in range(q):
        bits = (rng.random(length) < config.init_density).astype(np.uint8)
        population.append(_evaluate(Genome(n, bits).adjacency(), scorer, rng))
    _assign_ranks_and_crowding(population)
    trace = [_stats(0, population)]
    evaluations = q

    for generation in range(1, config.generations + 1):
        offspring = make_offspring(population, config, scorer, rng)
        evaluations += len(offspring)
        population = _select(population + offspring, q)
        if check_invariants:
            _check_front(population)
        trace.append(_stats(generation, population))

    return EvolutionResult(pareto_front(population), trace, population, evaluations)


def trace_rows(trace: Sequence[GenerationStats]) -> list[dict]:
    return [vars(t).copy() for t in trace]
