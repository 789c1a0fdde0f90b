"""Greedy best-improvement hill climbing over DAGs with AIC/BIC scores."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .bn_model import Dag, Dataset
from .likelihood import COMPLEXITIES, SCORE_KINDS, FamilyScorer
from .synth import random_dag

IMPROVEMENT_TOL = 1e-9


class Move(NamedTuple):
    kind: str  # "add", "delete" or "reverse"
    parent: int
    child: int


@dataclass
class HcConfig:
    score: str | None = "bic"  # None climbs the pure log-likelihood
    complexity: str = "parameters"
    max_iterations: int = 10_000
    restarts: int = 0
    seed: int = 0
    restart_density: float = 0.1

    def __post_init__(self):
        if self.score is not None and self.score not in SCORE_KINDS:
            raise ValueError(f"score must be one of {SCORE_KINDS} or None")
        if self.complexity not in COMPLEXITIES:
            raise ValueError(f"complexity must be one of {COMPLEXITIES}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.restarts < 0:
            raise ValueError("restarts must be non-negative")


@dataclass
class HcResult:
    dag: Dag
    score: float
    iterations: int
    restarts_used: int  # climbs performed, including the one from the empty graph
    trace: list[float] = field(default_factory=list)


def _reachable(adj: np.ndarray) -> np.ndarray:
    """reach[i, j]: a directed path of length >= 1 leads from i to j."""
    reach = adj.astype(bool)
    while True:
        nxt = reach | ((reach.astype(np.uint8) @ adj) > 0)
        if np.array_equal(nxt, reach):
            return reach
        reach = nxt


def _has_path_avoiding(adj: np.ndarray, src: int, dst: int) -> bool:
    """Path src -> dst that does not use the direct edge src -> dst."""
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    stack = [v for v in np.flatnonzero(adj[src]).tolist() if v != dst]
    while stack:
        u = stack.pop()
        if u == dst:
            return True
        if seen[u]:
            continue
        seen[u] = True
        stack.extend(np.flatnonzero(adj[u]).tolist())
    return False


def neighbor_moves(dag: Dag) -> list[Move]:
    """Acyclic single-edge additions, all deletions, acyclic reversals."""
    adj = dag.adjacency()
    reach = _reachable(adj)
    moves = []
    for i in range(dag.n):
        for j in range(dag.n):
            if i == j:
                continue
            if adj[i, j]:
                moves.append(Move("delete", i, j))
                if not _has_path_avoiding(adj, i, j):
                    moves.append(Move("reverse", i, j))
            elif not adj[j, i] and not reach[j, i]:
                moves.append(Move("add", i, j))
    return moves


def apply_move(dag: Dag, move: Move) -> Dag:
    edges = set(dag.edges)
    if move.kind == "add":
        edges.add((move.parent, move.child))
    elif move.kind == "delete":
        edges.remove((move.parent, move.child))
    else:
        edges.remove((move.parent, move.child))
        edges.add((move.child, move.parent))
    return Dag(dag.n, frozenset(edges))


def move_delta(
    parent_sets: list[tuple[int, ...]], move: Move, scorer: FamilyScorer, kind, complexity
) -> float:
    """Score change of ``move``, re-scoring only the touched families."""

    def fam(node, ps):
        return scorer.family_score(node, ps, kind, complexity)

    i, j = move.parent, move.child
    pj = parent_sets[j]
    if move.kind == "add":
        new_pj = tuple(sorted(pj + (i,)))
        return fam(j, new_pj) - fam(j, pj)
    new_pj = tuple(p for p in pj if p != i)
    delta = fam(j, new_pj) - fam(j, pj)
    if move.kind == "reverse":
        pi = parent_sets[i]
        delta += fam(i, tuple(sorted(pi + (j,)))) - fam(i, pi)
    return delta


def _climb(start: Dag, scorer: FamilyScorer, config: HcConfig, rng: np.random.Generator):
    dag = start
    score = scorer.score(dag, config.score, config.complexity)
    trace = [score]
    iterations = 0
    while iterations < config.max_iterations:
        parent_sets = dag.parent_sets()
        moves = neighbor_moves(dag)
        if not moves:
            break
        deltas = np.asarray(
            [move_delta(parent_sets, mv, scorer, config.score, config.complexity) for mv in moves]
        )
        best = deltas.max()
        if best <= IMPROVEMENT_TOL:
            break
        ties = np.flatnonzero(deltas >= best - 1e-12)
        pick = ties[0] if ties.size == 1 else ties[int(rng.integers(ties.size))]
        dag = apply_move(dag, moves[pick])
        # recompute rather than accumulate deltas to keep the trace exact
        score = scorer.score(dag, config.score, config.complexity)
        trace.append(score)
        iterations += 1
    return dag, score, iterations, trace


def hill_climb(
    dataset: Dataset,
    config: HcConfig,
    rng: np.random.Generator | None = None,
    scorer: FamilyScorer | None = None,
) -> HcResult:
    """Best-improvement climb from the empty graph, plus optional random restarts."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    if scorer is None:
        scorer = FamilyScorer(dataset)
    best: HcResult | None = None
    for r in range(config.restarts + 1):
        start = (
            Dag(dataset.n)
            if r == 0
            else random_dag(dataset.n, config.restart_density, rng)
        )
        dag, score, iterations, trace = _climb(start, scorer, config, rng)
        if best is None or score > best.score:
            best = HcResult(dag, score, iterations, 0, trace)
    best.restarts_used = config.restarts + 1
    return best


def is_local_optimum(dag: Dag, scorer: FamilyScorer, config: HcConfig) -> bool:
    parent_sets = dag.parent_sets()
    return all(
        move_delta(parent_sets, mv, scorer, config.score, config.complexity) <= IMPROVEMENT_TOL
        for mv in neighbor_moves(dag)
    )
