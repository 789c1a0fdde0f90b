"""Maximum-likelihood fitting, log-likelihood and AIC/BIC scores.

All logarithms are natural. The log-likelihood uses ML parameters with the
``0 ln 0 = 0`` convention, so it is finite and never positive.
"""

from __future__ import annotations

import math
from math import prod
from typing import Sequence

import numpy as np

from . import kernels
from .bn_model import BayesianNetwork, Cpt, Dag, Dataset, config_index, parameter_count

SCORE_KINDS = ("aic", "bic")
COMPLEXITIES = ("parameters", "edges")


def _check_dims(dag: Dag, data: Dataset) -> None:
    if dag.n != data.n:
        raise ValueError(f"DAG has {dag.n} nodes but dataset has {data.n} variables")


def fit_ml_parameters(dag: Dag, data: Dataset, pseudo_count: float = 0.0) -> BayesianNetwork:
    """Empirical conditional frequencies; unobserved parent configurations get uniform rows.

    ``pseudo_count`` adds a Dirichlet pseudo-count to every cell (0 = pure ML).
    """
    _check_dims(dag, data)
    cpts = []
    for i, parents in enumerate(dag.parent_sets()):
        par_ar = [data.arities[p] for p in parents]
        rows = prod(par_ar)
        arity = data.arities[i]
        cfg = config_index(data.cells[:, list(parents)], par_ar)
        counts = np.bincount(cfg * arity + data.cells[:, i], minlength=rows * arity)
        counts = counts.reshape(rows, arity).astype(np.float64) + pseudo_count
        totals = counts.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            table = np.where(totals > 0, counts / totals, 1.0 / arity)
        cpts.append(Cpt(i, parents, table))
    return BayesianNetwork(dag, tuple(cpts), data.arities)


def family_loglik(data: Dataset, node: int, parents: Sequence[int]) -> float:
    return kernels.family_loglik(
        data.cells, node, np.asarray(parents, dtype=np.int64), np.asarray(data.arities)
    )


def log_likelihood(dag: Dag, data: Dataset) -> float:
    """LL(D|G) at the maximum-likelihood parameters."""
    _check_dims(dag, data)
    return sum(family_loglik(data, i, ps) for i, ps in enumerate(dag.parent_sets()))


def data_log_probability(bn: BayesianNetwork, data: Dataset) -> float:
    """Log-probability of ``data`` under the given (not refitted) parameters."""
    _check_dims(bn.dag, data)
    total = 0.0
    for cpt in bn.cpts:
        par_ar = [bn.arities[p] for p in cpt.parent_set]
        cfg = config_index(data.cells[:, list(cpt.parent_set)], par_ar)
        probs = cpt.table[cfg, data.cells[:, cpt.node]]
        with np.errstate(divide="ignore"):
            total += float(np.sum(np.log(probs)))
    return total


def _check_kind(kind: str, complexity: str) -> None:
    if kind not in SCORE_KINDS:
        raise ValueError(f"score kind must be one of {SCORE_KINDS}, got {kind!r}")
    if complexity not in COMPLEXITIES:
        raise ValueError(f"complexity must be one of {COMPLEXITIES}, got {complexity!r}")


def penalty_weight(kind: str, m: int) -> float:
    """Penalty per unit of model size: 1 for AIC, ln(m)/2 for BIC."""
    return 1.0 if kind == "aic" else 0.5 * math.log(m)


def model_size(dag: Dag, arities: Sequence[int], complexity: str = "parameters") -> int:
    return parameter_count(dag, arities) if complexity == "parameters" else dag.edge_count


def regularized_score(
    dag: Dag, data: Dataset, kind: str = "bic", complexity: str = "parameters"
) -> float:
    """LL(D|G) - R(G) with R = |G| (AIC) or |G| ln(m) / 2 (BIC)."""
    _check_kind(kind, complexity)
    _check_dims(dag, data)
    size = model_size(dag, data.arities, complexity)
    return log_likelihood(dag, data) - penalty_weight(kind, data.m) * size


class FamilyScorer:
    """Cached per-family log-likelihoods for one dataset.

    Keys are ``(node, sorted parent tuple)``. Dict reads and writes are atomic
    under the GIL, and a duplicate insert stores the same value, so one scorer
    can be shared between threads.
    """

    def __init__(self, data: Dataset):
        self.data = data
        self._arities = np.asarray(data.arities, dtype=np.int64)
        self._cache: dict[tuple[int, tuple[int, ...]], float] = {}
        self.hits = 0
        self.misses = 0

    def family(self, node: int, parents: tuple[int, ...]) -> float:
        key = (node, parents)
        value = self._cache.get(key)
        if value is None:
            self.misses += 1
            value = kernels.family_loglik(
                self.data.cells, node, np.asarray(parents, dtype=np.int64), self._arities
            )
            self._cache[key] = value
        else:
            self.hits += 1
        return value

    def log_likelihood(self, dag: Dag) -> float:
        _check_dims(dag, self.data)
        return sum(self.family(i, ps) for i, ps in enumerate(dag.parent_sets()))

    def family_penalty(
        self, node: int, parents: tuple[int, ...], kind: str, complexity: str
    ) -> float:
        ar = self.data.arities
        size = (
            (ar[node] - 1) * prod(ar[p] for p in parents)
            if complexity == "parameters"
            else len(parents)
        )
        return penalty_weight(kind, self.data.m) * size

    def family_score(
        self, node: int, parents: tuple[int, ...], kind: str | None, complexity: str
    ) -> float:
        """Family log-likelihood minus its share of the penalty (none if ``kind`` is None)."""
        ll = self.family(node, parents)
        if kind is None:
            return ll
        return ll - self.family_penalty(node, parents, kind, complexity)

    def score(self, dag: Dag, kind: str | None = "bic", complexity: str = "parameters") -> float:
        if kind is not None:
            _check_kind(kind, complexity)
        return sum(
            self.family_score(i, ps, kind, complexity) for i, ps in enumerate(dag.parent_sets())
        )

    def clear(self) -> None:
        self._cache.clear()

    def __len__(self) -> int:
        return len(self._cache)
