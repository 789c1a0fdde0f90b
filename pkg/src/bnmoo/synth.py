"""Ground-truth networks, forward sampling and bit-flip noise."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from .bn_model import BayesianNetwork, Cpt, Dag, Dataset, config_index, topological_order


@dataclass(frozen=True)
class ScenarioConfig:
    n: int = 15
    density: float = 0.2
    m: int = 50
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if not (0.0 <= self.density <= 1.0 and 0.0 <= self.noise <= 1.0):
            raise ValueError("density and noise must lie in [0, 1]")


def random_dag(n: int, density: float, rng: np.random.Generator) -> Dag:
    """Random permutation as topological order, each forward pair kept with prob ``density``."""
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must lie in [0, 1]")
    order = rng.permutation(n)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < density
    edges = zip(order[iu[keep]].tolist(), order[ju[keep]].tolist())
    return Dag(n, frozenset(edges))


def random_cpts(
    dag: Dag,
    arities: Sequence[int] | None,
    rng: np.random.Generator,
    skew: float = 0.0,
) -> BayesianNetwork:
    """Each CPT row drawn from a symmetric Dirichlet.

    ``skew=0`` is the flat Dirichlet. Positive ``skew`` lowers the
    concentration to ``1 / (1 + skew)``, pushing rows toward the corners.
    """
    if skew < 0:
        raise ValueError("skew must be non-negative")
    arities = tuple(arities) if arities is not None else (2,) * dag.n
    alpha = 1.0 / (1.0 + skew)
    cpts = []
    for i, parents in enumerate(dag.parent_sets()):
        rows = prod(arities[p] for p in parents)
        table = rng.dirichlet(np.full(arities[i], alpha), size=rows)
        # renormalize against float drift so the 1e-9 row-sum invariant is exact
        table = table / table.sum(axis=1, keepdims=True)
        cpts.append(Cpt(i, parents, table))
    return BayesianNetwork(dag, tuple(cpts), arities)


def forward_sample(bn: BayesianNetwork, m: int, rng: np.random.Generator) -> Dataset:
    """Ancestral sampling of ``m`` i.i.d. rows.

    Nodes are visited in topological order; each consumes ``m`` uniforms.
    """
    if m < 1:
        raise ValueError("sample count must be positive")
    cells = np.zeros((m, bn.n), dtype=np.int32)
    for i in topological_order(bn.dag):
        cpt = bn.cpts[i]
        par_ar = [bn.arities[p] for p in cpt.parent_set]
        cfg = config_index(cells[:, list(cpt.parent_set)], par_ar)
        cum = np.cumsum(cpt.table, axis=1)[cfg]
        u = rng.random(m)
        value = (u[:, None] >= cum[:, :-1]).sum(axis=1)
        cells[:, i] = value
    return Dataset(cells, bn.arities)


def inject_noise(data: Dataset, epsilon: float, rng: np.random.Generator) -> Dataset:
    """Flip each binary cell independently with probability ``epsilon``."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("noise level must lie in [0, 1]")
    if any(a != 2 for a in data.arities):
        raise ValueError("bit-flip noise requires all variables to be binary")
    flips = rng.random(data.cells.shape) < epsilon
    return Dataset(data.cells ^ flips.astype(np.int32), data.arities)


def write_dataset_csv(data: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"V{j + 1}" for j in range(data.n)])
        w.writerows(data.cells.tolist())


def read_dataset_csv(path, arities: Sequence[int] | None = None) -> Dataset:
    """Read a ``V1..Vn`` CSV. Arities default to ``max(2, largest value + 1)``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError(f"{path}: no data rows")
    cells = np.asarray([[int(v) for v in r] for r in rows[1:]], dtype=np.int32)
    if arities is None:
        arities = tuple(max(2, int(v) + 1) for v in cells.max(axis=0))
    return Dataset(cells, tuple(arities))
