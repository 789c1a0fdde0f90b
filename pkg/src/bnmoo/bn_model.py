"""Graph, dataset and network types; genome codec and cycle repair."""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from math import prod
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernels


class CycleError(ValueError):
    pass


def _adjacency(n: int, edges: Iterable[tuple[int, int]]) -> np.ndarray:
    adj = np.zeros((n, n), dtype=np.uint8)
    for p, c in edges:
        adj[p, c] = 1
    return adj


def is_acyclic(edges: Iterable[tuple[int, int]], n: int) -> bool:
    """True iff the directed graph on ``n`` nodes admits a topological order."""
    return not kernels.find_cycle(_adjacency(n, edges))


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over nodes ``0..n-1``."""

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("node count must be positive")
        edges = frozenset((int(p), int(c)) for p, c in self.edges)
        for p, c in edges:
            if not (0 <= p < self.n and 0 <= c < self.n):
                raise ValueError(f"edge ({p}, {c}) out of range for n={self.n}")
            if p == c:
                raise ValueError(f"self-loop on node {p}")
        object.__setattr__(self, "edges", edges)
        if not is_acyclic(edges, self.n):
            raise CycleError("edge set contains a directed cycle")

    @classmethod
    def from_adjacency(cls, adj) -> "Dag":
        adj = np.asarray(adj)
        rows, cols = np.nonzero(adj)
        return cls(adj.shape[0], frozenset(zip(rows.tolist(), cols.tolist())))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def parents(self, node: int) -> tuple[int, ...]:
        return tuple(sorted(p for p, c in self.edges if c == node))

    def parent_sets(self) -> list[tuple[int, ...]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for p, c in self.edges:
            out[c].append(p)
        return [tuple(sorted(ps)) for ps in out]

    def adjacency(self) -> np.ndarray:
        return _adjacency(self.n, self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def topological_order(dag: Dag) -> list[int]:
    """Kahn's algorithm; among ready nodes the smallest index goes first."""
    indeg = [0] * dag.n
    children: list[list[int]] = [[] for _ in range(dag.n)]
    for p, c in dag.edges:
        indeg[c] += 1
        children[p].append(c)
    ready = [i for i in range(dag.n) if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        u = heapq.heappop(ready)
        order.append(u)
        for v in children[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(ready, v)
    if len(order) != dag.n:
        raise CycleError("graph has a cycle")
    return order


# -- genome codec -----------------------------------------------------------


def genome_length(n: int) -> int:
    return n * (n - 1)


def _position_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    p = np.arange(genome_length(n))
    if n < 2:
        return p, p
    rows = p // (n - 1)
    cols = p % (n - 1)
    cols = cols + (cols >= rows)
    return rows, cols


def position_to_cell(p: int, n: int) -> tuple[int, int]:
    row, c = divmod(p, n - 1)
    return row, c + (c >= row)


def cell_to_position(row: int, col: int, n: int) -> int:
    return row * (n - 1) + (col - (col > row))


@dataclass(frozen=True, eq=False)
class Genome:
    """Off-diagonal adjacency cells in row-major order, diagonal skipped."""

    n: int
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or bits.shape[0] != genome_length(self.n):
            raise ValueError(
                f"genome length {bits.size} does not match n(n-1)={genome_length(self.n)}"
            )
        if bits.size and bits.max() > 1:
            raise ValueError("genome bits must be 0 or 1")
        bits = bits.copy()
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    def __eq__(self, other):
        return (
            isinstance(other, Genome)
            and self.n == other.n
            and np.array_equal(self.bits, other.bits)
        )

    def __hash__(self):
        return hash((self.n, self.bits.tobytes()))

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=np.uint8)
        rows, cols = _position_tables(self.n)
        adj[rows, cols] = self.bits
        return adj


def encode(dag: Dag) -> Genome:
    bits = np.zeros(genome_length(dag.n), dtype=np.uint8)
    for p, c in dag.edges:
        bits[cell_to_position(p, c, dag.n)] = 1
    return Genome(dag.n, bits)


def genome_from_adjacency(adj: np.ndarray) -> Genome:
    n = adj.shape[0]
    rows, cols = _position_tables(n)
    return Genome(n, adj[rows, cols])


def decode_unchecked(genome: Genome) -> frozenset:
    """Edge set of a genome, which may contain cycles."""
    rows, cols = _position_tables(genome.n)
    on = np.flatnonzero(genome.bits)
    return frozenset(zip(rows[on].tolist(), cols[on].tolist()))


def repair_adjacency(adj: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Break cycles in place: while a cycle is found, drop one of its edges at random."""
    while True:
        cycle = kernels.find_cycle(adj)
        if not cycle:
            return adj
        k = int(rng.integers(len(cycle)))
        adj[cycle[k], cycle[(k + 1) % len(cycle)]] = 0


def repair_cycles(genome: Genome, rng: np.random.Generator) -> Dag:
    return Dag.from_adjacency(repair_adjacency(genome.adjacency(), rng))


def parameter_count(dag: Dag, arities: Sequence[int]) -> int:
    """Free parameters of the factorized model over ``dag``."""
    if len(arities) != dag.n:
        raise ValueError("arities length does not match node count")
    return sum(
        (arities[i] - 1) * prod(arities[j] for j in ps)
        for i, ps in enumerate(dag.parent_sets())
    )


# -- data and parameters -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class Dataset:
    """An m x n matrix of category indices with per-variable arities."""

    cells: np.ndarray
    arities: tuple[int, ...] | None = None

    def __post_init__(self):
        cells = np.ascontiguousarray(self.cells, dtype=np.int32)
        if cells.ndim != 2 or cells.shape[0] < 1 or cells.shape[1] < 1:
            raise ValueError("dataset must be a non-empty m x n matrix")
        arities = (
            tuple(int(a) for a in self.arities)
            if self.arities is not None
            else (2,) * cells.shape[1]
        )
        if len(arities) != cells.shape[1]:
            raise ValueError("arities length does not match variable count")
        if any(a < 2 for a in arities):
            raise ValueError("every variable needs at least 2 categories")
        if cells.min() < 0 or np.any(cells.max(axis=0) >= np.asarray(arities)):
            raise ValueError("cell value outside its variable's categories")
        cells = cells.copy()
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "arities", arities)

    @property
    def m(self) -> int:
        return self.cells.shape[0]

    @property
    def n(self) -> int:
        return self.cells.shape[1]

    def __eq__(self, other):
        return (
            isinstance(other, Dataset)
            and self.arities == other.arities
            and np.array_equal(self.cells, other.cells)
        )


def config_index(values: np.ndarray, parent_arities: Sequence[int]) -> np.ndarray:
    """Row index of each parent configuration; the last parent varies fastest.

    ``values`` is (m, k) for k parents. With no parents every row maps to 0.
    """
    values = np.asarray(values)
    idx = np.zeros(values.shape[0], dtype=np.int64)
    for j, a in enumerate(parent_arities):
        idx = idx * a + values[:, j]
    return idx


@dataclass(frozen=True, eq=False)
class Cpt:
    node: int
    parent_set: tuple[int, ...]
    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=np.float64)
        if table.ndim != 2:
            raise ValueError("CPT table must be 2-D (configurations x categories)")
        if np.any(table < 0) or not np.allclose(table.sum(axis=1), 1.0, atol=1e-9, rtol=0):
            raise ValueError(f"CPT rows of node {self.node} are not probability vectors")
        table = table.copy()
        table.setflags(write=False)
        object.__setattr__(self, "parent_set", tuple(int(p) for p in self.parent_set))
        object.__setattr__(self, "table", table)


@dataclass(frozen=True, eq=False)
class BayesianNetwork:
    dag: Dag
    cpts: tuple[Cpt, ...]
    arities: tuple[int, ...] | None = None

    def __post_init__(self):
        cpts = tuple(self.cpts)
        arities = tuple(self.arities) if self.arities is not None else (2,) * self.dag.n
        if len(cpts) != self.dag.n or len(arities) != self.dag.n:
            raise ValueError("need one CPT and one arity per node")
        for i, cpt in enumerate(cpts):
            if cpt.node != i:
                raise ValueError("CPTs must be listed in node order")
            if cpt.parent_set != self.dag.parents(i):
                raise ValueError(f"CPT parent set of node {i} disagrees with the DAG")
            rows = prod(arities[p] for p in cpt.parent_set)
            if cpt.table.shape != (rows, arities[i]):
                raise ValueError(
                    f"CPT of node {i} has shape {cpt.table.shape}, expected {(rows, arities[i])}"
                )
        object.__setattr__(self, "cpts", cpts)
        object.__setattr__(self, "arities", arities)

    @property
    def n(self) -> int:
        return self.dag.n


# -- serialization -----------------------------------------------------------


def dag_to_dict(dag: Dag, arities: Sequence[int] | None = None) -> dict:
    return {
        "n": dag.n,
        "arities": list(arities) if arities is not None else [2] * dag.n,
        "edges": [list(e) for e in dag.sorted_edges()],
    }


def network_to_dict(obj: Dag | BayesianNetwork, arities: Sequence[int] | None = None) -> dict:
    if isinstance(obj, Dag):
        return dag_to_dict(obj, arities)
    out = dag_to_dict(obj.dag, obj.arities)
    out["cpts"] = [
        {"node": c.node, "parents": list(c.parent_set), "table": c.table.tolist()}
        for c in obj.cpts
    ]
    return out


def network_from_dict(doc: dict) -> Dag | BayesianNetwork:
    """Inverse of :func:`network_to_dict`; returns a network when CPTs are present."""
    n = int(doc["n"])
    dag = Dag(n, frozenset(tuple(e) for e in doc.get("edges", [])))
    arities = tuple(doc.get("arities") or [2] * n)
    if not doc.get("cpts"):
        return dag
    cpts = tuple(
        Cpt(int(c["node"]), tuple(c["parents"]), np.asarray(c["table"]))
        for c in sorted(doc["cpts"], key=lambda c: c["node"])
    )
    return BayesianNetwork(dag, cpts, arities)


def save_network(obj: Dag | BayesianNetwork, path, arities=None) -> None:
    Path(path).write_text(json.dumps(network_to_dict(obj, arities), indent=2) + "\n")


def load_network(path) -> Dag | BayesianNetwork:
    return network_from_dict(json.loads(Path(path).read_text()))


def to_dot(dag: Dag, name: str = "G") -> str:
    """Graphviz source with nodes labeled V1..Vn."""
    lines = [f"digraph {name} {{"]
    lines += [f"  V{i + 1};" for i in range(dag.n)]
    lines += [f"  V{p + 1} -> V{c + 1};" for p, c in dag.sorted_edges()]
    lines.append("}")
    return "\n".join(lines) + "\n"
