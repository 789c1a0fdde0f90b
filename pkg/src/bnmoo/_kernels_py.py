"""Pure-Python/numpy versions of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable, or when
``BNMOO_PURE_PYTHON=1`` is set. Both versions return bit-identical results: :func:`family_loglik` reads
``c ln c`` from the shared :func:`xlogx_table` and both sum the terms one by
one in ascending key order.
"""

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=8)
def xlogx_table(m):
    """``t[c] = c ln c`` for c = 0..m, with ``t[0] = 0``; read-only."""
    table = np.array([0.0] + [c * math.log(c) for c in range(1, m + 1)])
    table.flags.writeable = False
    return table


def family_loglik(cells, child, parents, arities, xlogx=None):
    """Maximized log-likelihood of one family, ``sum c ln c - sum N ln N``.

    ``c`` runs over (parent configuration, child value) counts and ``N`` over
    parent-configuration counts. Cells with zero count contribute nothing.
    """
    cells = np.asarray(cells)
    parents = np.asarray(parents, dtype=np.int64)
    arities = np.asarray(arities, dtype=np.int64)
    child_arity = int(arities[child])

    code = np.zeros(cells.shape[0], dtype=np.int64)
    for p in parents:
        code *= arities[p]
        code += cells[:, p]
    joint = code * child_arity + cells[:, child]

    if joint.size == 0:
        return 0.0
    if xlogx is None:
        xlogx = xlogx_table(cells.shape[0])
    # np.unique sorts keys; cumsum adds strictly left to right
    _, c = np.unique(joint, return_counts=True)
    _, big_n = np.unique(code, return_counts=True)
    return float(np.cumsum(xlogx[c])[-1] - np.cumsum(xlogx[big_n])[-1])


def find_cycle(adj):
    """Return the nodes of one directed cycle in ``adj``, or ``[]``.

    Depth-first search from nodes in ascending order, children visited in
    ascending order. The cycle is reported in edge order: ``out[k] -> out[k+1]``
    and ``out[-1] -> out[0]``.
    """
    adj = np.asarray(adj)
    n = adj.shape[0]
    children = [np.flatnonzero(adj[i]).tolist() for i in range(n)]
    color = [0] * n  # 0 white, 1 on stack, 2 done
    for root in range(n):
        if color[root]:
            continue
        path = [root]
        cursor = [0]
        color[root] = 1
        while path:
            u = path[-1]
            kids = children[u]
            if cursor[-1] < len(kids):
                v = kids[cursor[-1]]
                cursor[-1] += 1
                if color[v] == 1:
                    return path[path.index(v):]
                if color[v] == 0:
                    color[v] = 1
                    path.append(v)
                    cursor.append(0)
            else:
                color[u] = 2
                path.pop()
                cursor.pop()
    return []


def nondominated_ranks(objectives):
    """0-based non-domination level of each row; every column is maximized."""
    obj = np.asarray(objectives, dtype=np.float64)
    q = obj.shape[0]
    ge = (obj[:, None, :] >= obj[None, :, :]).all(axis=2)
    gt = (obj[:, None, :] > obj[None, :, :]).any(axis=2)
    dom = ge & gt  # dom[i, j]: i dominates j
    dominated_by = dom.sum(axis=0)
    ranks = np.full(q, -1, dtype=np.int64)
    level = 0
    current = np.flatnonzero(dominated_by == 0)
    while current.size:
        ranks[current] = level
        dominated_by = dominated_by - dom[current].sum(axis=0)
        dominated_by[ranks >= 0] = -1
        current = np.flatnonzero(dominated_by == 0)
        level += 1
    return ranks
