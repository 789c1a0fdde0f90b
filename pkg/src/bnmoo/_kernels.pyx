# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Semantics mirror ``_kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport qsort, malloc, free
from libc.stdint cimport int64_t

from ._kernels_py import xlogx_table

cnp.import_array()


cdef int _cmp_i64(const void* a, const void* b) noexcept nogil:
    cdef int64_t x = (<int64_t*>a)[0]
    cdef int64_t y = (<int64_t*>b)[0]
    return (x > y) - (x < y)


def family_loglik(cells, Py_ssize_t child, parents, arities, xlogx=None):
    cdef const cnp.int32_t[:, ::1] c = np.ascontiguousarray(cells, dtype=np.int32)
    cdef const cnp.int64_t[::1] par = np.ascontiguousarray(parents, dtype=np.int64)
    cdef const cnp.int64_t[::1] ar = np.ascontiguousarray(arities, dtype=np.int64)
    cdef Py_ssize_t m = c.shape[0]
    cdef Py_ssize_t k = par.shape[0]
    cdef int64_t child_arity = ar[child]
    cdef Py_ssize_t r, j
    cdef int64_t code
    cdef double sum_joint = 0.0
    cdef double sum_cfg = 0.0
    cdef int64_t run_joint, run_cfg
    cdef int64_t* joint
    if m == 0:
        return 0.0
    if xlogx is None:
        xlogx = xlogx_table(m)
    cdef const double[::1] t = np.ascontiguousarray(xlogx, dtype=np.float64)
    if t.shape[0] <= m:
        raise ValueError("xlogx table shorter than the sample count")
    joint = <int64_t*>malloc(m * sizeof(int64_t))
    if joint == NULL:
        raise MemoryError()
    try:
        with nogil:
            for r in range(m):
                code = 0
                for j in range(k):
                    code = code * ar[par[j]] + c[r, par[j]]
                joint[r] = code * child_arity + c[r, child]
            qsort(joint, m, sizeof(int64_t), _cmp_i64)
            run_joint = 1
            run_cfg = 1
            for r in range(1, m + 1):
                if r < m and joint[r] == joint[r - 1]:
                    run_joint += 1
                else:
                    sum_joint += t[run_joint]
                    run_joint = 1
                if r < m and joint[r] // child_arity == joint[r - 1] // child_arity:
                    run_cfg += 1
                else:
                    sum_cfg += t[run_cfg]
                    run_cfg = 1
    finally:
        free(joint)
    return sum_joint - sum_cfg


def find_cycle(adj):
    cdef const cnp.uint8_t[:, ::1] a = np.ascontiguousarray(adj, dtype=np.uint8)
    cdef Py_ssize_t n = a.shape[0]
    cdef cnp.int64_t[::1] color = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] path = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] cursor = np.zeros(n, dtype=np.int64)
    cdef Py_ssize_t depth, root, u, v, i, start
    for root in range(n):
        if color[root]:
            continue
        depth = 1
        path[0] = root
        cursor[0] = 0
        color[root] = 1
        while depth > 0:
            u = path[depth - 1]
            v = cursor[depth - 1]
            while v < n and not a[u, v]:
                v += 1
            if v < n:
                cursor[depth - 1] = v + 1
                if color[v] == 1:
                    start = 0
                    for i in range(depth):
                        if path[i] == v:
                            start = i
                            break
                    return [int(path[i]) for i in range(start, depth)]
                if color[v] == 0:
                    color[v] = 1
                    path[depth] = v
                    cursor[depth] = 0
                    depth += 1
            else:
                color[u] = 2
                depth -= 1
    return []


def nondominated_ranks(objectives):
    cdef const cnp.float64_t[:, ::1] obj = np.ascontiguousarray(objectives, dtype=np.float64)
    cdef Py_ssize_t q = obj.shape[0]
    cdef Py_ssize_t nobj = obj.shape[1]
    cdef cnp.uint8_t[:, ::1] dom = np.zeros((q, q), dtype=np.uint8)
    cdef cnp.int64_t[::1] count = np.zeros(q, dtype=np.int64)
    ranks_arr = np.full(q, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] ranks = ranks_arr
    cdef cnp.int64_t[::1] current = np.zeros(q, dtype=np.int64)
    cdef cnp.int64_t[::1] nxt = np.zeros(q, dtype=np.int64)
    cdef Py_ssize_t i, j, t, ncur, nnext, level
    cdef bint ge, gt
    for i in range(q):
        for j in range(q):
            if i == j:
                continue
            ge = True
            gt = False
            for t in range(nobj):
                if obj[i, t] < obj[j, t]:
                    ge = False
                    break
                if obj[i, t] > obj[j, t]:
                    gt = True
            if ge and gt:
                dom[i, j] = 1
                count[j] += 1
    ncur = 0
    for i in range(q):
        if count[i] == 0:
            current[ncur] = i
            ncur += 1
    level = 0
    while ncur > 0:
        nnext = 0
        for t in range(ncur):
            ranks[current[t]] = level
        for t in range(ncur):
            i = current[t]
            for j in range(q):
                if dom[i, j]:
                    count[j] -= 1
                    if count[j] == 0:
                        nxt[nnext] = j
                        nnext += 1
        for t in range(nnext):
            current[t] = nxt[t]
        ncur = nnext
        level += 1
    return ranks_arr
