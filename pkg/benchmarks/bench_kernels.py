"""Time the compiled kernels against the pure-Python fallback.

Run with ``python benchmarks/bench_kernels.py``. The end-to-end row runs
``evolve`` in a subprocess with BNMOO_PURE_PYTHON set, since the backend is
chosen once at import.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from bnmoo import _kernels_py

try:
    from bnmoo import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

EVOLVE_SNIPPET = """
import time, numpy as np
from bnmoo.synth import random_dag, random_cpts, forward_sample
from bnmoo.nsga2 import Nsga2Config, evolve
rng = np.random.default_rng(0)
data = forward_sample(random_cpts(random_dag(15, 0.2, rng), None, rng), 500, rng)
t = time.perf_counter()
evolve(data, Nsga2Config(population_size=100, generations={gens}), np.random.default_rng(1))
print(time.perf_counter() - t)
"""


def cases(rng):
    cells = rng.integers(0, 2, (500, 15)).astype(np.int32)
    parents = np.array([1, 4, 7], dtype=np.int64)
    arities = np.full(15, 2, dtype=np.int64)
    adj = (rng.random((15, 15)) < 0.15).astype(np.uint8)
    np.fill_diagonal(adj, 0)
    pts = np.column_stack([rng.normal(size=200), -rng.integers(0, 40, 200)]).astype(np.float64)
    return {
        "family_loglik (m=500, 3 parents)": lambda k: k.family_loglik(cells, 0, parents, arities),
        "find_cycle (n=15)": lambda k: k.find_cycle(adj),
        "nondominated_ranks (200 points)": lambda k: k.nondominated_ranks(pts),
    }


def best_of(fn, number):
    return min(timeit.repeat(fn, number=number, repeat=5)) / number


def evolve_seconds(pure, gens):
    env = dict(os.environ)
    if pure:
        env["BNMOO_PURE_PYTHON"] = "1"
    else:
        env.pop("BNMOO_PURE_PYTHON", None)
    out = subprocess.run([sys.executable, "-c", EVOLVE_SNIPPET.format(gens=gens)], env=env,
                         capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--number", type=int, default=200)
    ap.add_argument("--generations", type=int, default=20)
    args = ap.parse_args()
    if _kernels_c is None:
        print("compiled kernels are not built; only the fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':36s} {'python us':>10s} {'cython us':>10s} {'speedup':>8s}")
    for name, call in cases(rng).items():
        py = best_of(lambda: call(_kernels_py), args.number) * 1e6
        if _kernels_c is None:
            print(f"{name:36s} {py:10.1f}")
            continue
        cy = best_of(lambda: call(_kernels_c), args.number) * 1e6
        print(f"{name:36s} {py:10.1f} {cy:10.1f} {py / cy:7.1f}x")
    py = evolve_seconds(True, args.generations)
    cy = evolve_seconds(False, args.generations)
    print(f"evolve n=15 Q=100 {args.generations} gens: python {py:.2f}s, default backend {cy:.2f}s, "
          f"speedup {py / cy:.1f}x")


if __name__ == "__main__":
    main()
