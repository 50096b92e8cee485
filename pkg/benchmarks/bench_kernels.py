"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--nodes 2000] [--degree 10] [--repeat 3]

Times ``score_all`` (rWRA) and the triangle sums behind the clustering
coefficients on a random graph, checks that both backends agree bit for bit,
and prints the speedup.
"""
import argparse
import statistics
import sys
import time

import numpy as np

from wlinkpred import IndexKind, WeightedGraph, score_all
from wlinkpred import _backend
from wlinkpred.graph import clustering_vector


def random_graph(n, mean_degree, seed):
    rng = np.random.default_rng(seed)
    m = int(n * mean_degree / 2)
    u = rng.integers(0, n, size=int(m * 1.1))
    v = rng.integers(0, n, size=int(m * 1.1))
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    key = np.unique(lo[lo != hi] * n + hi[lo != hi])
    key = rng.permutation(key)[:m]
    w = rng.uniform(0.1, 5.0, len(key))
    return WeightedGraph._from_arrays([str(i) for i in range(n)], key // n, key % n, w)


def timed(fn, repeat):
    out, times = None, []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, statistics.median(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=2000)
    ap.add_argument("--degree", type=float, default=10.0)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if "cython" not in _backend.available():
        print("compiled kernels not built; nothing to compare", file=sys.stderr)
        return 1
    g = random_graph(args.nodes, args.degree, args.seed)
    print(f"graph: {g.n_nodes} nodes, {g.n_edges} edges")

    cases = {
        "score_all(rWRA)": lambda: score_all(g, IndexKind.rWRA),
        "clustering_vector(weighted)": lambda: clustering_vector(g, weighted=True),
    }
    print(f"{'kernel':<30}{'cython [s]':>12}{'python [s]':>12}{'speedup':>10}")
    for name, fn in cases.items():
        res = {}
        for backend in ("cython", "python"):
            _backend.use(backend)
            res[backend] = timed(fn, args.repeat)
        _backend.use("cython")
        a, b = res["cython"][0], res["python"][0]
        if hasattr(a, "scores"):
            same = (np.array_equal(a.rows, b.rows) and np.array_equal(a.cols, b.cols)
                    and np.array_equal(a.scores, b.scores))
        else:
            same = np.array_equal(a, b, equal_nan=True)
        tc, tp = res["cython"][1], res["python"][1]
        flag = "" if same else "  MISMATCH"
        print(f"{name:<30}{tc:>12.4f}{tp:>12.4f}{tp / tc:>9.1f}x{flag}")
        if not same:
            return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
