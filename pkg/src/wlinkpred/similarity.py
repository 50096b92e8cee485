"""Local similarity indices on weighted graphs.

Nine indices are supported: the common-neighbour family (CN, AA, RA), its
weight-sum extensions (WCN, WAA, WRA) and the reliable-route extensions
(rWCN, rWAA, rWRA) that score a two-hop route by the product of its weights.
All of them are sums over the common neighbours ``z`` of ``x`` and ``y``:

======  =====================================
CN      1
AA      1 / ln k_z
RA      1 / k_z
WCN     w_xz + w_zy
WAA     (w_xz + w_zy) / ln(1 + s_z)
WRA     (w_xz + w_zy) / s_z
rWCN    w_xz * w_zy
rWAA    w_xz * w_zy / ln(1 + s_z)
rWRA    w_xz * w_zy / s_z
======  =====================================

where ``k_z`` is the degree and ``s_z`` the strength of ``z``. Logarithms are
natural; the base only rescales AA-type scores and never changes a ranking.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Iterator, Mapping

import numpy as np

from wlinkpred import _backend
from wlinkpred.graph import WeightedGraph

__all__ = [
    "IndexKind",
    "ScoreTable",
    "regularize_weights",
    "regularize",
    "unregularize_weight",
    "score_pair",
    "candidate_pairs",
    "score_all",
]


class IndexKind(enum.Enum):
    CN = "CN"
    AA = "AA"
    RA = "RA"
    WCN = "WCN"
    WAA = "WAA"
    WRA = "WRA"
    rWCN = "rWCN"
    rWAA = "rWAA"
    rWRA = "rWRA"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: str) -> IndexKind:
        for k in cls:
            if k.value.lower() == name.strip().lower():
                return k
        raise ValueError(f"unknown index {name!r}; choose from {', '.join(k.value for k in cls)}")

    @property
    def weighted(self) -> bool:
        return self.value[0] in "Wr"

    @property
    def reliable(self) -> bool:
        return self.value.startswith("r")

    @property
    def _mode(self) -> int:
        if not self.weighted:
            return 0
        return 2 if self.reliable else 1

    def denominators(self, g: WeightedGraph) -> np.ndarray:
        """Per-node divisor applied to each common neighbour's contribution."""
        tail = self.value[-2:]
        if tail == "CN":
            return np.ones(g.n_nodes)
        if self.weighted:
            s = g.strengths()
            with np.errstate(divide="ignore"):
                return np.log1p(s) if tail == "AA" else s
        k = g.degrees().astype(np.float64)
        with np.errstate(divide="ignore"):
            return np.log(k) if tail == "AA" else k


# Report row order: CN-type, AA-type, RA-type rows.
TABLE_ORDER = (IndexKind.CN, IndexKind.WCN, IndexKind.rWCN,
               IndexKind.AA, IndexKind.WAA, IndexKind.rWAA,
               IndexKind.RA, IndexKind.WRA, IndexKind.rWRA)


# -- weight regularization --------------------------------------------------

def regularize(w):
    """Map positive weights into (0, 1) with ``exp(-1/w)``."""
    w = np.asarray(w, dtype=np.float64)
    if np.any(~(w > 0)):
        raise ValueError("weights must be > 0")
    out = np.exp(-1.0 / w)
    return float(out) if out.ndim == 0 else out


def regularize_weights(g: WeightedGraph) -> WeightedGraph:
    return g.with_weights(regularize)


def unregularize_weight(wp: float) -> float:
    """Inverse of :func:`regularize` for a single value in (0, 1)."""
    if not 0.0 < wp < 1.0:
        raise ValueError(f"regularized weight must lie in (0, 1), got {wp}")
    return -1.0 / math.log(wp)


# -- scores ------------------------------------------------------------------

class ScoreTable:
    """Sparse scores of non-adjacent node pairs.

    Pairs are stored canonically (``rows[i] < cols[i]``) in ascending
    ``(row, col)`` order; absent pairs score 0.
    """

    def __init__(self, graph: WeightedGraph, kind: IndexKind | None,
                 rows: np.ndarray, cols: np.ndarray, scores: np.ndarray):
        self.graph = graph
        self.kind = kind
        self.rows = rows
        self.cols = cols
        self.scores = scores
        self._lookup = None

    @classmethod
    def from_mapping(cls, graph: WeightedGraph, entries: Mapping[tuple[int, int], float],
                     kind: IndexKind | None = None) -> ScoreTable:
        """Build a table from explicit ``{(x, y): score}`` entries (zeros dropped)."""
        items = sorted(((min(x, y), max(x, y)), float(s)) for (x, y), s in entries.items())
        items = [(p, s) for p, s in items if s != 0.0]
        for (x, y), s in items:
            if x == y:
                raise ValueError("self-pair in score table")
            if s < 0:
                raise ValueError("scores must be nonnegative")
            if graph.has_edge(x, y):
                raise ValueError(f"({x}, {y}) is an edge of the source graph")
        rows = np.array([p[0] for p, _ in items], dtype=np.int64)
        cols = np.array([p[1] for p, _ in items], dtype=np.int64)
        scores = np.array([s for _, s in items], dtype=np.float64)
        return cls(graph, kind, rows, cols, scores)

    @property
    def source_fingerprint(self) -> str:
        return self.graph.fingerprint()

    def __len__(self) -> int:
        return len(self.scores)

    def __repr__(self) -> str:
        return f"ScoreTable(kind={self.kind}, entries={len(self)})"

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.rows.tolist(), self.cols.tolist()))

    def to_dict(self) -> dict[tuple[int, int], float]:
        return dict(zip(self.pairs(), self.scores.tolist()))

    def get(self, x: int, y: int) -> float:
        if self._lookup is None:
            self._lookup = self.to_dict()
        return self._lookup.get((min(x, y), max(x, y)), 0.0)

    def lookup(self, pairs) -> np.ndarray:
        """Scores for an array-like of ``(x, y)`` pairs, 0 where absent."""
        p = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        lo, hi = p.min(axis=1), p.max(axis=1)
        n = max(self.graph.n_nodes, 1)
        keys = self.rows * n + self.cols
        q = lo * n + hi
        i = np.searchsorted(keys, q)
        i = np.minimum(i, max(len(keys) - 1, 0))
        out = np.zeros(len(q))
        if len(keys):
            hit = keys[i] == q
            out[hit] = self.scores[i[hit]]
        return out

    def max_score(self) -> float:
        return float(self.scores.max()) if len(self.scores) else 0.0

    def ranking(self, tie_seed: int | None = None) -> np.ndarray:
        """Entry positions by descending score.

        Ties break on the pair's labels in lexicographic order, or by a seeded
        random shuffle when ``tie_seed`` is given.
        """
        if tie_seed is not None:
            tiebreak = np.random.default_rng(tie_seed).permutation(len(self.scores))
            return np.lexsort((tiebreak, -self.scores))
        a, b = self._label_ranks()
        return np.lexsort((b, a, -self.scores))

    def _label_ranks(self):
        labels = self.graph.labels
        rank = np.empty(len(labels), dtype=np.int64)
        rank[sorted(range(len(labels)), key=labels.__getitem__)] = np.arange(len(labels))
        r1, r2 = rank[self.rows], rank[self.cols]
        return np.minimum(r1, r2), np.maximum(r1, r2)

    def labelled_pair(self, i: int) -> tuple[str, str]:
        a, b = self.graph.labels[self.rows[i]], self.graph.labels[self.cols[i]]
        return (a, b) if a <= b else (b, a)

    def to_text(self, top: int | None = None, fmt: str = "{:.6g}") -> str:
        """``labelA labelB score`` lines, best first."""
        order = self.ranking()
        if top is not None:
            order = order[:top]
        lines = []
        for i in order.tolist():
            a, b = self.labelled_pair(i)
            lines.append(f"{a} {b} {fmt.format(self.scores[i])}")
        return "".join(line + "\n" for line in lines)


def _common_neighbors(g: WeightedGraph, x: int, y: int):
    wx = dict(zip(g.neighbors(x).tolist(), g.neighbor_weights(x).tolist()))
    wy = dict(zip(g.neighbors(y).tolist(), g.neighbor_weights(y).tolist()))
    return [(z, wx[z], wy[z]) for z in sorted(wx.keys() & wy.keys())]


def score_pair(g: WeightedGraph, kind: IndexKind, x: int, y: int) -> float:
    """Score of a single pair; edges may be scored too (diagnostics)."""
    g._check(x)
    g._check(y)
    if x == y:
        raise ValueError("x and y must differ")
    total = 0.0
    tail = kind.value[-2:]
    for z, w_xz, w_zy in _common_neighbors(g, x, y):
        if kind.reliable:
            num = w_xz * w_zy
        elif kind.weighted:
            num = w_xz + w_zy
        else:
            num = 1.0
        if tail == "CN":
            total += num
            continue
        d = float(g.neighbor_weights(z).sum()) if kind.weighted else len(g.neighbors(z))
        if tail == "AA":
            d = math.log1p(d) if kind.weighted else math.log(d)
        total += num / d
    return total


def _chunks(g: WeightedGraph, parts: int) -> list[tuple[int, int]]:
    """Split node range into contiguous blocks of roughly equal two-hop work."""
    n = g.n_nodes
    if parts <= 1 or n == 0:
        return [(0, n)]
    deg = g.degrees().astype(np.float64)
    work = np.zeros(n)
    np.add.at(work, np.repeat(np.arange(n), g.degrees()), deg[g.indices])
    cum = np.cumsum(work + 1.0)
    cuts = np.searchsorted(cum, cum[-1] * np.arange(1, parts) / parts)
    bounds = [0, *sorted(set(int(c) for c in cuts)), n]
    return [(a, b) for a, b in zip(bounds, bounds[1:]) if a < b]


def _score_arrays(g: WeightedGraph, kind: IndexKind, workers: int = 1):
    denom = kind.denominators(g)
    k = _backend.kernels
    blocks = _chunks(g, workers * 4 if workers > 1 else 1)
    run = lambda b: k.score_rows(g.indptr, g.indices, g.weights, denom, kind._mode, b[0], b[1])
    if len(blocks) == 1:
        return run(blocks[0])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(run, blocks))
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(3))


def candidate_pairs(g: WeightedGraph) -> Iterator[tuple[int, int]]:
    """Non-adjacent pairs sharing at least one neighbour, each once, ``x < y``."""
    rows, cols, _ = _score_arrays(g, IndexKind.CN)
    return zip(rows.tolist(), cols.tolist())


def score_all(g: WeightedGraph, kind: IndexKind, workers: int = 1) -> ScoreTable:
    """Score every candidate pair of ``g``.

    The node range is split into blocks scored in parallel; blocks are
    concatenated in node order, so the table does not depend on ``workers``.
    """
    rows, cols, vals = _score_arrays(g, kind, workers)
    return ScoreTable(g, kind, rows, cols, vals)
