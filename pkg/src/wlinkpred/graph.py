"""Weighted undirected graphs: storage, edge-list ingestion and topology statistics.

Graphs are stored in CSR form (``indptr``/``indices``/``weights``) with each
neighbour list sorted by node id. Node ids are dense integers ``0..n-1``; the
original string labels are kept for reporting.
"""
from __future__ import annotations

import configparser
import hashlib
import io
import math
import os
import re
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from wlinkpred import _backend

__all__ = [
    "EdgeListError",
    "WeightedGraph",
    "DatasetEntry",
    "load_edge_list",
    "read_edge_list",
    "write_edge_list",
    "read_manifest",
    "degree",
    "strength",
    "average_degree",
    "local_clustering",
    "clustering_vector",
    "network_clustering",
    "remove_edges",
]

_SPLIT = re.compile(r"[,\s]+")


class EdgeListError(ValueError):
    """Malformed edge-list input. ``lineno`` is 1-based, or None."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class WeightedGraph:
    """Immutable undirected graph with strictly positive edge weights.

    Build one with :meth:`from_edges` or :func:`load_edge_list`; the
    constructor expects already-validated CSR arrays.
    """

    __slots__ = ("labels", "indptr", "indices", "weights", "_label_index", "_fingerprint")

    def __init__(self, labels: Sequence[str], indptr: np.ndarray, indices: np.ndarray,
                 weights: np.ndarray):
        self.labels = tuple(labels)
        self.indptr = _readonly(np.ascontiguousarray(indptr, dtype=np.int64))
        self.indices = _readonly(np.ascontiguousarray(indices, dtype=np.int64))
        self.weights = _readonly(np.ascontiguousarray(weights, dtype=np.float64))
        self._label_index = None
        self._fingerprint = None

    @classmethod
    def from_edges(cls, n_or_labels: int | Sequence[str],
                   edges: Iterable[tuple[int, int, float]] | Iterable[tuple[int, int]]) -> WeightedGraph:
        """Build a graph from ``(u, v[, w])`` tuples over dense ids.

        Missing weights default to 1.0. Raises ValueError on self-loops,
        duplicate pairs, out-of-range ids and nonpositive weights.
        """
        if isinstance(n_or_labels, (int, np.integer)):
            labels = [str(i) for i in range(int(n_or_labels))]
        else:
            labels = [str(x) for x in n_or_labels]
        n = len(labels)
        us, vs, ws = [], [], []
        for e in edges:
            u, v = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else 1.0
            us.append(u)
            vs.append(v)
            ws.append(w)
        u = np.asarray(us, dtype=np.int64)
        v = np.asarray(vs, dtype=np.int64)
        w = np.asarray(ws, dtype=np.float64)
        return cls._from_arrays(labels, u, v, w)

    @classmethod
    def _from_arrays(cls, labels, u, v, w) -> WeightedGraph:
        n = len(labels)
        if len(u):
            if u.min() < 0 or v.min() < 0 or u.max() >= n or v.max() >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(u == v):
                raise ValueError("self-loop")
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise ValueError("edge weights must be finite and > 0")
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        key = lo * max(n, 1) + hi
        if len(np.unique(key)) != len(key):
            raise ValueError("duplicate edge")
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        ww = np.concatenate([w, w])
        order = np.lexsort((dst, src))
        src, dst, ww = src[order], dst[order], ww[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(labels, indptr, dst, ww)

    # -- basic accessors -------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    def __len__(self) -> int:
        return self.n_nodes

    def __repr__(self) -> str:
        return f"WeightedGraph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (self.labels == other.labels
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.weights, other.weights))

    __hash__ = None

    def node_id(self, label: str) -> int:
        if self._label_index is None:
            self._label_index = {lab: i for i, lab in enumerate(self.labels)}
        try:
            return self._label_index[label]
        except KeyError:
            raise KeyError(f"unknown node label {label!r}") from None

    def _check(self, v: int) -> int:
        if not 0 <= v < self.n_nodes:
            raise KeyError(f"unknown node {v}")
        return int(v)

    def neighbors(self, v: int) -> np.ndarray:
        v = self._check(v)
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def neighbor_weights(self, v: int) -> np.ndarray:
        v = self._check(v)
        return self.weights[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def weight(self, u: int, v: int) -> float:
        nb = self.neighbors(u)
        i = int(np.searchsorted(nb, v))
        if i < len(nb) and nb[i] == v:
            return float(self.weights[self.indptr[u] + i])
        raise KeyError(f"({u}, {v}) is not an edge")

    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Canonical edge arrays ``(u, v, w)`` with ``u < v``, sorted by ``(u, v)``."""
        src = np.repeat(np.arange(self.n_nodes, dtype=np.int64), np.diff(self.indptr))
        keep = src < self.indices
        return src[keep], self.indices[keep], self.weights[keep]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def strengths(self) -> np.ndarray:
        out = np.zeros(self.n_nodes)
        np.add.at(out, np.repeat(np.arange(self.n_nodes), np.diff(self.indptr)), self.weights)
        return out

    def with_weights(self, fn) -> WeightedGraph:
        """Same topology, weights replaced elementwise by ``fn(weights)``."""
        return WeightedGraph(self.labels, self.indptr, self.indices, fn(self.weights))

    def fingerprint(self) -> str:
        if self._fingerprint is None:
            h = hashlib.sha256()
            h.update("\x00".join(self.labels).encode())
            for a in (self.indptr, self.indices, self.weights):
                h.update(a.tobytes())
            self._fingerprint = h.hexdigest()[:16]
        return self._fingerprint

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n_nodes))
        for u, v, w in zip(*self.edges()):
            g.add_edge(int(u), int(v), weight=float(w))
        return g


# -- ingestion -------------------------------------------------------------

def read_edge_list(source: TextIO | Iterable[str]) -> WeightedGraph:
    """Parse ``labelA labelB [weight]`` records (whitespace or comma separated).

    Blank lines and lines starting with ``#`` are skipped. Labels get dense
    ids in order of first appearance.
    """
    ids: dict[str, int] = {}
    seen: dict[tuple[int, int], int] = {}
    us, vs, ws = [], [], []
    for lineno, raw in enumerate(source, 1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f for f in _SPLIT.split(line) if f]
        if len(fields) not in (2, 3):
            raise EdgeListError(f"expected 2 or 3 fields, got {len(fields)}", lineno)
        a, b = fields[0], fields[1]
        if a == b:
            raise EdgeListError(f"self-loop on {a!r}", lineno)
        w = 1.0
        if len(fields) == 3:
            try:
                w = float(fields[2])
            except ValueError:
                raise EdgeListError(f"bad weight {fields[2]!r}", lineno) from None
            if not math.isfinite(w) or w <= 0:
                raise EdgeListError(f"weight must be a positive finite number, got {fields[2]}", lineno)
        u = ids.setdefault(a, len(ids))
        v = ids.setdefault(b, len(ids))
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise EdgeListError(f"duplicate edge {a} {b} (first seen on line {seen[key]})", lineno)
        seen[key] = lineno
        us.append(u)
        vs.append(v)
        ws.append(w)
    labels = [None] * len(ids)
    for lab, i in ids.items():
        labels[i] = lab
    return WeightedGraph._from_arrays(
        labels, np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64),
        np.asarray(ws, dtype=np.float64))


def load_edge_list(source) -> WeightedGraph:
    """Load an edge list from a path, a text/byte stream or a string of records."""
    if isinstance(source, (bytes, bytearray)):
        return read_edge_list(io.StringIO(bytes(source).decode("utf-8")))
    if isinstance(source, os.PathLike) or (isinstance(source, str) and "\n" not in source
                                            and os.path.exists(source)):
        with open(source, encoding="utf-8") as fh:
            return read_edge_list(fh)
    if isinstance(source, str):
        return read_edge_list(io.StringIO(source))
    return read_edge_list(source)


def write_edge_list(g: WeightedGraph, sink: TextIO) -> None:
    for u, v, w in zip(*g.edges()):
        sink.write(f"{g.labels[u]} {g.labels[v]} {float(w)!r}\n")


@dataclass(frozen=True)
class DatasetEntry:
    name: str
    path: str
    weights_need_transform: bool = False


def read_manifest(path: str | os.PathLike) -> list[DatasetEntry]:
    """Read an INI-style dataset manifest.

    Each section names a dataset::

        [Cel]
        path = celegans.txt
        weights_need_transform = yes

    Relative paths resolve against the manifest's directory.
    """
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    base = os.path.dirname(os.path.abspath(path))
    out = []
    for name in parser.sections():
        sec = parser[name]
        if "path" not in sec:
            raise ValueError(f"manifest section [{name}] has no 'path'")
        p = os.path.join(base, os.path.expanduser(sec["path"]))
        out.append(DatasetEntry(name, p, sec.getboolean("weights_need_transform", fallback=False)))
    return out


# -- statistics ------------------------------------------------------------

def degree(g: WeightedGraph, v: int) -> int:
    v = g._check(v)
    return int(g.indptr[v + 1] - g.indptr[v])


def strength(g: WeightedGraph, v: int) -> float:
    return float(math.fsum(g.neighbor_weights(v)))


def average_degree(g: WeightedGraph) -> float:
    if g.n_nodes == 0:
        raise ValueError("average degree of an empty graph")
    return 2.0 * g.n_edges / g.n_nodes


def clustering_vector(g: WeightedGraph, weighted: bool = False) -> np.ndarray:
    """Per-node clustering coefficients; NaN where degree < 2.

    Sums run over ordered neighbour pairs ``j != k``. The weighted variant
    divides by the global maximum edge weight times the sum of
    ``w_ij * w_ik`` over those pairs.
    """
    deg = g.degrees()
    out = np.full(g.n_nodes, np.nan)
    ok = deg >= 2
    if not ok.any():
        return out
    tri_unw, tri_w = _backend.kernels.triangle_sums(g.indptr, g.indices, g.weights)
    if weighted:
        s = g.strengths()
        sq = np.zeros(g.n_nodes)
        np.add.at(sq, np.repeat(np.arange(g.n_nodes), deg), g.weights ** 2)
        denom = g.weights.max() * (s * s - sq)
        out[ok] = tri_w[ok] / denom[ok]
    else:
        d = deg.astype(np.float64)
        out[ok] = tri_unw[ok] / (d[ok] * (d[ok] - 1))
    return out


def local_clustering(g: WeightedGraph, v: int, weighted: bool = False) -> float | None:
    """Clustering coefficient of ``v``, or None when its degree is below 2."""
    v = g._check(v)
    nb = g.neighbors(v)
    if len(nb) < 2:
        return None
    wv = dict(zip(nb.tolist(), g.neighbor_weights(v).tolist()))
    num = 0.0
    for j, w_ij in wv.items():
        lo, hi = g.indptr[j], g.indptr[j + 1]
        for k, w_jk in zip(g.indices[lo:hi].tolist(), g.weights[lo:hi].tolist()):
            w_ki = wv.get(k)
            if w_ki is not None:
                num += (w_ij * w_jk * w_ki) if weighted else 1.0
    if weighted:
        ws = np.fromiter(wv.values(), float)
        denom = float(g.weights.max()) * (ws.sum() ** 2 - (ws ** 2).sum())
    else:
        denom = len(nb) * (len(nb) - 1)
    return num / denom


def network_clustering(g: WeightedGraph, weighted: bool = False) -> float:
    """Mean local clustering over nodes of degree >= 2."""
    c = clustering_vector(g, weighted)
    c = c[~np.isnan(c)]
    if len(c) == 0:
        raise ValueError("no node has degree >= 2")
    return float(c.mean())


def remove_edges(g: WeightedGraph, removed: Iterable[tuple[int, int]]) -> WeightedGraph:
    """Copy of ``g`` without the given edges; the node set is unchanged."""
    u, v, w = g.edges()
    n = max(g.n_nodes, 1)
    key = u * n + v
    drop = set()
    for a, b in removed:
        a, b = int(a), int(b)
        if not g.has_edge(a, b):
            raise ValueError(f"({a}, {b}) is not an edge")
        drop.add(min(a, b) * n + max(a, b))
    if not drop:
        return g
    keep = ~np.isin(key, np.fromiter(drop, np.int64, len(drop)))
    return WeightedGraph._from_arrays(g.labels, u[keep], v[keep], w[keep])
