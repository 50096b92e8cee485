"""Repeated hold-out experiments, summary tables and the clustering/accuracy analysis."""
from __future__ import annotations

import csv
import hashlib
import io
import logging
import math
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from wlinkpred.evaluation import (UndefinedCorrelation, fit_lambda, pearson, precision_at,
                                  split_edges)
from wlinkpred.graph import (DatasetEntry, WeightedGraph, average_degree, load_edge_list,
                             network_clustering)
from wlinkpred.similarity import TABLE_ORDER, IndexKind, regularize_weights, score_all

__all__ = [
    "ExperimentConfig",
    "TrialResult",
    "CellSummary",
    "DatasetStats",
    "ExperimentSummary",
    "ClusteringCorrelation",
    "derive_seed",
    "uses_transform",
    "run_trial",
    "run_experiment",
    "correlate_clustering_accuracy",
    "dataset_stats",
    "emit_report",
    "emit_runlog",
    "generate_clique_family",
]

log = logging.getLogger(__name__)

TRANSFORM_SCOPES = ("all_weighted", "reliable_only")
LAMBDA_SUPPORTS = ("full", "test_only")


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[DatasetEntry, ...] = ()
    indices: tuple[IndexKind, ...] = TABLE_ORDER
    test_fraction: float = 0.1
    repetitions: int = 100
    master_seed: int = 0
    transform_scope: str = "all_weighted"
    lambda_support: str = "full"
    L: int | None = None  # None: size of the test set
    paired_splits: bool = True
    tie_shuffle: bool = False
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "indices", tuple(self.indices))
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in (0, 1)")
        if self.transform_scope not in TRANSFORM_SCOPES:
            raise ValueError(f"transform_scope must be one of {TRANSFORM_SCOPES}")
        if self.lambda_support not in LAMBDA_SUPPORTS:
            raise ValueError(f"lambda_support must be one of {LAMBDA_SUPPORTS}")
        if self.L is not None and self.L < 1:
            raise ValueError("L must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not self.indices:
            raise ValueError("no indices selected")


@dataclass(frozen=True)
class TrialResult:
    dataset: str
    kind: IndexKind
    repetition: int
    seed: int
    precision: float
    lam: float
    clamped: bool
    pearson: float | None
    residual_norm: float
    n_scored: int
    L: int

    def to_record(self) -> str:
        pr = "undefined" if self.pearson is None else repr(self.pearson)
        return (f"{self.dataset}\t{self.kind}\t{self.repetition}\t{self.seed}\t{self.precision!r}"
                f"\t{self.lam!r}\t{int(self.clamped)}\t{pr}")


@dataclass(frozen=True)
class CellSummary:
    mean_precision: float
    std_precision: float
    mean_pearson: float  # NaN when every trial was undefined
    std_pearson: float
    n_undefined: int
    n_trials: int


@dataclass(frozen=True)
class DatasetStats:
    n_nodes: int
    n_edges: int
    avg_degree: float
    C: float
    C_w: float


@dataclass
class ExperimentSummary:
    datasets: list[str]
    indices: list[IndexKind]
    repetitions: int
    stats: dict[str, DatasetStats] = field(default_factory=dict)
    cells: dict[tuple[str, IndexKind], CellSummary] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)
    trials: list[TrialResult] = field(default_factory=list)


ClusteringCorrelation = namedtuple("ClusteringCorrelation", "c_link cw_link c_weight cw_weight")


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from arbitrary printable parts."""
    h = hashlib.sha256("\x1f".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(h[:8], "big") >> 1


def uses_transform(kind: IndexKind, dataset_flag: bool, scope: str) -> bool:
    if not dataset_flag:
        return False
    return kind.reliable if scope == "reliable_only" else kind.weighted


def dataset_stats(g: WeightedGraph) -> DatasetStats:
    def _c(weighted):
        try:
            return network_clustering(g, weighted)
        except ValueError:
            return math.nan
    return DatasetStats(g.n_nodes, g.n_edges, average_degree(g), _c(False), _c(True))


def _evaluate(train: WeightedGraph, test_edges, kind: IndexKind, cfg: ExperimentConfig,
              tie_seed: int | None):
    """Score, rank and fit on one (possibly transformed) split."""
    table = score_all(train, kind)
    L = cfg.L if cfg.L is not None else len(test_edges)
    prec = precision_at(table, [p for p, _ in test_edges], L, tie_seed)
    lam, clamped, resid, r = math.nan, False, math.nan, None
    actual = np.array([w for _, w in test_edges])
    try:
        fit = fit_lambda(table, test_edges, cfg.lambda_support)
    except ValueError:
        log.info("%s: nothing scored on the training graph; pearson undefined", kind)
    else:
        lam, clamped, resid = fit.lam, fit.clamped, fit.residual_norm
        predicted = lam * table.lookup([p for p, _ in test_edges])
        try:
            r = pearson(predicted, actual)
        except UndefinedCorrelation:
            r = None
    return prec, lam, clamped, r, resid, len(table), L


def run_trial(g: WeightedGraph, kind: IndexKind, cfg: ExperimentConfig, trial_seed: int,
              transform: bool = False, split_seed: int | None = None,
              dataset: str = "", repetition: int = 0) -> TrialResult:
    """One split -> (optional weight transform) -> score -> precision, fit, Pearson.

    ``transform`` is the dataset's need-transform flag; whether it applies
    to ``kind`` depends on ``cfg.transform_scope``. The split uses
    ``split_seed`` when given (paired splits), otherwise ``trial_seed``.
    """
    split = split_edges(g, cfg.test_fraction, trial_seed if split_seed is None else split_seed)
    return _trial_on_split(split, kind, cfg, trial_seed, transform, dataset, repetition)


def _trial_on_split(split, kind, cfg, trial_seed, transform, dataset, repetition):
    train, test = split.train, split.test_edges
    if uses_transform(kind, transform, cfg.transform_scope):
        train = regularize_weights(train)
        test = [(p, math.exp(-1.0 / w)) for p, w in test]
    tie_seed = derive_seed(trial_seed, "ties") if cfg.tie_shuffle else None
    prec, lam, clamped, r, resid, n_scored, L = _evaluate(train, test, kind, cfg, tie_seed)
    return TrialResult(dataset, kind, repetition, trial_seed, prec, lam, clamped, r, resid,
                       n_scored, L)


def _unit(g: WeightedGraph, name: str, transform: bool, cfg: ExperimentConfig, rep: int):
    out = []
    shared = None
    if cfg.paired_splits:
        shared = split_edges(g, cfg.test_fraction, derive_seed(cfg.master_seed, name, "split", rep))
    for kind in cfg.indices:
        trial_seed = derive_seed(cfg.master_seed, name, kind.value, rep)
        split = shared or split_edges(g, cfg.test_fraction, trial_seed)
        out.append(_trial_on_split(split, kind, cfg, trial_seed, transform, name, rep))
    return out


_WORKER_GRAPHS: dict = {}


def _init_worker(graphs):
    _WORKER_GRAPHS.clear()
    _WORKER_GRAPHS.update(graphs)


def _run_unit(args):
    name, transform, cfg, rep = args
    return _unit(_WORKER_GRAPHS[name], name, transform, cfg, rep)


def _summarize(trials: Sequence[TrialResult]) -> CellSummary:
    p = np.array([t.precision for t in trials])
    r = np.array([t.pearson for t in trials if t.pearson is not None])
    sd = lambda a: float(a.std(ddof=1)) if len(a) > 1 else 0.0
    n_undef = len(trials) - len(r)
    if n_undef:
        log.info("%s/%s: %d of %d trials had undefined pearson", trials[0].dataset, trials[0].kind,
                 n_undef, len(trials))
    return CellSummary(float(p.mean()), sd(p), float(r.mean()) if len(r) else math.nan, sd(r),
                       n_undef, len(trials))


def run_experiment(cfg: ExperimentConfig, graphs: dict[str, WeightedGraph] | None = None) -> ExperimentSummary:
    """Run ``repetitions`` trials for every (dataset, index) and aggregate.

    ``graphs`` may supply preloaded graphs keyed by dataset name; otherwise
    each manifest entry is read from disk. A dataset that fails to load or
    evaluate is recorded in ``failures`` and skipped.
    """
    graphs = dict(graphs or {})
    summary = ExperimentSummary([], list(cfg.indices), cfg.repetitions)
    entries = list(cfg.datasets) or [DatasetEntry(n, "") for n in graphs]
    loaded = {}
    for entry in entries:
        try:
            g = graphs[entry.name] if entry.name in graphs else load_edge_list(entry.path)
            if g.n_edges < 2:
                raise ValueError("dataset needs at least two edges")
            summary.stats[entry.name] = dataset_stats(g)
        except (OSError, ValueError) as exc:
            summary.failures[entry.name] = f"{type(exc).__name__}: {exc}"
            log.warning("dataset %s failed to load: %s", entry.name, exc)
            continue
        loaded[entry.name] = (g, entry.weights_need_transform)

    units = [(name, flag, cfg, rep) for name, (_, flag) in loaded.items()
             for rep in range(cfg.repetitions)]
    if cfg.workers > 1 and len(units) > 1:
        graphs_only = {k: v[0] for k, v in loaded.items()}
        with ProcessPoolExecutor(cfg.workers, initializer=_init_worker,
                                 initargs=(graphs_only,)) as pool:
            results = list(pool.map(_run_unit, units, chunksize=1))
    else:
        results = []
        for name, flag, c, rep in units:
            results.append(_unit(loaded[name][0], name, flag, c, rep))

    by_cell: dict[tuple[str, IndexKind], list[TrialResult]] = {}
    for batch in results:
        for t in batch:
            by_cell.setdefault((t.dataset, t.kind), []).append(t)
            summary.trials.append(t)
    for name in loaded:
        summary.datasets.append(name)
        for kind in cfg.indices:
            summary.cells[(name, kind)] = _summarize(by_cell[(name, kind)])
    return summary


def _best(summary: ExperimentSummary, name: str, attr: str) -> float:
    vals = [getattr(summary.cells[(name, k)], attr) for k in summary.indices]
    vals = [v for v in vals if not math.isnan(v)]
    return max(vals) if vals else math.nan


def correlate_clustering_accuracy(summary: ExperimentSummary) -> ClusteringCorrelation:
    """Correlate per-dataset best accuracies with C and C_w.

    Best means the column maximum over indices of the mean precision (link)
    and of the mean Pearson accuracy (weight).
    """
    names = summary.datasets
    if len(names) < 3:
        raise ValueError("need at least three datasets")
    c = [summary.stats[n].C for n in names]
    cw = [summary.stats[n].C_w for n in names]
    link = [_best(summary, n, "mean_precision") for n in names]
    weight = [_best(summary, n, "mean_pearson") for n in names]
    for vec in (c, cw, link, weight):
        if any(math.isnan(v) for v in vec):
            raise UndefinedCorrelation("a dataset has an undefined clustering or accuracy value")
    return ClusteringCorrelation(pearson(c, link), pearson(cw, link),
                                 pearson(c, weight), pearson(cw, weight))


# -- reports -----------------------------------------------------------------

def _num(x: float, digits: int | None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "undef"
    if isinstance(x, (int, np.integer)):
        return str(x)
    return repr(float(x)) if digits is None else f"{x:.{digits}f}"


def _render(header: list[str], rows: list[list[str]], fmt: str) -> str:
    if fmt == "md":
        lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
        lines += ["| " + " | ".join(r) + " |" for r in rows]
        return "\n".join(lines) + "\n"
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(header)]
    fmt_row = lambda r: "  ".join(c.rjust(w) if i else c.ljust(w)
                                  for i, (c, w) in enumerate(zip(r, widths))).rstrip()
    sep = "  ".join("-" * w for w in widths)
    return "\n".join([fmt_row(header), sep] + [fmt_row(r) for r in rows]) + "\n"


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


_TOPO_COLS = [("|V|", "n_nodes"), ("|E|", "n_edges"), ("<k>", "avg_degree"), ("C", "C"), ("C_w", "C_w")]


def _topology(summary, fmt, digits):
    if fmt == "csv":
        rows = []
        for n in summary.datasets:
            st = summary.stats[n]
            row = [n]
            for _, attr in _TOPO_COLS:
                v = getattr(st, attr)
                row += [v] if isinstance(v, int) else [_num(v, 3), _num(v, None)]
            rows.append(row)
        header = ["dataset", "n_nodes", "n_edges", "avg_degree", "avg_degree_full", "C", "C_full",
                  "C_w", "C_w_full"]
        return _csv(header, rows)
    header = ["Networks"] + summary.datasets
    rows = []
    for label, attr in _TOPO_COLS:
        d = 2 if attr == "avg_degree" and digits is not None else digits
        rows.append([label] + [_num(getattr(summary.stats[n], attr), d) for n in summary.datasets])
    return _render(header, rows, fmt)


def _metric(summary, attr, std_attr, fmt, digits):
    best = {n: _best(summary, n, attr) for n in summary.datasets}
    if fmt == "csv":
        header = ["dataset", "index", "mean", "mean_full", "std_ext", "n_trials", "n_undefined", "best"]
        rows = []
        for n in summary.datasets:
            for k in summary.indices:
                cell = summary.cells[(n, k)]
                v = getattr(cell, attr)
                rows.append([n, k.value, _num(v, 3), _num(v, None), _num(getattr(cell, std_attr), None),
                             cell.n_trials, cell.n_undefined, int(v == best[n])])
        return _csv(header, rows)
    header = ["Networks"] + summary.datasets
    rows = []
    for k in summary.indices:
        row = [k.value]
        for n in summary.datasets:
            v = getattr(summary.cells[(n, k)], attr)
            s = _num(v, digits)
            if v == best[n]:
                s = f"**{s}**" if fmt == "md" else s + "*"
            row.append(s)
        rows.append(row)
    return _render(header, rows, fmt)


def emit_report(summary: ExperimentSummary, fmt: str = "table",
                full_precision: bool = False) -> dict[str, str]:
    """Render the topology, precision and Pearson tables.

    Returns ``{"topology": ..., "precision": ..., "pearson": ...}``. Text and
    markdown tables put indices in rows and datasets in columns, marking the
    best value of each column. CSV output is long-form with fixed columns.
    """
    if fmt not in ("table", "csv", "md"):
        raise ValueError(f"unknown report format {fmt!r}")
    digits = None if full_precision else 3
    return {
        "topology": _topology(summary, fmt, digits),
        "precision": _metric(summary, "mean_precision", "std_precision", fmt, digits),
        "pearson": _metric(summary, "mean_pearson", "std_pearson", fmt, digits),
    }


def emit_runlog(summary: ExperimentSummary) -> str:
    lines = ["dataset\tindex\trepetition\tseed\tprecision\tlambda\tclamped\tpearson"]
    lines += [t.to_record() for t in summary.trials]
    lines += [f"# failed\t{name}\t{msg}" for name, msg in summary.failures.items()]
    return "\n".join(lines) + "\n"


# -- synthetic data ------------------------------------------------------------

def generate_clique_family(clique_count: int, clique_size: int, noise_edges: int,
                           seed: int) -> WeightedGraph:
    """Disjoint cliques plus random inter-clique noise edges.

    Intra-clique edges carry their shared-membership count (1, since the
    cliques are disjoint); noise edges have weight 1.
    """
    if clique_size < 3:
        raise ValueError("clique_size must be >= 3")
    if clique_count < 1:
        raise ValueError("clique_count must be >= 1")
    n = clique_count * clique_size
    available = n * (n - 1) // 2 - clique_count * clique_size * (clique_size - 1) // 2
    if not 0 <= noise_edges <= available:
        raise ValueError(f"noise_edges must lie in [0, {available}]")
    edges = {}
    for c in range(clique_count):
        base = c * clique_size
        for i in range(clique_size):
            for j in range(i + 1, clique_size):
                edges[(base + i, base + j)] = edges.get((base + i, base + j), 0.0) + 1.0
    rng = np.random.default_rng(seed)
    noise = set()
    while len(noise) < noise_edges:
        u, v = rng.integers(0, n, size=2).tolist()
        if u // clique_size == v // clique_size:
            continue
        noise.add((min(u, v), max(u, v)))
    for p in sorted(noise):
        edges[p] = 1.0
    return WeightedGraph.from_edges(n, [(u, v, w) for (u, v), w in edges.items()])

