"""Hold-out evaluation: edge splits, precision, the weight-scaling fit and Pearson accuracy."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from wlinkpred.graph import WeightedGraph
from wlinkpred.similarity import ScoreTable

__all__ = [
    "UndefinedCorrelation",
    "SplitResult",
    "LambdaFit",
    "split_edges",
    "test_size",
    "precision_at",
    "fit_lambda",
    "predict_weights",
    "pearson",
]

log = logging.getLogger(__name__)


class UndefinedCorrelation(ValueError):
    """Pearson correlation of a constant vector."""


@dataclass(frozen=True)
class SplitResult:
    train: WeightedGraph
    test_edges: list  # [((u, v), w), ...] with u < v, sorted
    split_seed: int
    ratio: float

    @property
    def test_pairs(self) -> list[tuple[int, int]]:
        return [p for p, _ in self.test_edges]

    @property
    def test_weights(self) -> np.ndarray:
        return np.array([w for _, w in self.test_edges], dtype=np.float64)


@dataclass(frozen=True)
class LambdaFit:
    lam: float
    upper_bound: float
    clamped: bool
    residual_norm: float
    unconstrained: float


def test_size(n_edges: int, fraction: float) -> int:
    # round half up; Python's round() is banker's rounding
    return int(math.floor(fraction * n_edges + 0.5))


def split_edges(g: WeightedGraph, test_fraction: float, seed: int) -> SplitResult:
    """Uniform random train/test partition of the edges of ``g``."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    m = g.n_edges
    k = test_size(m, test_fraction)
    if k == 0 or k == m:
        raise ValueError(f"test fraction {test_fraction} on {m} edges leaves an empty side")
    u, v, w = g.edges()
    rng = np.random.default_rng(seed)
    test_idx = np.sort(rng.choice(m, size=k, replace=False))
    keep = np.ones(m, dtype=bool)
    keep[test_idx] = False
    train = WeightedGraph._from_arrays(g.labels, u[keep], v[keep], w[keep])
    test = [((int(a), int(b)), float(c)) for a, b, c in zip(u[test_idx], v[test_idx], w[test_idx])]
    return SplitResult(train, test, seed, test_fraction)


def precision_at(scores: ScoreTable, test_pairs, L: int, tie_seed: int | None = None) -> float:
    """Fraction of the top-``L`` ranked pairs that are test edges.

    When the table has fewer than ``L`` entries the missing slots count as misses.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    test = {(min(a, b), max(a, b)) for a, b in test_pairs}
    if not test:
        return 0.0
    if len(scores) < L:
        log.info("score table has %d entries < L=%d; padding with misses", len(scores), L)
    top = scores.ranking(tie_seed)[:L]
    hits = sum((r, c) in test for r, c in zip(scores.rows[top].tolist(), scores.cols[top].tolist()))
    return hits / L


def fit_lambda(scores: ScoreTable, test_edges: Sequence, support: str = "full") -> LambdaFit:
    """Least-squares scale ``lam`` so that ``lam * S`` matches the test weights.

    Minimizes ``||lam * S - W||_F`` subject to ``0 < lam <= max(W) / max(S)``.
    With ``support="full"`` every scored pair enters the objective (non-test
    pairs have target weight 0); ``"test_only"`` restricts it to test pairs.
    """
    if support not in ("full", "test_only"):
        raise ValueError(f"unknown lambda support {support!r}")
    if len(test_edges) == 0:
        raise ValueError("no test edges")
    pairs = [p for p, _ in test_edges]
    w = np.array([x for _, x in test_edges], dtype=np.float64)
    s_test = scores.lookup(pairs)
    sw = float(math.fsum(s_test * w))
    if support == "full":
        ss = float(math.fsum(scores.scores ** 2))
    else:
        ss = float(math.fsum(s_test ** 2))
    if ss == 0.0:
        raise ValueError("all scores are zero")
    m_st = scores.max_score()
    bound = float(w.max()) / m_st
    lam_star = sw / ss
    clamped = False
    lam = lam_star
    if lam_star > bound:
        lam, clamped = bound, True
    elif lam_star <= 0.0:
        # open constraint lam > 0: take one relative ulp step above zero
        lam, clamped = bound * np.finfo(float).eps, True
    # residual = sqrt(lam^2 ss - 2 lam sw + ww) without cancellation
    if support == "full":
        off_test_sq = ss - float(math.fsum(s_test ** 2))
        r2 = math.fsum((lam * s_test - w) ** 2) + lam * lam * max(off_test_sq, 0.0)
    else:
        r2 = math.fsum((lam * s_test - w) ** 2)
    return LambdaFit(lam, bound, clamped, math.sqrt(r2), lam_star)


def predict_weights(scores: ScoreTable, fit: LambdaFit | float, pairs) -> list[tuple[tuple[int, int], float]]:
    lam = fit.lam if isinstance(fit, LambdaFit) else float(fit)
    pairs = [(int(a), int(b)) for a, b in pairs]
    if not pairs:
        return []
    return list(zip(pairs, (lam * scores.lookup(pairs)).tolist()))


def pearson(xs, ys) -> float:
    """Sample Pearson correlation; raises UndefinedCorrelation for constant input."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d and of equal length")
    if len(x) < 2:
        raise UndefinedCorrelation("need at least two observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelation("correlation undefined for a constant vector")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))
