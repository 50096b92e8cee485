import math
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import spearmanr

from wlinkpred import (ExperimentConfig, IndexKind, UndefinedCorrelation, WeightedGraph,
                       correlate_clustering_accuracy, emit_report, generate_clique_family,
                       network_clustering, read_manifest, run_experiment, run_trial)
from wlinkpred.experiment import (CellSummary, DatasetStats, ExperimentSummary, derive_seed,
                                  emit_runlog, uses_transform)

DATA = Path(__file__).parent / "data"
RA_FAMILY = (IndexKind.RA, IndexKind.WRA, IndexKind.rWRA)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(repetitions=0)
    with pytest.raises(ValueError):
        ExperimentConfig(test_fraction=1.0)
    with pytest.raises(ValueError):
        ExperimentConfig(transform_scope="some")
    with pytest.raises(ValueError):
        ExperimentConfig(lambda_support="diag")
    with pytest.raises(ValueError):
        ExperimentConfig(indices=())


def test_derive_seed_stable():
    assert derive_seed(1, "a", "CN", 0) == derive_seed(1, "a", "CN", 0)
    assert derive_seed(1, "a", "CN", 0) != derive_seed(1, "a", "CN", 1)
    assert 0 <= derive_seed("x") < 2 ** 63


def test_transform_scope():
    assert uses_transform(IndexKind.WRA, True, "all_weighted")
    assert not uses_transform(IndexKind.WRA, True, "reliable_only")
    assert uses_transform(IndexKind.rWRA, True, "reliable_only")
    assert not uses_transform(IndexKind.RA, True, "all_weighted")
    assert not uses_transform(IndexKind.rWRA, False, "all_weighted")


def test_trial_triangle_hand_trace():
    tri = WeightedGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    cfg = ExperimentConfig(test_fraction=0.34)  # one of three edges held out
    for seed in range(5):
        t = run_trial(tri, IndexKind.CN, cfg, seed)
        # the train graph is a path whose only candidate pair is the held-out edge
        assert t.precision == 1.0 and t.L == 1 and t.n_scored == 1
        assert t.pearson is None  # single test edge


def test_trial_deterministic():
    g = generate_clique_family(4, 5, 10, seed=1)
    cfg = ExperimentConfig()
    a = run_trial(g, IndexKind.rWAA, cfg, 99)
    b = run_trial(g, IndexKind.rWAA, cfg, 99)
    assert a == b and a.to_record() == b.to_record()


def test_trial_empty_scores_gives_undefined():
    g = WeightedGraph.from_edges(6, [(0, 1), (2, 3), (4, 5)])
    t = run_trial(g, IndexKind.RA, ExperimentConfig(test_fraction=0.34), 0)
    assert t.precision == 0.0 and t.pearson is None and math.isnan(t.lam)


def test_trial_beats_random_on_cliques():
    g = generate_clique_family(6, 6, 15, seed=2)
    n, m = g.n_nodes, g.n_edges
    cfg = ExperimentConfig()
    # random guessing over all non-train pairs
    k = round(0.1 * m)
    baseline = k / (n * (n - 1) / 2 - (m - k))
    precs = [run_trial(g, IndexKind.RA, cfg, s).precision for s in range(10)]
    assert np.mean(precs) >= baseline


def test_run_experiment_single_rep_equals_trial():
    g = generate_clique_family(4, 5, 8, seed=3)
    cfg = ExperimentConfig(indices=(IndexKind.CN, IndexKind.rWRA), repetitions=1, master_seed=5,
                           paired_splits=False)
    s = run_experiment(cfg, graphs={"g": g})
    for kind in cfg.indices:
        t = run_trial(g, kind, cfg, derive_seed(5, "g", kind.value, 0))
        cell = s.cells[("g", kind)]
        assert cell.mean_precision == t.precision
        assert cell.n_trials == 1
        if t.pearson is None:
            assert cell.n_undefined == 1
        else:
            assert cell.mean_pearson == t.pearson


def test_paired_splits_share_test_sets():
    g = generate_clique_family(4, 5, 8, seed=3)
    cfg = ExperimentConfig(indices=(IndexKind.CN, IndexKind.AA), repetitions=3)
    s = run_experiment(cfg, graphs={"g": g})
    assert len(s.trials) == 6
    # CN and AA rank the same candidate set; with shared splits L is equal per rep
    by_rep = {}
    for t in s.trials:
        by_rep.setdefault(t.repetition, set()).add(t.L)
    assert all(len(v) == 1 for v in by_rep.values())


def test_run_experiment_manifest_and_failures():
    cfg = ExperimentConfig(datasets=read_manifest(DATA / "broken_manifest.ini"),
                           indices=(IndexKind.RA,), repetitions=2)
    s = run_experiment(cfg)
    assert s.datasets == ["florentine"]
    assert "missing" in s.failures
    assert "failed" in emit_runlog(s)


def test_summary_invariants_and_determinism():
    cfg = ExperimentConfig(datasets=read_manifest(DATA / "toy_manifest.ini"),
                           indices=(IndexKind.CN, IndexKind.WAA, IndexKind.rWRA),
                           repetitions=4, master_seed=1)
    a = run_experiment(cfg)
    b = run_experiment(cfg)
    assert a.cells == b.cells and a.trials == b.trials
    for cell in a.cells.values():
        assert 0.0 <= cell.mean_precision <= 1.0
        assert math.isnan(cell.mean_pearson) or -1.0 <= cell.mean_pearson <= 1.0
        assert cell.n_trials == 4 and 0 <= cell.n_undefined <= 4


def test_workers_do_not_change_results():
    cfg = ExperimentConfig(datasets=read_manifest(DATA / "toy_manifest.ini"),
                           indices=(IndexKind.RA, IndexKind.rWAA), repetitions=3, master_seed=2)
    one = run_experiment(cfg)
    many = run_experiment(ExperimentConfig(**{**cfg.__dict__, "workers": 3}))
    assert [t.to_record() for t in one.trials] == [t.to_record() for t in many.trials]
    assert one.cells == many.cells


def test_seed_stability():
    g = generate_clique_family(8, 6, 30, seed=4)
    kinds = (IndexKind.RA,)
    runs = [run_experiment(ExperimentConfig(indices=kinds, repetitions=30, master_seed=s),
                           graphs={"g": g}).cells[("g", IndexKind.RA)] for s in (1, 2)]
    se = math.hypot(*(c.std_precision / math.sqrt(c.n_trials) for c in runs))
    assert abs(runs[0].mean_precision - runs[1].mean_precision) <= 3 * se + 1e-12


# -- clustering/accuracy correlation -----------------------------------------------

REF_NAMES = ["hsaPPI", "Cel", "Geom", "String", "Corum", "String_Corum"]
REF_C = [0.169, 0.346, 0.486, 0.301, 0.747, 0.371]
REF_CW = [0.167, 0.291, 0.535, 0.231, 0.795, 0.278]
# best (bold) values of the published precision and Pearson tables
REF_BEST_PREC = [0.23, 0.137, 0.493, 0.244, 0.895, 0.323]
REF_BEST_PCC = [0.305, 0.216, 0.454, 0.391, 0.858, 0.438]


def _summary_from(names, c, cw, prec, pcc, kinds=(IndexKind.RA,)):
    s = ExperimentSummary(list(names), list(kinds), 1)
    for i, n in enumerate(names):
        s.stats[n] = DatasetStats(10, 20, 4.0, c[i], cw[i])
        for k in kinds:
            s.cells[(n, k)] = CellSummary(prec[i], 0.0, pcc[i], 0.0, 0, 1)
    return s


def test_correlate_published_tables():
    s = _summary_from(REF_NAMES, REF_C, REF_CW, REF_BEST_PREC, REF_BEST_PCC)
    got = correlate_clustering_accuracy(s)
    ref = [np.corrcoef(x, y)[0, 1] for x, y in ((REF_C, REF_BEST_PREC), (REF_CW, REF_BEST_PREC),
                                                 (REF_C, REF_BEST_PCC), (REF_CW, REF_BEST_PCC))]
    np.testing.assert_allclose(got, ref, atol=1e-12)
    # the published correlation table is strongly positive throughout
    assert all(v > 0.7 for v in got)


def test_correlate_uses_best_index():
    kinds = (IndexKind.CN, IndexKind.RA)
    s = _summary_from("abc", [0.1, 0.2, 0.3], [0.1, 0.25, 0.3], [0.0] * 3, [0.0] * 3, kinds)
    for i, n in enumerate("abc"):
        s.cells[(n, IndexKind.RA)] = CellSummary(0.1 * (i + 1), 0, 0.2 * (i + 1), 0, 0, 1)
    got = correlate_clustering_accuracy(s)
    assert got.c_link == pytest.approx(1.0) and got.c_weight == pytest.approx(1.0)


def test_correlate_errors():
    s = _summary_from("abc", [0.1, 0.2, 0.3], [0.1, 0.2, 0.3], [0.5] * 3, [0.2, 0.3, 0.4])
    with pytest.raises(UndefinedCorrelation):
        correlate_clustering_accuracy(s)
    with pytest.raises(ValueError):
        correlate_clustering_accuracy(_summary_from("ab", [0.1, 0.2], [0.1, 0.2], [1, 2], [1, 2]))


def test_correlate_monotone_family():
    c = [0.2, 0.4, 0.6, 0.8]
    s = _summary_from("abcd", c, c, [0.1, 0.15, 0.4, 0.5], [0.05, 0.2, 0.3, 0.6])
    assert all(v > 0 for v in correlate_clustering_accuracy(s))


# -- clique family ----------------------------------------------------------------

def test_clique_family_basic():
    g = generate_clique_family(5, 5, 0, seed=0)
    assert g.n_edges == 50
    assert network_clustering(g) == 1.0 and network_clustering(g, True) == 1.0
    tri = generate_clique_family(1, 3, 0, seed=0)
    assert (tri.n_nodes, tri.n_edges) == (3, 3)
    noisy = generate_clique_family(5, 5, 20, seed=0)
    assert noisy.n_edges == 70
    for bad in ((1, 2, 0), (0, 3, 0), (1, 3, 1), (2, 3, 10)):
        with pytest.raises(ValueError):
            generate_clique_family(*bad, seed=0)


def test_clique_family_noise_lowers_clustering():
    levels = [0, 20, 60, 150]
    means = [np.mean([network_clustering(generate_clique_family(10, 5, k, s)) for s in range(10)])
             for k in levels]
    assert all(a > b for a, b in zip(means, means[1:]))


def test_clique_family_accuracy_trend():
    levels = [0, 40, 120]
    prec = []
    for k in levels:
        vals = []
        for s in range(4):
            g = generate_clique_family(10, 5, k, seed=s)
            cfg = ExperimentConfig(indices=RA_FAMILY, repetitions=3, master_seed=s)
            summ = run_experiment(cfg, graphs={"g": g})
            vals.append(np.mean([summ.cells[("g", kd)].mean_precision for kd in RA_FAMILY]))
        prec.append(np.mean(vals))
    rho = spearmanr(levels, prec)[0]
    assert rho < 0


# -- reports -----------------------------------------------------------------------

def test_report_empty():
    s = ExperimentSummary([], [IndexKind.CN], 1)
    for fmt in ("table", "csv", "md"):
        r = emit_report(s, fmt)
        assert set(r) == {"topology", "precision", "pearson"}
    assert emit_report(s, "csv")["precision"] == "dataset,index,mean,mean_full,std_ext,n_trials,n_undefined,best\n"
    assert emit_report(s, "table")["precision"].splitlines()[0] == "Networks"


def test_report_single_cell():
    s = _summary_from(["d"], [0.5], [0.4], [0.123456], [0.25])
    r = emit_report(s, "md")
    assert "| RA | **0.123** |" in r["precision"]
    assert emit_report(s, "table")["pearson"].splitlines()[-1].split() == ["RA", "0.250*"]
    csv = emit_report(s, "csv")["precision"].splitlines()
    assert csv[1] == "d,RA,0.123,0.123456,0.0,1,0,1"
    assert "0.123456" in emit_report(s, "table", full_precision=True)["precision"]
    with pytest.raises(ValueError):
        emit_report(s, "html")
