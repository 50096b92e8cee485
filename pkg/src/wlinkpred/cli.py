"""Command-line front end: ``wlinkpred {stats,predict,weights,benchmark,correlate}``."""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys

from wlinkpred.evaluation import UndefinedCorrelation, fit_lambda, pearson, split_edges
from wlinkpred.experiment import (ExperimentConfig, ExperimentSummary,
                                  correlate_clustering_accuracy, dataset_stats, emit_report,
                                  emit_runlog, run_experiment, uses_transform)
from wlinkpred.graph import EdgeListError, load_edge_list, read_manifest
from wlinkpred.similarity import (TABLE_ORDER, IndexKind, regularize_weights, score_all,
                                  unregularize_weight)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_LOAD = 3
EXIT_RUNTIME = 4

_EXT = {"table": "txt", "csv": "csv", "md": "md"}


class UsageError(Exception):
    pass


class LoadError(Exception):
    pass


def _index(name: str) -> IndexKind:
    try:
        return IndexKind.parse(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _indices(spec: str | None) -> tuple[IndexKind, ...]:
    if not spec:
        return TABLE_ORDER
    return tuple(_index(s) for s in spec.split(",") if s.strip())


def _load(path: str):
    try:
        return load_edge_list(os.fspath(path))
    except (OSError, EdgeListError, ValueError) as exc:
        raise LoadError(f"cannot load {path}: {exc}") from None


def _manifest(path: str):
    try:
        return read_manifest(path)
    except (OSError, ValueError) as exc:
        raise LoadError(f"cannot read manifest {path}: {exc}") from None


def _fmt(x: float, full: bool) -> str:
    """Three decimals with trailing zeros trimmed (``1``, ``0.25``), or repr."""
    if x is None or math.isnan(x):
        return "undefined"
    if full:
        return repr(float(x))
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


# -- subcommands -------------------------------------------------------------

def cmd_stats(args, out) -> int:
    if args.manifest:
        entries = [(e.name, e.path) for e in _manifest(args.manifest)]
    else:
        entries = [(os.path.splitext(os.path.basename(args.dataset))[0], args.dataset)]
    summary = ExperimentSummary([], [], 0)
    for name, path in entries:
        g = _load(path)
        if g.n_nodes == 0:
            raise LoadError(f"{path}: empty graph")
        summary.datasets.append(name)
        summary.stats[name] = dataset_stats(g)
    out.write(emit_report(summary, args.format, args.full_precision)["topology"])
    return EXIT_OK


def cmd_predict(args, out) -> int:
    kind = _index(args.index)
    g = _load(args.dataset)
    if args.needs_transform and uses_transform(kind, True, args.transform_scope):
        g = regularize_weights(g)
    table = score_all(g, kind, workers=args.workers)
    for i in table.ranking()[:args.top_k].tolist():
        a, b = table.labelled_pair(i)
        out.write(f"{a} {b} {_fmt(float(table.scores[i]), args.full_precision)}\n")
    return EXIT_OK


def cmd_weights(args, out) -> int:
    kind = _index(args.index)
    g = _load(args.dataset)
    split = split_edges(g, args.test_fraction, args.seed)
    train, test = split.train, split.test_edges
    transformed = args.needs_transform and uses_transform(kind, True, args.transform_scope)
    if transformed:
        train = regularize_weights(train)
        test = [(p, math.exp(-1.0 / w)) for p, w in test]
    table = score_all(train, kind, workers=args.workers)
    f = lambda x: _fmt(x, args.full_precision)
    header = ["labelA", "labelB", "actual", "predicted"]
    if transformed:
        header = ["labelA", "labelB", "actual", "actual_reg", "predicted_reg", "predicted"]
    out.write(" ".join(header) + "\n")
    try:
        fit = fit_lambda(table, test, args.lambda_support)
    except ValueError as exc:
        out.write(f"# lambda=undefined clamped=0 pearson=undefined ({exc})\n")
        return EXIT_OK
    scores = table.lookup([p for p, _ in test])
    preds = fit.lam * scores
    for ((u, v), w), (_, raw), pw in zip(test, split.test_edges, preds.tolist()):
        a, b = sorted((g.labels[u], g.labels[v]))
        if transformed:
            back = f(unregularize_weight(pw)) if 0.0 < pw < 1.0 else "-"
            out.write(f"{a} {b} {f(raw)} {f(w)} {f(pw)} {back}\n")
        else:
            out.write(f"{a} {b} {f(w)} {f(pw)}\n")
    try:
        r = f(pearson(preds, [w for _, w in test]))
    except UndefinedCorrelation:
        r = "undefined"
    out.write(f"# lambda={f(fit.lam)} bound={f(fit.upper_bound)} clamped={int(fit.clamped)} "
              f"residual={f(fit.residual_norm)} pearson={r}\n")
    return EXIT_OK


def _experiment_config(args) -> ExperimentConfig:
    if args.reps < 1:
        raise UsageError("--reps must be >= 1")
    if not 0.0 < args.test_fraction < 1.0:
        raise UsageError("--test-fraction must lie in (0, 1)")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    indices = _indices(args.index)
    return ExperimentConfig(
        datasets=tuple(_manifest(args.manifest)), indices=indices,
        test_fraction=args.test_fraction, repetitions=args.reps, master_seed=args.seed,
        transform_scope=args.transform_scope, lambda_support=args.lambda_support,
        L=args.L, paired_splits=args.paired_splits == "on", workers=args.workers)


def _report_failures(summary, err) -> None:
    for name, msg in summary.failures.items():
        err.write(f"dataset {name} failed: {msg}\n")


def cmd_benchmark(args, out, err=sys.stderr) -> int:
    cfg = _experiment_config(args)
    summary = run_experiment(cfg)
    _report_failures(summary, err)
    if not summary.datasets:
        return EXIT_LOAD
    reports = emit_report(summary, args.format, args.full_precision)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        ext = _EXT[args.format]
        for name, text in reports.items():
            with open(os.path.join(args.out, f"{name}.{ext}"), "w", encoding="utf-8") as fh:
                fh.write(text)
        with open(os.path.join(args.out, "runlog.tsv"), "w", encoding="utf-8") as fh:
            fh.write(emit_runlog(summary))
    for name in ("topology", "precision", "pearson"):
        out.write(f"== {name}\n{reports[name]}")
    return EXIT_OK


def cmd_correlate(args, out, err=sys.stderr) -> int:
    cfg = _experiment_config(args)
    summary = run_experiment(cfg)
    _report_failures(summary, err)
    if not summary.datasets:
        return EXIT_LOAD
    if len(summary.datasets) < 3:
        raise UsageError("correlate needs at least three loadable datasets")
    try:
        cc = correlate_clustering_accuracy(summary)
    except UndefinedCorrelation as exc:
        out.write(f"correlation undefined: {exc}\n")
        return EXIT_OK
    f = lambda x: _fmt(x, args.full_precision)
    out.write("coef  link  weight\n")
    out.write(f"C     {f(cc.c_link)}  {f(cc.c_weight)}\n")
    out.write(f"C_w   {f(cc.cw_link)}  {f(cc.cw_weight)}\n")
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wlinkpred", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, workers=True):
        sp.add_argument("--full-precision", action="store_true",
                        help="print full float precision instead of 3 decimals")
        if workers:
            sp.add_argument("--workers", type=int, default=1)

    def transform_flags(sp):
        sp.add_argument("--transform-scope", choices=["reliable_only", "all_weighted"],
                        default="all_weighted")

    sp = sub.add_parser("stats", help="topology table (|V|, |E|, <k>, C, C_w)")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--dataset")
    g.add_argument("--manifest")
    sp.add_argument("--format", choices=["table", "csv", "md"], default="table")
    common(sp, workers=False)

    sp = sub.add_parser("predict", help="top-k candidate pairs by score")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--index", required=True)
    sp.add_argument("--top-k", type=int, default=10)
    sp.add_argument("--needs-transform", action="store_true",
                    help="map weights through exp(-1/w) before weighted indices")
    transform_flags(sp)
    common(sp)

    sp = sub.add_parser("weights", help="predicted weights of the test edges of one split")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--index", required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--test-fraction", type=float, default=0.1)
    sp.add_argument("--needs-transform", action="store_true")
    sp.add_argument("--lambda-support", choices=["full", "test_only"], default="full")
    transform_flags(sp)
    common(sp)

    for name, hlp in (("benchmark", "repeated-split experiment over a manifest"),
                      ("correlate", "correlate best accuracies with clustering")):
        sp = sub.add_parser(name, help=hlp)
        sp.add_argument("--manifest", required=True)
        sp.add_argument("--seed", type=int, required=True)
        sp.add_argument("--index", help="comma-separated index names (default: all nine)")
        sp.add_argument("--reps", type=int, default=100)
        sp.add_argument("--test-fraction", type=float, default=0.1)
        sp.add_argument("--top-l", dest="L", type=int, default=None,
                        help="precision cutoff L (default: test-set size)")
        sp.add_argument("--lambda-support", choices=["full", "test_only"], default="full")
        sp.add_argument("--paired-splits", choices=["on", "off"], default="on")
        sp.add_argument("--format", choices=["table", "csv", "md"], default="table")
        sp.add_argument("--out")
        transform_flags(sp)
        common(sp)
    return p


_COMMANDS = {"stats": cmd_stats, "predict": cmd_predict, "weights": cmd_weights,
             "benchmark": cmd_benchmark, "correlate": cmd_correlate}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=err)
    cmd = _COMMANDS[args.command]
    try:
        if args.command in ("benchmark", "correlate"):
            return cmd(args, out, err)
        return cmd(args, out)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except LoadError as exc:
        err.write(f"load error: {exc}\n")
        return EXIT_LOAD
    except (ValueError, RuntimeError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
