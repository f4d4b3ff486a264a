"""Command-line interface: ``infolimit <command> ...``.

Every command prints a text report, and with ``--out DIR`` also writes a
JSON report (``<command>.json``) and any plot-ready tables
(``<command>.csv``) with a ``.manifest.json`` sidecar. Numbers in the JSON
report are ``{"value": x, "unit": u}`` objects.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import warnings
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analytic import Exponential1D, Gaussian1D, Product, divergence_curve, write_curve_table
from .classify import KINDS, ClassifierSpec, cross_validated_predictions, counts_from_predictions, default_kind
from .confusion import ConfusionCounts, rates
from .datagen import GenSpec, generate
from .errors import InfolimitError
from .ingest import SchemaSpec, greedy_select, invocation_bound, load_csv, load_schema
from .knn import EstimatorConfig, estimate
from .sweep import (
    BALANCE_REGION, VERDICT_TOLERANCE, SweepPoint, default_grid, fit_leakage_model,
    kappa_limit, predict_kappa_curve, sweep, verdict,
)
from .table import write_csv

BITS, NONE, COUNT = "bits", "dimensionless", "count"

SWEEP_COLUMNS = (
    "f1_target", "f1", "n1_true", "n1_leak", "n2_leak", "n2_true", "kappa", "k", "k12",
    "k21", "k_w", "k_max", "capped12", "capped21", "cappedK", "cdi12", "cdi21", "cdr",
    "se12", "se21", "kappa_limit",
)
SWEEP_UNITS = {
    "f1_target": NONE, "f1": NONE, "kappa": NONE, "kappa_limit": NONE,
    "n1_true": COUNT, "n1_leak": COUNT, "n2_leak": COUNT, "n2_true": COUNT,
}


class Report:
    """Collects the JSON tree, the text lines and any captured warnings."""

    def __init__(self, command):
        self.command = command
        self.body = {"command": command}
        self.lines = []
        self.warnings = []

    def text(self, line=""):
        self.lines.append(line)


def q(value, unit):
    """A number with its unit; non-finite values become null."""
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        value = None
    return {"value": value, "unit": unit}


def _fmt(x, digits=4):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return "n/a"
    return f"{x:.{digits}f}"


# ---------------------------------------------------------------------------
# manifests and output


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def make_manifest(args, config, inputs=()):
    return {
        "command": args.command,
        "argv": list(args.argv),
        "config": config,
        "seed": args.seed,
        "version": __version__,
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _dump(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def emit(report, args, manifest, tables=()):
    """Print the text block; with ``--out`` write the JSON report and tables."""
    report.body["warnings"] = report.warnings
    report.body["manifest"] = manifest
    sys.stdout.write("\n".join(report.lines) + "\n")
    if args.out is None:
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{report.command}.json").write_text(_dump(report.body))
    (out / f"{report.command}.txt").write_text("\n".join(report.lines) + "\n")
    for name, content in tables:
        (out / name).write_text(content)
        (out / f"{name}.manifest.json").write_text(_dump(manifest))


# ---------------------------------------------------------------------------
# shared pieces


def _schema(args):
    schema = load_schema(args.schema) if getattr(args, "schema", None) else SchemaSpec()
    changes = {}
    if args.class_column is not None:
        changes["class_column"] = args.class_column
    if args.class1_label is not None:
        changes["class1_label"] = args.class1_label
    if args.delimiter is not None:
        changes["delimiter"] = args.delimiter
    if changes:
        schema = SchemaSpec(**{**schema.__dict__, **changes})
    return schema


def _load(args, report):
    schema = _schema(args)
    ds = load_csv(args.data, schema)
    if args.columns:
        ds = ds.select([c.strip() for c in args.columns.split(",")])
    summary = ds.summary()
    report.body["dataset"] = {
        "name": summary["name"], "class_names": summary["class_names"],
        "variables": [{"name": v.name, "kind": v.kind} for v in ds.variables],
        "n1": q(ds.n1, COUNT), "n2": q(ds.n2, COUNT), "n": q(ds.n, COUNT),
        "f1": q(ds.f1, NONE), "d": q(ds.d, COUNT),
        "dropped_rows": q(ds.meta.get("dropped_rows", 0), COUNT),
    }
    report.text(f"dataset {ds.name}: N1={ds.n1} ({ds.class_names[0]}), "
                f"N2={ds.n2} ({ds.class_names[1]}), f1={ds.f1:.4f}, d={ds.d}, "
                f"dropped rows={ds.meta.get('dropped_rows', 0)}")
    return ds, schema


def _estimator(args):
    return EstimatorConfig(bins_per_variable=args.bins, neighbor_order_k=args.k,
                           repeats_m=args.repeats, seed=args.seed)


def _classifier(args, ds):
    kind = args.classifier or default_kind(ds)
    return ClassifierSpec(kind=kind, folds=args.folds, seed=args.seed)


def _divergence_block(est):
    limit = kappa_limit(est.cdr) if est.cdr_defined else None
    return {
        "cdi12": q(est.cdi12, BITS), "cdi21": q(est.cdi21, BITS), "cdr": q(est.cdr, BITS),
        "se12": q(est.se12, BITS), "se21": q(est.se21, BITS), "t_r": q(est.t_r, NONE),
        "kappa_limit": q(limit, NONE), "cdr_defined": est.cdr_defined,
        "repeats": q(est.repeats_m, COUNT), "bins": q(est.bins, COUNT),
    }


def _divergence_text(report, est):
    report.text(f"CDI(1,2) = {_fmt(est.cdi12)} +/- {_fmt(est.se12)} bits")
    report.text(f"CDI(2,1) = {_fmt(est.cdi21)} +/- {_fmt(est.se21)} bits")
    if est.cdr_defined:
        report.text(f"CDR      = {_fmt(est.cdr)} bits, t_R = {_fmt(est.t_r)}, "
                    f"kappa limit = {_fmt(kappa_limit(est.cdr))}")
    else:
        report.text("CDR      = undefined (a CDI is not positive)")


def _rates_block(r):
    return {
        "kappa": q(r.kappa, NONE), "k": q(r.k, BITS), "k12": q(r.k12, BITS),
        "k21": q(r.k21, BITS), "k_w": q(r.k_w, BITS), "k_max": q(r.k_max, BITS),
        "capped12": r.capped12, "capped21": r.capped21, "cappedK": r.cappedK,
    }


def _parse_grid(text):
    if text is None:
        return None
    grid = sorted({float(g) for g in text.split(",") if g.strip()})
    if not grid:
        raise ValueError("empty --grid")
    return grid


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args, report):
    if args.out is None:
        raise ValueError("gen needs --out")
    if args.dims < 1:
        raise ValueError("--dims must be at least 1")
    if args.model == "gauss":
        comp = Gaussian1D(args.mean1, args.sd1, args.mean2, args.sd2)
    else:
        comp = Exponential1D(args.alpha, args.beta)
    spec = GenSpec(Product.repeat(comp, args.dims), args.n1, args.n2, args.seed)
    ds = generate(spec, name=args.name)
    buf = io.StringIO()
    write_csv(ds, buf, class_column=args.class_column or "class")
    config = {"model": args.model, "component": repr(comp), "dims": args.dims,
              "n1": args.n1, "n2": args.n2, "generator": ds.meta["generator"]}
    report.body["dataset"] = {"name": ds.name, "n1": q(ds.n1, COUNT), "n2": q(ds.n2, COUNT),
                              "d": q(ds.d, COUNT), "generator": ds.meta["generator"]}
    report.text(f"generated {ds.name}: {args.model} {comp}, d={ds.d}, "
                f"N1={ds.n1}, N2={ds.n2}, seed={args.seed}")
    content = buf.getvalue()
    report.body["sha256"] = hashlib.sha256(content.encode()).hexdigest()
    return config, [], [(f"{ds.name}.csv", content)]


def cmd_estimate(args, report):
    ds, schema = _load(args, report)
    est_cfg = _estimator(args)
    est = estimate(ds, est_cfg)
    report.body["divergence"] = _divergence_block(est)
    _divergence_text(report, est)
    return {"estimator": est_cfg.to_dict(), "schema": schema.__dict__}, [args.data], []


def cmd_analyze(args, report):
    ds, schema = _load(args, report)
    clf = _classifier(args, ds)
    est_cfg = _estimator(args)
    pred, folds_used = cross_validated_predictions(ds, clf)
    counts = counts_from_predictions(ds.labels, pred)
    r = rates(counts)
    est = estimate(ds, est_cfg)
    v = verdict(r.kappa, est, args.tolerance)
    report.body["classifier"] = {"kind": clf.kind, "protocol": "stratified k-fold cross-validation",
                                 "folds": q(folds_used, COUNT)}
    report.body["confusion"] = {k: q(x, COUNT) for k, x in counts.to_dict().items()}
    report.body["rates"] = _rates_block(r)
    report.body["divergence"] = _divergence_block(est)
    report.body["verdict"] = {
        "verdict": v.verdict, "kappa_observed": q(v.kappa_observed, NONE),
        "kappa_limit": q(v.kappa_limit, NONE), "gap": q(v.gap, NONE),
        "tolerance": q(v.tolerance, NONE),
    }
    report.text(f"classifier {clf.kind}, {folds_used}-fold stratified cross-validation")
    report.text(f"confusion n1_true,n1_leak,n2_leak,n2_true = {counts}")
    report.text(f"kappa = {_fmt(r.kappa)}, K = {_fmt(r.k)}, K12 = {_fmt(r.k12)}"
                f"{' (capped)' if r.capped12 else ''}, K21 = {_fmt(r.k21)}"
                f"{' (capped)' if r.capped21 else ''}, K_W = {_fmt(r.k_w)}, "
                f"K_max = {_fmt(r.k_max)} bits")
    _divergence_text(report, est)
    report.text(f"verdict: {v.verdict} (gap {_fmt(v.gap)}, tolerance {v.tolerance})")
    config = {"classifier": clf.to_dict(), "estimator": est_cfg.to_dict(),
              "schema": schema.__dict__}
    return config, [args.data], []


def _sweep_rows(points):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for p in points:
        row = p.row()
        writer.writerow(["" if row.get(c) is None else row.get(c) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def _sweep_block(points):
    rows = []
    for p in points:
        row = p.row()
        rows.append({c: (row[c] if isinstance(row.get(c), bool) or row.get(c) is None
                         else q(row[c], SWEEP_UNITS.get(c, BITS)))
                     for c in SWEEP_COLUMNS if c in row})
    return rows


def _run_sweep(args, report):
    ds, schema = _load(args, report)
    clf = _classifier(args, ds)
    est_cfg = _estimator(args)
    grid = _parse_grid(args.grid) or default_grid(ds.f1)
    points = sweep(ds, grid, clf, est_cfg, seed=args.seed)
    report.text(f"sweep over {len(points)} of {len(grid)} f1 values, classifier {clf.kind}")
    report.text(f"{'f1':>7} {'kappa':>7} {'K12':>7} {'K21':>7} {'K':>7} {'K_W':>7} {'CDR':>7}")
    for p in points:
        r, d = p.rates, p.divergence
        report.text(f"{p.f1:7.4f} {_fmt(r.kappa):>7} {_fmt(r.k12, 3):>7} {_fmt(r.k21, 3):>7} "
                    f"{_fmt(r.k, 3):>7} {_fmt(r.k_w, 3):>7} {_fmt(d.cdr if d else None, 3):>7}")
    config = {"classifier": clf.to_dict(), "estimator": est_cfg.to_dict(),
              "grid": grid, "schema": schema.__dict__}
    return points, config


def cmd_sweep(args, report):
    points, config = _run_sweep(args, report)
    report.body["points"] = _sweep_block(points)
    return config, [args.data], [("sweep.csv", _sweep_rows(points))]


def read_sweep_table(path):
    """Rebuild sweep points (counts only) from a table written by ``sweep``."""
    points = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            counts = ConfusionCounts(*(int(row[c]) for c in
                                       ("n1_true", "n1_leak", "n2_leak", "n2_true")))
            target = float(row["f1_target"]) if row.get("f1_target") else None
            points.append(SweepPoint(counts.f1, counts, rates(counts), None, target))
    return points


def cmd_fit(args, report):
    tables = []
    if args.sweep_table:
        points = read_sweep_table(args.sweep_table)
        config, inputs = {"sweep_table": args.sweep_table}, [args.sweep_table]
        report.text(f"fitting {len(points)} points from {args.sweep_table}")
    else:
        points, config = _run_sweep(args, report)
        inputs = [args.data]
        tables.append(("sweep.csv", _sweep_rows(points)))
        report.body["points"] = _sweep_block(points)
    f1_range = BALANCE_REGION if args.balanced_only else None
    fit = fit_leakage_model(points, weighting=args.weighting, f1_range=f1_range)
    config.update(weighting=args.weighting, f1_range=f1_range)
    report.body["fit"] = {
        "delta1": q(fit.delta1, BITS), "se_delta1": q(fit.se_delta1, BITS),
        "d21": q(fit.d21_fit, BITS), "se_d21": q(fit.se_d21, BITS),
        "delta2": q(fit.delta2, BITS), "se_delta2": q(fit.se_delta2, BITS),
        "d12": q(fit.d12_fit, BITS), "se_d12": q(fit.se_d12, BITS),
        "f_b": q(fit.f_b, NONE), "f_cross": q(fit.f_cross, NONE), "crosses": fit.crosses,
        "t_r": q(fit.t_r, NONE), "residual_rms": q(fit.residual_rms, BITS),
        "points12": q(fit.n_points12, COUNT), "points21": q(fit.n_points21, COUNT),
        "weighting": fit.weighting,
    }
    report.text(f"K12 line: Delta1 = {_fmt(fit.delta1)} +/- {_fmt(fit.se_delta1)}, "
                f"D(2,1) = {_fmt(fit.d21_fit)} +/- {_fmt(fit.se_d21)} bits")
    report.text(f"K21 line: Delta2 = {_fmt(fit.delta2)} +/- {_fmt(fit.se_delta2)}, "
                f"D(1,2) = {_fmt(fit.d12_fit)} +/- {_fmt(fit.se_d12)} bits")
    report.text(f"balance point f_B = {_fmt(fit.f_b)}, lines cross at {_fmt(fit.f_cross)}, "
                f"t_R = {_fmt(fit.t_r)}")
    grid = [round(0.01 * i, 2) for i in range(0, 101)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("f1", "k12_fit", "k21_fit", "kappa_fit"))
    for f, kap in predict_kappa_curve(fit, grid):
        writer.writerow((f, repr(float(fit.k12(f))), repr(float(fit.k21(f))), repr(kap)))
    tables.append(("fit_curve.csv", buf.getvalue()))
    return config, inputs, tables


def cmd_select(args, report):
    ds, schema = _load(args, report)
    est_cfg = _estimator(args)
    result = greedy_select(ds, est_cfg, max_vars=args.max_vars, epsilon=args.epsilon)
    report.warnings.extend(result.warnings)
    report.body["selection"] = {
        "order": result.order,
        "cdr_trace": [q(x, BITS) for x in result.cdr_trace],
        "evaluations": q(result.evaluations, COUNT),
        "evaluation_bound": q(invocation_bound(ds.d), COUNT),
        "epsilon": q(args.epsilon, BITS),
    }
    for i, (name, cdr) in enumerate(zip(result.order, result.cdr_trace), start=1):
        report.text(f"{i:3d}. {name:<30} CDR = {_fmt(cdr)} bits")
    report.text(f"{result.evaluations} estimator evaluations")
    config = {"estimator": est_cfg.to_dict(), "epsilon": args.epsilon,
              "max_vars": args.max_vars, "schema": schema.__dict__}
    return config, [args.data], []


def cmd_curve(args, report):
    if args.model == "gauss":
        comp = Gaussian1D(args.mean1, args.sd1, args.mean2, args.sd2)
    else:
        comp = Exponential1D(args.alpha, args.beta)
    model = Product.repeat(comp, args.dims) if args.dims > 1 else comp
    curve = divergence_curve(model, args.grid_points)
    s = curve.summary()
    units = {"t_r": NONE, "t_c": NONE, "bracket": NONE}
    report.body["model"] = {"family": args.model, "component": repr(comp), "dims": args.dims}
    report.body["curve"] = {k: q(v, units.get(k, BITS)) for k, v in s.items()}
    report.text(f"model {comp} x {args.dims}")
    report.text(f"D(P||Q) = {_fmt(s['d12'], 6)}, D(Q||P) = {_fmt(s['d21'], 6)}, "
                f"R = {_fmt(s['r'], 6)} bits, t_R = {_fmt(s['t_r'], 6)}")
    report.text(f"Chernoff information C = {_fmt(s['chernoff_info'], 6)} bits at t = "
                f"{_fmt(s['t_c'], 6)}; Bhattacharyya = {_fmt(s['bhattacharyya'], 6)} bits")
    report.text(f"second order: A = {_fmt(s['a_coef'], 6)}, B = {_fmt(s['b_coef'], 6)}, "
                f"bracket = {_fmt(s['bracket'], 6)}")
    buf = io.StringIO()
    write_curve_table(curve, buf, extended=True)
    config = {"model": args.model, "component": repr(comp), "dims": args.dims,
              "grid_points": args.grid_points}
    return config, [], [("curve.csv", buf.getvalue())]


# ---------------------------------------------------------------------------
# parser


def _add_data(p, optional=False):
    if optional:
        p.add_argument("data", nargs="?", help="dataset to sweep (omit with --sweep-table)")
    else:
        p.add_argument("data", help="delimited text file with a header row")
    p.add_argument("--schema", help="YAML schema file")
    p.add_argument("--class-column", help="name of the class column (default: class)")
    p.add_argument("--class1-label", help="label of class 1")
    p.add_argument("--delimiter", help="field delimiter (default: ,)")
    p.add_argument("--columns", help="comma-separated subset of variables to use")


def _add_estimator(p):
    p.add_argument("--bins", type=int, default=None,
                   help="bins per continuous variable (default: ceil(sqrt(N)), at most 256)")
    p.add_argument("--repeats", type=int, default=10, help="jitter replicates (default: 10)")
    p.add_argument("--k", type=int, default=1, help="neighbour order (default: 1)")


def _add_classifier(p):
    p.add_argument("--classifier", choices=KINDS, default=None,
                   help="default: chosen from the variable kinds")
    p.add_argument("--folds", type=int, default=10, help="cross-validation folds (default: 10)")


def _add_model(p):
    p.add_argument("--model", choices=("gauss", "exp"), required=True)
    p.add_argument("--dims", type=int, default=1)
    p.add_argument("--mean1", type=float, default=0.0)
    p.add_argument("--sd1", type=float, default=1.0)
    p.add_argument("--mean2", type=float, default=1.02)
    p.add_argument("--sd2", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0, help="class-1 exponential scale")
    p.add_argument("--beta", type=float, default=2.392, help="class-2 exponential scale")


def build_parser():
    parser = argparse.ArgumentParser(prog="infolimit",
                                     description="Information limits to two-class classification.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default: 0, warned)")
    common.add_argument("--out", help="directory for the JSON report and tables")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a Monte Carlo dataset")
    _add_model(p)
    p.add_argument("--n1", type=int, default=8192)
    p.add_argument("--n2", type=int, default=8192)
    p.add_argument("--name")
    p.add_argument("--class-column")

    p = sub.add_parser("estimate", parents=[common], help="kNN CDI and CDR")
    _add_data(p)
    _add_estimator(p)

    p = sub.add_parser("analyze", parents=[common], help="classifier audit against the limit")
    _add_data(p)
    _add_estimator(p)
    _add_classifier(p)
    p.add_argument("--tolerance", type=float, default=VERDICT_TOLERANCE)

    for name, text in (("sweep", "class-imbalance sweep"), ("fit", "sweep and leakage-rate fit")):
        p = sub.add_parser(name, parents=[common], help=text)
        _add_data(p, optional=name == "fit")
        _add_estimator(p)
        _add_classifier(p)
        p.add_argument("--grid", help="comma-separated f1 values (default: 0.05..0.95 plus native)")
    fit_p = sub.choices["fit"]
    fit_p.add_argument("--sweep-table", help="fit an existing sweep.csv instead of sweeping")
    fit_p.add_argument("--weighting", choices=("counts", "none"), default="counts")
    fit_p.add_argument("--balanced-only", action="store_true",
                       help=f"fit only points with f1 in {BALANCE_REGION}")

    p = sub.add_parser("select", parents=[common], help="greedy CDR variable selection")
    _add_data(p)
    _add_estimator(p)
    p.add_argument("--max-vars", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=0.02, help="stop gain in bits (default: 0.02)")

    p = sub.add_parser("curve", parents=[common], help="analytic divergence curves")
    _add_model(p)
    p.add_argument("--grid-points", type=int, default=101)
    return parser


COMMANDS = {"gen": cmd_gen, "estimate": cmd_estimate, "analyze": cmd_analyze,
            "sweep": cmd_sweep, "fit": cmd_fit, "select": cmd_select, "curve": cmd_curve}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    report = Report(args.command)
    if args.seed is None:
        args.seed = 0
        report.warnings.append("no --seed given; using seed 0")
    if args.command == "fit" and not args.data and not args.sweep_table:
        print("error: fit needs a dataset or --sweep-table", file=sys.stderr)
        return 1
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            config, inputs, tables = COMMANDS[args.command](args, report)
        report.warnings.extend(str(w.message) for w in caught if str(w.message) not in report.warnings)
        for w in report.warnings:
            print(f"warning: {w}", file=sys.stderr)
        emit(report, args, make_manifest(args, config, inputs), tables)
    except (InfolimitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
