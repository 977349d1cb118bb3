"""Command-line interface: simulate, estimate, classify, bench, feature-scan.

Exit codes: 0 ok, 1 usage, 2 data, 3 numeric.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .classifier import ClassifierConfig
from .dataset import (
    PuDataset,
    load_csv,
    pca_fit,
    pca_transform,
    simulate_gaussian,
    simulate_waveform,
    write_csv,
)
from .empirical import ScoreSet
from .errors import DomainError, PumixError
from .patra_sen import distance_curve, elbow_select
from .pipeline import METHOD_NAMES, EstimateConfig, parse_methods, run_pipeline, score_dataset
from .posterior import classify_unlabeled, metrics, posterior_upper_bound
from .roc import roc_curve_points

SCHEMA_VERSION = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ shared flags


def _add_input_flags(p):
    g = p.add_argument_group("input")
    g.add_argument("--positives", help="CSV of positive (labeled) rows")
    g.add_argument("--unlabeled", help="CSV of unlabeled rows")
    g.add_argument("--data", help="single CSV with a P/U indicator column")
    g.add_argument("--label-column", help="indicator column of --data (1 = positive, 0 = unlabeled)")
    g.add_argument("--truth-column", help="ground-truth column of unlabeled rows (1 = positive)")
    g.add_argument("--simulate", choices=["gaussian", "waveform"], help="use a simulator instead of files")
    g.add_argument("--alpha", type=float, default=0.5, help="mixture proportion for --simulate")
    g.add_argument("--m", type=int, default=1000, help="positive sample size for --simulate")
    g.add_argument("--n", type=int, default=1000, help="unlabeled sample size for --simulate")
    g.add_argument("--dim", type=int, default=2, help="dimension for the gaussian simulator")
    g.add_argument("--separation", type=float, default=4.0, help="mean separation for the gaussian simulator")
    g.add_argument("--pca", type=int, help="project features onto this many principal components first")


def _add_model_flags(p, default_methods="c-patra-sen,c-roc"):
    g = p.add_argument_group("estimation")
    g.add_argument("--method", default=default_methods, help=f"comma list of {', '.join(METHOD_NAMES)}")
    g.add_argument("--classifier", choices=["forest", "logistic"], default="forest")
    g.add_argument("--trees", type=int, default=500)
    g.add_argument("--mtry", type=int)
    g.add_argument("--min-leaf", type=int, help="default max(5, ceil(sqrt(m + n)))")
    g.add_argument("--l2", type=float, default=1e-3, help="ridge penalty of the logistic classifier")
    g.add_argument("--grid-step", type=float, default=0.005)
    g.add_argument("--q", type=float, default=0.2)
    g.add_argument("--denom-floor", type=int, help="default max(10, ceil(m**(1 - q)))")
    g.add_argument("--c0", type=float, default=0.1)
    g.add_argument("--beta-eta", type=float, default=0.25)
    g.add_argument("--spy-fraction", type=float, default=0.1)
    g.add_argument("--noise-level", type=float, default=0.15)
    g.add_argument("--folds", type=int, default=5)
    g.add_argument("--jobs", type=int, default=1, help="worker threads for tree fitting")
    g.add_argument("--seed", type=int, default=0)


def _config(args, methods=None) -> EstimateConfig:
    if args.trees < 1:
        raise DomainError("--trees must be at least 1")
    clf = ClassifierConfig(
        kind=args.classifier,
        n_trees=args.trees,
        mtry=args.mtry,
        min_leaf=args.min_leaf,
        l2=args.l2,
        n_jobs=args.jobs,
    )
    return EstimateConfig(
        methods=parse_methods(methods or args.method),
        classifier=clf,
        grid_step=args.grid_step,
        q=args.q,
        denom_floor=args.denom_floor,
        c0=args.c0,
        beta_eta=args.beta_eta,
        spy_fraction=args.spy_fraction,
        noise_level=args.noise_level,
        folds=args.folds,
        seed=args.seed,
    )


def _load_input(args) -> tuple[PuDataset, dict]:
    if args.simulate:
        if args.simulate == "gaussian":
            data = simulate_gaussian(args.alpha, args.m, args.n, args.dim, args.separation, args.seed)
        else:
            data = simulate_waveform(args.alpha, args.m, args.n, args.seed)
        source = {"simulate": args.simulate, "alpha": args.alpha, "m": args.m, "n": args.n}
        if args.simulate == "gaussian":
            source.update(dim=args.dim, separation=args.separation)
    elif args.positives or args.unlabeled:
        if not (args.positives and args.unlabeled):
            raise DomainError("--positives and --unlabeled must be given together")
        data = load_csv(args.positives, unlabeled=args.unlabeled, truth_column=args.truth_column)
        source = {"positives": args.positives, "unlabeled": args.unlabeled}
    elif args.data:
        data = load_csv(args.data, args.label_column, truth_column=args.truth_column)
        source = {"data": args.data}
    else:
        raise DomainError("no input: use --positives/--unlabeled, --data or --simulate")
    if args.pca:
        model = pca_fit(np.vstack([data.positives, data.unlabeled]), args.pca)
        names = tuple(f"pc{i + 1}" for i in range(args.pca))
        data = data.with_features(pca_transform(model, data.positives), pca_transform(model, data.unlabeled), names)
        source["pca"] = {"k": args.pca, "explained": float(model.explained_variance_ratio.sum())}
    return data, source


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _write_text(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_rows(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    _write_text(path, buf.getvalue())


def _classifier_json(cfg: EstimateConfig) -> dict:
    c = cfg.classifier
    return {"kind": c.kind, "n_trees": c.n_trees, "mtry": c.mtry, "min_leaf": c.min_leaf, "l2": c.l2}


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _score_rows(scores: ScoreSet):
    rows = [("labeled", i, repr(float(s))) for i, s in enumerate(scores.p1)]
    rows += [("unlabeled", i, repr(float(s))) for i, s in enumerate(scores.p0)]
    return rows


# -------------------------------------------------------------------- commands


def cmd_simulate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.simulator == "gaussian":
        data = simulate_gaussian(args.alpha, args.m, args.n, args.dim, args.separation, args.seed)
    else:
        data = simulate_waveform(args.alpha, args.m, args.n, args.seed)
    write_csv(data, out / "positives.csv", out / "unlabeled.csv")
    print(_dump_json({"positives": str(out / "positives.csv"), "unlabeled": str(out / "unlabeled.csv"),
                      "m": data.m, "n": data.n, "pi": data.pi}))
    return 0


def build_report(data: PuDataset, source: dict, cfg: EstimateConfig, result) -> dict:
    estimates = []
    for name, res in result.results.items():
        entry = {**res.estimate.to_dict(), "method": name, "tag": res.estimate.method}
        if res.metrics is not None:
            entry["accuracy"] = res.metrics["accuracy"]
            entry["f1"] = res.metrics["f1"]
        estimates.append(entry)
    report = {
        "schema": SCHEMA_VERSION,
        "generated_at": _timestamp(),
        "input": source,
        "m": data.m,
        "n": data.n,
        "pi": data.pi,
        "seed": cfg.seed,
        "classifier": _classifier_json(cfg),
        "estimates": estimates,
    }
    if result.scores is not None:
        report["scores"] = dict(result.scores.diagnostics)
    if data.truth is not None:
        report["table"] = {
            name: {"alpha": r.estimate.alpha0_hat, "accuracy": r.metrics["accuracy"], "f1": r.metrics["f1"]}
            for name, r in result.results.items()
        }
        report["table"]["ideal"] = {"alpha": float(np.mean(data.truth == 0))}
    return report


def cmd_estimate(args) -> int:
    data, source = _load_input(args)
    cfg = _config(args)
    result = run_pipeline(data, cfg)
    if args.scores_out and result.scores is not None:
        _write_rows(args.scores_out, ["sample", "index", "score"], _score_rows(result.scores))
    if args.curve_out and result.curve is not None:
        c = result.curve
        d2 = c.second_difference()
        _write_rows(args.curve_out, ["gamma", "value", "second_difference"],
                    [(repr(float(g)), repr(float(v)), "" if np.isnan(s) else repr(float(s)))
                     for g, v, s in zip(c.gammas, c.values, d2)])
    if args.roc_out and result.scores is not None:
        _write_rows(args.roc_out, ["t", "G_Ln", "G_n"],
                    [tuple(repr(float(x)) for x in row) for row in roc_curve_points(result.scores)])
    if args.save_model and result.forest is not None:
        result.forest.save(args.save_model)
    _write_text(args.out, _dump_json(build_report(data, source, cfg, result)) + "\n")
    return 0


def cmd_classify(args) -> int:
    data, source = _load_input(args)
    if args.alpha0 is not None:
        cfg = _config(args, methods="c-roc")
        scores, _ = score_dataset(data, cfg.classifier, cfg.seed, cfg.folds)
        alpha0 = args.alpha0
        method = "given"
        labels = None
    else:
        method = parse_methods(args.method)[0]
        cfg = _config(args, methods=method)
        result = run_pipeline(data, cfg)
        res = result.results[method]
        alpha0 = res.estimate.alpha0_hat
        scores = result.scores
        labels = res.labels if method in ("roc", "spy") else None
    pi = args.pi if args.pi is not None else data.pi
    if scores is not None:
        scores = ScoreSet(scores.p1, scores.p0, pi)
        post = posterior_upper_bound(scores.p0, pi, alpha0)
        if labels is None:
            labels = classify_unlabeled(scores, alpha0)
        p0 = scores.p0
    else:
        post = np.full(data.n, np.nan)
        p0 = np.full(data.n, np.nan)
    header = ["index", "score", "posterior", "label"] + (["truth"] if data.truth is not None else [])
    rows = []
    for i in range(data.n):
        row = [i, repr(float(p0[i])), repr(float(post[i])), int(labels[i])]
        if data.truth is not None:
            row.append(int(data.truth[i]))
        rows.append(row)
    _write_rows(args.out, header, rows)
    summary = {"schema": SCHEMA_VERSION, "generated_at": _timestamp(), "input": source,
               "method": method, "alpha0_hat": alpha0, "pi": pi, "n": data.n}
    if data.truth is not None:
        summary["metrics"] = metrics(labels, data.truth)
    if args.out in (None, "-"):
        sys.stderr.write(_dump_json(summary) + "\n")
    else:
        sys.stdout.write(_dump_json(summary) + "\n")
    return 0


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def parse_sizes(text: str) -> list[int]:
    """``100..6400x2`` (geometric) or a comma list."""
    if ".." in text:
        lo, rest = text.split("..")
        hi, _, factor = rest.partition("x")
        lo, hi, f = int(lo), int(hi), float(factor or 2)
        if lo < 1 or hi < lo or f <= 1:
            raise DomainError(f"bad size range {text!r}")
        out, v = [], float(lo)
        while v <= hi * (1 + 1e-9):
            out.append(int(round(v)))
            v *= f
        return out
    return [int(x) for x in text.split(",") if x.strip()]


def bench_cells(args) -> list[tuple[float, int, int]]:
    if args.reps < 1:
        raise DomainError("--reps must be at least 1")
    if args.figure == 2:
        alphas = _parse_floats(args.alphas or "0.1,0.5,0.9")
        sizes = parse_sizes(args.sizes or "100..6400x2")
    else:
        if not 0 < args.step < 1:
            raise DomainError("--step must lie in (0, 1)")
        if args.alphas:
            alphas = _parse_floats(args.alphas)
        else:
            k = int(np.floor((0.99 - 0.01) / args.step + 1e-9))
            alphas = [round(0.01 + i * args.step, 10) for i in range(k + 1)]
        sizes = [int(x) for x in (args.sizes or "3000").split(",")]
    return [(a, s, r) for a in alphas for s in sizes for r in range(args.reps)]


def _cell_seed(base: int, alpha: float, size: int, rep: int) -> int:
    ss = np.random.SeedSequence([base, int(round(alpha * 10000)), size, rep])
    return int(ss.generate_state(1)[0])


def run_bench_cell(cell, args_dict) -> list[tuple]:
    alpha, size, rep = cell
    seed = _cell_seed(args_dict["seed"], alpha, size, rep)
    if args_dict["simulator"] == "gaussian":
        data = simulate_gaussian(alpha, size, size, args_dict["dim"], args_dict["separation"], seed)
    else:
        data = simulate_waveform(alpha, size, size, seed)
    cfg = replace(args_dict["config"], seed=seed)
    result = run_pipeline(data, cfg)
    rows = []
    for name, res in result.results.items():
        rows.append((name, alpha, size, seed, res.estimate.alpha0_hat,
                     res.metrics["accuracy"], res.metrics["f1"], res.wall_time))
    return rows


def cmd_bench(args) -> int:
    cells = bench_cells(args)
    cfg = _config(args)
    shared = {"seed": args.seed, "simulator": args.simulator, "dim": args.dim,
              "separation": args.separation, "config": cfg}
    if args.jobs > 1:
        from joblib import Parallel, delayed

        chunks = Parallel(n_jobs=args.jobs)(delayed(run_bench_cell)(c, shared) for c in cells)
    else:
        chunks = [run_bench_cell(c, shared) for c in cells]
    rows = sorted((r for chunk in chunks for r in chunk), key=lambda r: (r[0], r[1], r[2], r[3]))
    _write_rows(args.out, ["method", "alpha", "n", "seed", "alpha_hat", "accuracy", "f1", "wall_time"],
                [(r[0], repr(r[1]), r[2], r[3], repr(r[4]), repr(r[5]), repr(r[6]), f"{r[7]:.4f}")
                 for r in rows])
    return 0


def minmax_scores(values: np.ndarray) -> np.ndarray | None:
    lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        return None
    return (values - lo) / (hi - lo)


def feature_scan(data: PuDataset, cfg: EstimateConfig, weakest: int | None = None) -> dict:
    """Per-feature estimates next to the multivariate ones.

    Importances come from a forest on all features; with ``weakest`` set only
    that many lowest-importance features are scanned and used for the
    multivariate estimate.
    """
    from .classifier import train_forest

    c = cfg.classifier
    forest = train_forest(data, c.n_trees, c.mtry, c.min_leaf, cfg.seed, c.n_jobs)
    imp = forest.importances
    names = data.feature_names or tuple(f"x{j + 1}" for j in range(data.dim))
    cols = list(range(data.dim))
    if weakest is not None:
        if not 1 <= weakest <= data.dim:
            raise DomainError(f"--weakest must lie in [1, {data.dim}]")
        cols = sorted(np.argsort(imp, kind="stable")[:weakest].tolist())
    per_feature = []
    for j in cols:
        both = np.concatenate([data.positives[:, j], data.unlabeled[:, j]])
        mapped = minmax_scores(both)
        if mapped is None:
            per_feature.append({"feature": names[j], "importance": float(imp[j]), "alpha0_hat": 0.0,
                                "degenerate": True})
            continue
        s = ScoreSet(mapped[: data.m], mapped[data.m :], data.pi)
        est = elbow_select(distance_curve(s, cfg.grid_step))
        per_feature.append({"feature": names[j], "importance": float(imp[j]),
                            "alpha0_hat": est.alpha0_hat, "degenerate": False})
    subset = data.select_features(cols) if weakest is not None else data
    result = run_pipeline(subset, cfg)
    return {
        "features": per_feature,
        "max_single": max(f["alpha0_hat"] for f in per_feature),
        "multivariate": {k: r.estimate.alpha0_hat for k, r in result.results.items()},
        "selected": [names[j] for j in cols],
    }


def cmd_feature_scan(args) -> int:
    data, source = _load_input(args)
    cfg = _config(args)
    scan = feature_scan(data, cfg, args.weakest)
    _write_rows(args.out, ["feature", "importance", "alpha0_hat", "degenerate"],
                [(f["feature"], repr(f["importance"]), repr(f["alpha0_hat"]), int(f["degenerate"]))
                 for f in scan["features"]])
    summary = {"schema": SCHEMA_VERSION, "generated_at": _timestamp(), "input": source,
               "max_single": scan["max_single"], "multivariate": scan["multivariate"],
               "selected": scan["selected"]}
    stream = sys.stderr if args.out in (None, "-") else sys.stdout
    stream.write(_dump_json(summary) + "\n")
    return 0


# ------------------------------------------------------------------------ main


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pumix", description="Mixture proportion estimation for PU learning.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="write a simulated PU dataset as two CSV files")
    p.add_argument("--simulator", choices=["gaussian", "waveform"], default="waveform")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--separation", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate alpha_0 and print a JSON report")
    _add_input_flags(p)
    _add_model_flags(p)
    p.add_argument("--out", help="JSON report path (default stdout)")
    p.add_argument("--scores-out", help="CSV of classifier scores")
    p.add_argument("--curve-out", help="CSV of the distance curve")
    p.add_argument("--roc-out", help="CSV of ROC points")
    p.add_argument("--save-model", help="write the fitted forest as JSON")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("classify", help="classify the unlabeled rows")
    _add_input_flags(p)
    _add_model_flags(p, default_methods="c-roc")
    p.add_argument("--alpha0", type=float, help="use this alpha_0 instead of estimating it")
    p.add_argument("--pi", type=float, help="override pi = m / (m + n) in the posterior")
    p.add_argument("--out", help="predictions CSV (default stdout)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("bench", help="simulation sweeps in long CSV format")
    _add_model_flags(p)
    p.add_argument("--figure", type=int, choices=[2, 3], default=2)
    p.add_argument("--simulator", choices=["gaussian", "waveform"], default="waveform")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--separation", type=float, default=4.0)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--alphas", help="comma list of alphas")
    p.add_argument("--sizes", help="sizes n = m, e.g. 100..6400x2 or 400,1600")
    p.add_argument("--step", type=float, default=0.01, help="alpha step for --figure 3")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("feature-scan", help="single-feature estimates versus the multivariate one")
    _add_input_flags(p)
    _add_model_flags(p, default_methods="c-patra-sen")
    p.add_argument("--weakest", type=int, help="keep only this many lowest-importance features")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_feature_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bench" and args.reps is None:
        args.reps = 20 if args.figure == 2 else 1
    try:
        return args.func(args)
    except PumixError as exc:
        sys.stderr.write(f"pumix: error: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
