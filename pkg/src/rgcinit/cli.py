"""Command-line entry point: ``rgcinit <command> ...``.

Exit codes: 0 success, 1 usage, 2 data/format, 3 numerical.
``RGC_THREADS`` caps BLAS threads (default 1, which keeps results bitwise
reproducible).
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

os.environ.setdefault("OPENBLAS_NUM_THREADS", os.environ.get("RGC_THREADS", "1"))
os.environ.setdefault("OMP_NUM_THREADS", os.environ.get("RGC_THREADS", "1"))
os.environ.setdefault("MKL_NUM_THREADS", os.environ.get("RGC_THREADS", "1"))

import numpy as np  # noqa: E402

from . import __version__  # noqa: E402
from .calibration import apply_calibration, compute_calibration  # noqa: E402
from .cmd import cmd_study  # noqa: E402
from .errors import RgcError, UsageError  # noqa: E402
from .logreg import TrainConfig, evaluate, random_init, train  # noqa: E402
from .rgc import RgcConfig, fit_ncc, fit_rgc  # noqa: E402
from .stats import fit_statistics  # noqa: E402
from .synth import SynthSpec, generate, sample_split, write_truth  # noqa: E402
from .tensor_store import (  # noqa: E402
    LabelVector,
    read_features,
    read_labels,
    read_model,
    write_document,
    write_features,
    write_labels,
    write_model,
)

METHODS = ("rgc", "ncc", "random")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _load_xy(features, labels):
    x = read_features(features)
    y = read_labels(labels)
    if x.shape[0] != len(y):
        from .errors import ShapeError

        raise ShapeError(f"{features} has {x.shape[0]} rows but {labels} has {len(y)} labels")
    return x, y


def _fit(method: str, x, y, epsilon: float, epsilon_mode: str, seed: int):
    if method == "rgc":
        return fit_rgc(fit_statistics(x, y), RgcConfig(epsilon, epsilon_mode))
    if method == "ncc":
        return fit_ncc(fit_statistics(x, y))
    if method == "random":
        return random_init(y.num_classes, x.shape[1], "msra", seed)
    raise UsageError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def cmd_fit(args) -> int:
    x, y = _load_xy(args.features, args.labels)
    if args.method == "ncc" and args.epsilon is not None:
        print("warning: --epsilon is ignored for --method ncc", file=sys.stderr)
    eps = 0.1 if args.epsilon is None else args.epsilon
    start = time.perf_counter()
    model = _fit(args.method, x, y, eps, args.epsilon_mode, 0)
    elapsed = time.perf_counter() - start
    write_model(model, args.out)
    print(f"fit {args.method}: K={model.num_classes} d={model.dim} time={elapsed:.4f}s")
    return 0


def cmd_calibrate(args) -> int:
    model = read_model(args.model)
    ref = read_model(args.reference)
    params = compute_calibration(model, ref, as_printed=args.eq19_as_printed)
    other = compute_calibration(model, ref, as_printed=not args.eq19_as_printed)
    out = apply_calibration(model, params)
    record = dict(out.metadata["calibration"])
    record["variant"] = "as-printed" if args.eq19_as_printed else "variance-matching"
    record["alpha_variance_matching"] = other.alpha if args.eq19_as_printed else params.alpha
    record["alpha_as_printed"] = params.alpha if args.eq19_as_printed else other.alpha
    out.metadata["calibration"] = record
    write_model(out, args.out)
    print(f"alpha={params.alpha!r} beta={params.beta!r} |v|={float(np.linalg.norm(params.v))!r}")
    return 0


def cmd_eval(args) -> int:
    model = read_model(args.model)
    x, y = _load_xy(args.features, args.labels)
    acc, ce = evaluate(model, x, y)
    print(f"accuracy={acc!r} cross_entropy={ce!r}")
    if args.out_json:
        write_document({"format_version": 1, "kind": "eval", "accuracy": acc,
                        "cross_entropy": ce, "num_samples": len(y)}, args.out_json)
    return 0


def _train_config(args) -> TrainConfig:
    if args.batch in (None, "full"):
        batch = None
    else:
        try:
            batch = int(args.batch)
        except ValueError:
            raise UsageError(f"--batch must be an integer or 'full', got {args.batch!r}") from None
    return TrainConfig(args.lr, args.iters, batch, args.weight_decay, args.seed, args.log_every)


def cmd_train_lr(args) -> int:
    x, y = _load_xy(args.features, args.labels)
    xt = yt = None
    if args.test_features or args.test_labels:
        if not (args.test_features and args.test_labels):
            raise UsageError("--test-features and --test-labels go together")
        xt, yt = _load_xy(args.test_features, args.test_labels)
    if args.init in METHODS:
        init = _fit(args.init, x, y, args.epsilon, args.epsilon_mode, args.seed)
    else:
        init = read_model(args.init)
    model, trace = train(init, x, y, xt, yt, _train_config(args))
    write_model(model, args.out)
    if args.trace_out:
        trace.write_csv(args.trace_out)
    last = trace.records[-1]
    print(f"iterations={args.iters} train_loss={last.train_loss!r} train_acc={last.train_accuracy!r}")
    return 0


def cmd_cmd_study(args) -> int:
    x, y = _load_xy(args.features, args.labels)
    report = cmd_study(x, y, args.pca_dims)
    report.write(args.out)
    print(f"mean_cmd={report.mean_cmd!r} var_cmd={report.var_cmd!r}")
    return 0


def cmd_synth(args) -> int:
    spec = SynthSpec(args.classes, args.dim, args.per_class, args.seed, args.mean_scale,
                     args.cov, args.cond)
    x, y, truth = generate(spec)
    prefix = args.out_prefix
    Path(prefix).parent.mkdir(parents=True, exist_ok=True)
    write_features(x, f"{prefix}.fmat")
    write_labels(y, f"{prefix}.lvec")
    write_truth(truth, f"{prefix}.truth.json")
    written = [f"{prefix}.fmat", f"{prefix}.lvec", f"{prefix}.truth.json"]
    if args.test_per_class:
        xt, yt = sample_split(spec, args.test_per_class)
        write_features(xt, f"{prefix}.test.fmat")
        write_labels(yt, f"{prefix}.test.lvec")
        written += [f"{prefix}.test.fmat", f"{prefix}.test.lvec"]
    print("wrote " + " ".join(written))
    return 0


def run_bench(x, y, xt, yt, methods, cfg: TrainConfig, margin: float,
              epsilon: float = 0.1, epsilon_mode: str = "absolute") -> dict:
    """Fit each initializer, train all of them under ``cfg`` and compare.

    The threshold is ``min_final_train_loss * (1 + margin)`` over all methods.
    """
    eval_x, eval_y = (xt, yt) if xt is not None else (x, y)
    runs = []
    for method in methods:
        start = time.perf_counter()
        init = _fit(method, x, y, epsilon, epsilon_mode, cfg.seed)
        fit_seconds = time.perf_counter() - start
        init_acc, init_ce = evaluate(init, eval_x, eval_y)
        model, trace = train(init, x, y, xt, yt, cfg)
        final_acc, final_ce = evaluate(model, eval_x, eval_y)
        runs.append((method, fit_seconds, init_acc, init_ce, final_acc, final_ce, trace))
    threshold = min(r[6].records[-1].train_loss for r in runs) * (1.0 + margin)
    records = []
    for method, fit_seconds, init_acc, init_ce, final_acc, final_ce, trace in runs:
        reached = trace.iterations_to(threshold)
        records.append({
            "method": method,
            "init_accuracy": init_acc,
            "init_ce": init_ce,
            "final_accuracy": final_acc,
            "final_ce": final_ce,
            "final_train_loss": trace.records[-1].train_loss,
            "iters_to_threshold": "not-reached" if reached is None else reached,
            "wallclock_fit_seconds": fit_seconds,
        })
    return {
        "format_version": 1,
        "kind": "bench-report",
        "threshold": threshold,
        "methods": records,
        "environment": {
            "seed": cfg.seed,
            "config": {
                "learning_rate": cfg.learning_rate,
                "iterations": cfg.iterations,
                "batch_size": "full" if cfg.batch_size is None else cfg.batch_size,
                "weight_decay": cfg.weight_decay,
                "log_every": cfg.log_every,
                "threshold_margin": margin,
                "epsilon": epsilon,
                "epsilon_mode": epsilon_mode,
                "methods": list(methods),
            },
        },
    }


def cmd_bench(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if unknown or not methods:
        raise UsageError(f"unknown method(s) {unknown}; choose from {', '.join(METHODS)}")
    if len(set(methods)) != len(methods):
        raise UsageError("each method may be listed once")
    x, y = _load_xy(args.features, args.labels)
    xt = yt = None
    if args.test_features or args.test_labels:
        if not (args.test_features and args.test_labels):
            raise UsageError("--test-features and --test-labels go together")
        xt, yt = _load_xy(args.test_features, args.test_labels)
    cfg = _train_config(args)
    report = run_bench(x, y, xt, yt, methods, cfg, args.threshold_margin,
                       args.epsilon, args.epsilon_mode)
    # timings vary run to run; keep them out of the file so outputs are reproducible
    timings = {r["method"]: r.pop("wallclock_fit_seconds") for r in report["methods"]}
    if args.with_timings:
        for r in report["methods"]:
            r["wallclock_fit_seconds"] = timings[r["method"]]
    write_document(report, args.out)
    for r in report["methods"]:
        print(f"{r['method']:>7}: init_acc={r['init_accuracy']:.4f} final_acc={r['final_accuracy']:.4f} "
              f"iters_to_threshold={r['iters_to_threshold']} fit={timings[r['method']]:.4f}s")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rgcinit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    f = sub.add_parser("fit", help="closed-form classifier from features")
    f.add_argument("--features", required=True)
    f.add_argument("--labels", required=True)
    f.add_argument("--method", choices=("rgc", "ncc"), default="rgc")
    f.add_argument("--epsilon", type=float, default=None, help="ridge strength (default 0.1)")
    f.add_argument("--epsilon-mode", choices=("absolute", "relative"), default="absolute")
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fit)

    c = sub.add_parser("calibrate", help="match weight moments to a reference head")
    c.add_argument("--model", required=True)
    c.add_argument("--reference", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--eq19-as-printed", action="store_true",
                   help="use the reciprocal variance ratio for alpha")
    c.set_defaults(func=cmd_calibrate)

    e = sub.add_parser("eval", help="accuracy and mean cross-entropy")
    e.add_argument("--model", required=True)
    e.add_argument("--features", required=True)
    e.add_argument("--labels", required=True)
    e.add_argument("--out-json")
    e.set_defaults(func=cmd_eval)

    t = sub.add_parser("train-lr", help="gradient-descent softmax regression")
    t.add_argument("--init", default="rgc", help="rgc, ncc, random or a model file")
    t.add_argument("--lr", type=float, default=0.01)
    t.add_argument("--iters", type=int, default=1000)
    t.add_argument("--batch", default="full")
    t.add_argument("--weight-decay", type=float, default=0.0005)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--log-every", type=int, default=1)
    t.add_argument("--epsilon", type=float, default=0.1)
    t.add_argument("--epsilon-mode", choices=("absolute", "relative"), default="absolute")
    t.add_argument("--features", required=True)
    t.add_argument("--labels", required=True)
    t.add_argument("--test-features")
    t.add_argument("--test-labels")
    t.add_argument("--trace-out")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train_lr)

    s = sub.add_parser("cmd-study", help="class-covariance CMD study")
    s.add_argument("--features", required=True)
    s.add_argument("--labels", required=True)
    s.add_argument("--pca-dims", type=int, default=2)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_cmd_study)

    g = sub.add_parser("synth", help="write seeded Gaussian class data")
    g.add_argument("--classes", type=int, required=True)
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--per-class", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--cov", choices=("shared", "distinct"), default="shared")
    g.add_argument("--cond", type=float, default=10.0)
    g.add_argument("--mean-scale", type=float, default=1.0)
    g.add_argument("--test-per-class", type=int, default=0)
    g.add_argument("--out-prefix", required=True)
    g.set_defaults(func=cmd_synth)

    b = sub.add_parser("bench", help="compare initializers under one training config")
    b.add_argument("--features", required=True)
    b.add_argument("--labels", required=True)
    b.add_argument("--test-features")
    b.add_argument("--test-labels")
    b.add_argument("--methods", default="rgc,ncc,random")
    b.add_argument("--lr", type=float, default=0.01)
    b.add_argument("--iters", type=int, default=1000)
    b.add_argument("--batch", default="full")
    b.add_argument("--weight-decay", type=float, default=0.0005)
    b.add_argument("--log-every", type=int, default=1)
    b.add_argument("--threshold-margin", type=float, default=0.05)
    b.add_argument("--epsilon", type=float, default=0.1)
    b.add_argument("--epsilon-mode", choices=("absolute", "relative"), default="absolute")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--with-timings", action="store_true",
                   help="include fit wallclock in the report file (breaks byte-reproducibility)")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except RgcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
