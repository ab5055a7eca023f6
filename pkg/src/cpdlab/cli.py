"""Command-line front end: simulate, train, detect, localise, evaluate, reproduce.

Every command is a pure function of its arguments; the seed comes from
``--seed``, falling back to the ``CPD_SEED`` environment variable and
then to 7.  Exit codes: 0 success, 1 runtime failure, 2 invalid
configuration or arguments.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import cusum, glr
from .dataio import (
    load_dataset,
    load_values,
    save_dataset,
    save_values,
    write_report,
)
from .evaluate import mer_from_predictions, tune_threshold
from .localise import cusum_star_window_classifier, localise
from .network import (
    Architecture,
    Preprocessor,
    TrainConfig,
    forward,
    network_from_json,
    network_to_json,
    train,
)
from .recipes import RECIPES, run_recipe
from .robust import wilcoxon_statistic
from .simulate import MulticlassSpec, ScenarioSpec, gen_multiclass, gen_scenario

__all__ = ["main"]


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("CPD_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"CPD_SEED must be an integer, got {env!r}") from None
    return 7


def _parse_preprocess(text: str) -> Preprocessor:
    """Parse 'unit_scale' or 'truncate:3+unit_scale|square+unit_scale' syntax.

    '|' separates channels, '+' separates steps inside a channel and
    ':' attaches a numeric parameter to a step.
    """
    channels = []
    for chunk in text.split("|"):
        steps = []
        for item in chunk.split("+"):
            item = item.strip()
            if not item:
                continue
            if ":" in item:
                name, value = item.split(":", 1)
                steps.append((name.strip(), float(value)))
            else:
                steps.append((item,))
        channels.append(tuple(steps))
    return Preprocessor(tuple(channels))


def _statistic(method: str):
    if method == "cusum":
        return lambda row: cusum.cusum_statistic(row)[0]
    if method == "cusum-star":
        return lambda row: cusum.cusum_star_statistic(row)[0]
    if method == "wilcoxon":
        return lambda row: wilcoxon_statistic(row)[0]
    if method == "variance":
        return lambda row: glr.lr_variance_scan(row)[0]
    if method == "slope":
        return lambda row: glr.lr_slope_scan(row)[0]
    raise ValueError(f"unknown method {method!r}")


def _cmd_simulate(args) -> int:
    seed = _seed(args)
    if args.multiclass:
        spec = MulticlassSpec(args.multiclass, per_class=args.per_class)
        dataset = gen_multiclass(spec, seed)
    else:
        spec = ScenarioSpec(args.scenario, n=args.n, size=args.size, role=args.role)
        dataset = gen_scenario(spec, seed)
    save_dataset(dataset, args.out)
    print(f"wrote {len(dataset)} examples of length {dataset.n} to {args.out}")
    return 0


def _cmd_train(args) -> int:
    seed = _seed(args)
    dataset = load_dataset(args.data)
    pre = _parse_preprocess(args.preprocess)
    hidden = tuple(int(w) for w in args.hidden.split(",") if w)
    classes = np.unique(dataset.labels)
    output_dim = 1 if set(classes.tolist()) <= {0, 1} else classes.size
    arch = Architecture(pre.output_dim(dataset.n), hidden, output_dim)
    config = TrainConfig(
        epochs=args.epochs, batch_size=args.batch_size,
        learning_rate=args.learning_rate, seed=seed, lr_decay=args.lr_decay,
    )
    net = train(pre.apply(dataset.values), dataset.labels, arch, config)
    with open(args.out, "w", encoding="ascii") as fh:
        fh.write(network_to_json(net, pre))
    print(f"trained {arch.depth}-layer network on {len(dataset)} examples -> {args.out}")
    return 0


def _load_network(path):
    with open(path, encoding="ascii") as fh:
        net, pre = network_from_json(fh.read())
    return net, pre or Preprocessor()


def _cmd_detect(args) -> int:
    dataset = load_dataset(args.data)
    if args.method == "net":
        if not args.net:
            raise ValueError("--net is required with method 'net'")
        net, pre = _load_network(args.net)
        scores, preds = forward(net, pre.apply(dataset.values))
        stats = scores if scores.ndim == 1 else scores.max(axis=1)
    else:
        stat_fn = _statistic(args.method)
        if args.threshold is None or args.threshold <= 0:
            raise ValueError("--threshold must be a positive number for scan methods")
        stats = np.array([stat_fn(row) for row in dataset.values])
        preds = (stats > args.threshold).astype(np.int64)
    report = mer_from_predictions(dataset.labels, preds, threshold=args.threshold,
                                  fingerprint=dataset.fingerprint())
    if str(args.out).endswith(".csv"):
        lines = ["row,label,decision,statistic"]
        for k, (label, pred, stat) in enumerate(zip(dataset.labels, preds, stats), start=1):
            lines.append(f"{k},{int(label)},{int(pred)},{repr(float(stat))}")
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        write_report({
            "command": "detect",
            "method": args.method,
            "report": report.to_jsonable(),
            "decisions": [int(p) for p in preds],
            "statistics": [float(s) for s in stats],
        }, args.out)
    print(f"MER {report.mer:.4f} on {report.size} examples -> {args.out}")
    return 0


def _cmd_localise(args) -> int:
    rows = load_values(args.data)
    threshold = args.threshold
    if threshold is None:
        if args.snr_bound is None:
            raise ValueError("provide --threshold or --snr-bound")
        threshold = cusum.snr_threshold_star(args.window, args.snr_bound)
    classifier = cusum_star_window_classifier(args.window, threshold)
    results = []
    for row in rows:
        res = localise(row, classifier, args.gamma)
        results.append({
            "change_points": res.change_points,
            "segments": [list(s) for s in res.segments],
        })
    write_report({
        "command": "localise",
        "window": args.window,
        "threshold": threshold,
        "gamma": args.gamma,
        "results": results,
    }, args.out)
    total = sum(len(r["change_points"]) for r in results)
    print(f"localised {total} change points across {len(results)} series -> {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    seed = _seed(args)
    test_set = load_dataset(args.test)
    if args.method == "net":
        if not args.net:
            raise ValueError("--net is required with method 'net'")
        net, pre = _load_network(args.net)
        _, preds = forward(net, pre.apply(test_set.values))
        threshold = None
    else:
        stat_fn = _statistic(args.method)
        threshold = args.threshold
        if threshold is None:
            if not args.train:
                raise ValueError("provide --threshold or --train data to tune on")
            train_set = load_dataset(args.train)
            threshold = tune_threshold(stat_fn, train_set)
        stats = np.array([stat_fn(row) for row in test_set.values])
        preds = (stats > threshold).astype(np.int64)
    report = mer_from_predictions(test_set.labels, preds, threshold=threshold,
                                  seed=seed, fingerprint=test_set.fingerprint())
    write_report({"command": "evaluate", "method": args.method,
                  "report": report.to_jsonable()}, args.out)
    print(f"MER {report.mer:.4f} on {report.size} examples -> {args.out}")
    return 0


def _cmd_reproduce(args) -> int:
    seed = _seed(args)
    overrides = {}
    if args.reps is not None:
        overrides["reps"] = args.reps
    try:
        report = run_recipe(args.recipe, seed, **overrides)
    except TypeError:
        raise ValueError(f"recipe {args.recipe!r} does not accept --reps") from None
    write_report(report, args.out)
    print(f"recipe {args.recipe} (seed {seed}) -> {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpdlab",
        description="Change-point detection lab: scans, trainable detectors, benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=None,
                       help="random seed (falls back to CPD_SEED, then 7)")
        p.add_argument("--threads", type=int, default=1,
                       help="worker cap; the current implementation is single-threaded")

    p = sub.add_parser("simulate", help="generate a labelled dataset CSV")
    add_common(p)
    p.add_argument("--scenario", default="S1", help="S1, S1', S2 or S3")
    p.add_argument("--multiclass", choices=("weak", "strong"), default=None,
                   help="generate the five-class mixture instead of a scenario")
    p.add_argument("--n", type=int, default=100, help="series length")
    p.add_argument("--N", "--size", dest="size", type=int, default=700, help="dataset size")
    p.add_argument("--per-class", type=int, default=500, help="multiclass examples per class")
    p.add_argument("--role", choices=("train", "test"), default="train")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("train", help="train a network on a dataset CSV")
    add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--hidden", default="198", help="comma-separated hidden widths")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--lr-decay", type=float, default=0.0,
                   help="inverse time decay rate applied per epoch")
    p.add_argument("--preprocess", default="unit_scale",
                   help="channels separated by '|', steps by '+', e.g. 'truncate:3+unit_scale'")
    p.add_argument("--out", required=True, help="output network JSON path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("detect", help="run a detector over a dataset CSV")
    add_common(p)
    p.add_argument("--method", default="cusum",
                   choices=("cusum", "cusum-star", "wilcoxon", "variance", "slope", "net"))
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--net", default=None, help="network JSON (method 'net')")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("localise", help="estimate change points in long series")
    add_common(p)
    p.add_argument("--data", required=True, help="CSV of plain series rows")
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--snr-bound", type=float, default=None,
                   help="derive the dyadic-scan threshold from an SNR floor")
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_localise)

    p = sub.add_parser("evaluate", help="score a detector on a test CSV")
    add_common(p)
    p.add_argument("--method", default="cusum",
                   choices=("cusum", "cusum-star", "wilcoxon", "variance", "slope", "net"))
    p.add_argument("--test", required=True)
    p.add_argument("--train", default=None, help="training CSV for threshold tuning")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--net", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("reproduce", help="run a named experiment recipe")
    add_common(p)
    p.add_argument("recipe", choices=sorted(RECIPES))
    p.add_argument("--reps", type=int, default=None,
                   help="override replication count where applicable")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.threads < 1:
            raise ValueError("--threads must be >= 1")
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
