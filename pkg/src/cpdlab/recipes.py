"""Named end-to-end experiment recipes.

Each recipe is a pure function of its seed (plus optional size
overrides) returning a JSON-able report dictionary, so rerunning a
recipe with the same seed reproduces the report byte for byte.  The
registry keys double as the ``reproduce`` subcommand names:

    fig1a            Gaussian scenario: trained wide single-layer net
                     versus threshold-tuned CUSUM.
    fig1d            Cauchy scenario: trained net versus tuned CUSUM.
    figb1            Cauchy scenario: truncation-preprocessed net versus
                     the tuned rank (Wilcoxon) scan.
    table1           Five-class change-type mixture: oracle and min-BIC
                     likelihood classifiers versus a depth-5 network.
    thm-localisation Sliding-window localiser recovery experiment.
    null-rate        Null false-positive rate of the scan vs its bound.
    detection-miss   Miss rate just above the detection boundary.
    snr-risk         Scan risk under an SNR-floor prior vs its bound.
    grid-check       Deterministic dyadic-neighbourhood response check.
"""

from __future__ import annotations

import math
import statistics

import numpy as np

from . import cusum, glr
from .evaluate import (
    batch_cusum_statistics,
    mer_from_predictions,
    monte_carlo_bound_check,
    tune_threshold,
)
from .network import Architecture, Preprocessor, TrainConfig, embed_cusum, forward, train
from .robust import wilcoxon_statistic
from .simulate import LabeledDataset, MulticlassSpec, ScenarioSpec, gen_multiclass, gen_scenario

__all__ = ["RECIPES", "run_recipe"]


def _binary_benchmark(scenario, seed, train_size, test_size, hidden, preprocessor,
                      stat_name, n=100, epochs=200):
    """Tune a statistic threshold and train a network on one scenario draw.

    Returns test MERs of both detectors plus the tuned threshold, all
    derived from a single (seed, sizes) tuple.
    """
    train_set = gen_scenario(ScenarioSpec(scenario, n=n, size=train_size, role="train"), seed)
    test_set = gen_scenario(ScenarioSpec(scenario, n=n, size=test_size, role="test"), seed + 1)

    if stat_name == "cusum":
        train_stats = batch_cusum_statistics(train_set.values)
        test_stats = batch_cusum_statistics(test_set.values)
    elif stat_name == "wilcoxon":
        train_stats = np.array([wilcoxon_statistic(row)[0] for row in train_set.values])
        test_stats = np.array([wilcoxon_statistic(row)[0] for row in test_set.values])
    else:
        raise ValueError(f"unknown statistic {stat_name!r}")
    threshold = tune_threshold(None, train_set, stats=train_stats)
    stat_report = mer_from_predictions(
        test_set.labels, (test_stats > threshold).astype(np.int64),
        threshold=threshold, seed=seed, fingerprint=test_set.fingerprint(),
    )

    arch = Architecture(preprocessor.output_dim(n), tuple(hidden), 1)
    config = TrainConfig(epochs=epochs, seed=seed)
    net = train(preprocessor.apply(train_set.values), train_set.labels, arch, config)
    _, predictions = forward(net, preprocessor.apply(test_set.values))
    net_report = mer_from_predictions(
        test_set.labels, predictions, seed=seed, fingerprint=test_set.fingerprint(),
    )
    return {
        "seed": seed,
        "threshold": threshold,
        f"{stat_name}_mer": stat_report.mer,
        "network_mer": net_report.mer,
    }


def _seeded_runs(base_seed, n_seeds, one_run):
    runs = [one_run(base_seed + 1000 * k) for k in range(n_seeds)]
    return runs


def fig1a(seed: int = 7, *, train_size: int = 700, test_size: int = 5000,
          n_seeds: int = 3, epochs: int = 200) -> dict:
    """Gaussian scenario S1: wide single-layer network versus tuned CUSUM."""
    runs = _seeded_runs(seed, n_seeds, lambda s: _binary_benchmark(
        "S1", s, train_size, test_size, (198,), Preprocessor(), "cusum", epochs=epochs))
    diffs = [r["network_mer"] - r["cusum_mer"] for r in runs]
    return {
        "recipe": "fig1a",
        "seed": seed,
        "scenario": "S1",
        "train_size": train_size,
        "test_size": test_size,
        "epochs": epochs,
        "runs": runs,
        "median_network_mer": statistics.median(r["network_mer"] for r in runs),
        "median_cusum_mer": statistics.median(r["cusum_mer"] for r in runs),
        "median_mer_difference": statistics.median(diffs),
    }


def fig1d(seed: int = 7, *, train_size: int = 1000, test_size: int = 5000,
          n_seeds: int = 3, epochs: int = 200) -> dict:
    """Cauchy scenario S3: the trained network should beat tuned CUSUM."""
    runs = _seeded_runs(seed, n_seeds, lambda s: _binary_benchmark(
        "S3", s, train_size, test_size, (198,), Preprocessor(), "cusum", epochs=epochs))
    gains = [r["cusum_mer"] - r["network_mer"] for r in runs]
    return {
        "recipe": "fig1d",
        "seed": seed,
        "scenario": "S3",
        "train_size": train_size,
        "test_size": test_size,
        "epochs": epochs,
        "runs": runs,
        "median_network_mer": statistics.median(r["network_mer"] for r in runs),
        "median_cusum_mer": statistics.median(r["cusum_mer"] for r in runs),
        "median_mer_gain": statistics.median(gains),
    }


def _figb1_run(seed, train_size, test_size, epochs, z, clip_passes):
    """One seed of the truncated-net versus rank-scan comparison.

    A single z-score clip leaves the scale estimate inflated by the very
    outliers it is meant to tame, so the clip is applied ``clip_passes``
    times (the band shrinks towards its fixed point) before unit
    scaling.  The network starts from the embedded scan at the tuned
    threshold of its own input features; training can then only refine
    an already sound detector.
    """
    train_set = gen_scenario(ScenarioSpec("S3", size=train_size, role="train"), seed)
    test_set = gen_scenario(ScenarioSpec("S3", size=test_size, role="test"), seed + 1)
    n = train_set.n

    wil_train = np.array([wilcoxon_statistic(row)[0] for row in train_set.values])
    wil_threshold = tune_threshold(None, train_set, stats=wil_train)
    wil_test = np.array([wilcoxon_statistic(row)[0] for row in test_set.values])
    wil_report = mer_from_predictions(
        test_set.labels, (wil_test > wil_threshold).astype(np.int64),
        threshold=wil_threshold, seed=seed, fingerprint=test_set.fingerprint())

    pre = Preprocessor(((*(("truncate", z),) * clip_passes, ("unit_scale",)),))
    feats_train = pre.apply(train_set.values)
    feats_test = pre.apply(test_set.values)
    scan_threshold = tune_threshold(None, train_set, stats=batch_cusum_statistics(feats_train))
    init = embed_cusum(n, scan_threshold)
    net = train(feats_train, train_set.labels, init.architecture,
                TrainConfig(epochs=epochs, seed=seed), init=init)
    _, predictions = forward(net, feats_test)
    net_report = mer_from_predictions(
        test_set.labels, predictions, seed=seed, fingerprint=test_set.fingerprint())
    return {
        "seed": seed,
        "wilcoxon_threshold": wil_threshold,
        "scan_threshold": scan_threshold,
        "wilcoxon_mer": wil_report.mer,
        "network_mer": net_report.mer,
    }


def figb1(seed: int = 7, *, train_size: int = 1000, test_size: int = 5000,
          n_seeds: int = 3, epochs: int = 200, z: float = 3.0,
          clip_passes: int = 12) -> dict:
    """Cauchy scenario S3: truncation-preprocessed net versus tuned rank scan."""
    runs = _seeded_runs(seed, n_seeds, lambda s: _figb1_run(
        s, train_size, test_size, epochs, z, clip_passes))
    margins = [r["network_mer"] - r["wilcoxon_mer"] for r in runs]
    return {
        "recipe": "figb1",
        "seed": seed,
        "scenario": "S3",
        "truncation_z": z,
        "clip_passes": clip_passes,
        "train_size": train_size,
        "test_size": test_size,
        "epochs": epochs,
        "runs": runs,
        "median_network_mer": statistics.median(r["network_mer"] for r in runs),
        "median_wilcoxon_mer": statistics.median(r["wilcoxon_mer"] for r in runs),
        "median_mer_margin": statistics.median(margins),
    }


def _oracle_predictions(dataset: LabeledDataset, thresholds: dict) -> np.ndarray:
    """Type-matched likelihood detectors, one binary test per example.

    Examples of classes 1/2 run the mean scan (predict 2 on a firing),
    class 3 the variance scan (3, else 1), classes 4/5 the slope scan
    (5, else 4).  This mirrors pre-specifying the change type under test.
    """
    preds = np.empty(len(dataset), dtype=np.int64)
    for k, (row, label) in enumerate(zip(dataset.values, dataset.labels)):
        if label in (1, 2):
            fired = glr.oracle_classify(row, "mean", thresholds["mean"])
            preds[k] = 2 if fired else 1
        elif label == 3:
            fired = glr.oracle_classify(row, "variance", thresholds["variance"])
            preds[k] = 3 if fired else 1
        else:
            fired = glr.oracle_classify(row, "slope", thresholds["slope"])
            preds[k] = 5 if fired else 4
    return preds


def _subset(dataset: LabeledDataset, mask: np.ndarray, labels) -> LabeledDataset:
    return LabeledDataset(
        dataset.values[mask],
        np.asarray(labels, dtype=np.int64),
        [m for m, keep in zip(dataset.metadata, mask) if keep],
    )


def table1(seed: int = 7, *, regime: str = "strong", per_class_train: int = 400,
           per_class_test: int = 200, epochs: int = 200) -> dict:
    """Five-class mixture: oracle and adaptive likelihood classifiers vs a deep net.

    The oracle thresholds are tuned per change type on the training
    split; the network is a depth-5 multilayer perceptron on
    (scaled x, scaled x^2) features.
    """
    spec_train = MulticlassSpec(regime, per_class=per_class_train)
    spec_test = MulticlassSpec(regime, per_class=per_class_test)
    train_set = gen_multiclass(spec_train, seed)
    test_set = gen_multiclass(spec_test, seed + 1)

    thresholds = {}
    for kind, positive, negatives in (("mean", 2, (1,)), ("variance", 3, (1,)), ("slope", 5, (4,))):
        mask = np.isin(train_set.labels, (positive, *negatives))
        binary = _subset(train_set, mask, (train_set.labels[mask] == positive).astype(np.int64))
        stat_fn = {
            "mean": lambda row: cusum.cusum_statistic(row)[0],
            "variance": lambda row: glr.lr_variance_scan(row)[0],
            "slope": lambda row: glr.lr_slope_scan(row)[0],
        }[kind]
        thresholds[kind] = tune_threshold(stat_fn, binary)

    oracle_report = mer_from_predictions(
        test_set.labels, _oracle_predictions(test_set, thresholds),
        seed=seed, fingerprint=test_set.fingerprint())
    adaptive_report = mer_from_predictions(
        test_set.labels,
        np.array([glr.adaptive_classify(row) for row in test_set.values]),
        seed=seed, fingerprint=test_set.fingerprint())

    pre = Preprocessor((("unit_scale",), (("square",), ("unit_scale",))))
    width = 4 * (spec_train.n.bit_length() - 1)
    arch = Architecture(pre.output_dim(spec_train.n), (width,) * 5, 5)
    config = TrainConfig(epochs=epochs, seed=seed, lr_decay=0.02)
    net = train(pre.apply(train_set.values), train_set.labels, arch, config)
    _, net_predictions = forward(net, pre.apply(test_set.values))
    net_report = mer_from_predictions(
        test_set.labels, net_predictions, seed=seed, fingerprint=test_set.fingerprint())

    return {
        "recipe": "table1",
        "seed": seed,
        "regime": regime,
        "per_class_train": per_class_train,
        "per_class_test": per_class_test,
        "epochs": epochs,
        "thresholds": thresholds,
        "oracle": oracle_report.to_jsonable(),
        "adaptive": adaptive_report.to_jsonable(),
        "network": net_report.to_jsonable(),
        "oracle_accuracy": oracle_report.accuracy,
        "adaptive_accuracy": adaptive_report.accuracy,
        "network_accuracy": net_report.accuracy,
    }


def thm_localisation(seed: int = 7, *, reps: int = 500) -> dict:
    """Multi-change recovery: count and location accuracy of the localiser."""
    check = monte_carlo_bound_check("localisation", reps=reps, seed=seed)
    return {"recipe": "thm-localisation", "seed": seed, **check.to_jsonable()}


def null_rate(seed: int = 7, *, reps: int = 20000) -> dict:
    check = monte_carlo_bound_check("null_rate", {"n": 100, "eps": 0.05}, reps=reps, seed=seed)
    return {"recipe": "null-rate", "seed": seed, **check.to_jsonable()}


def detection_miss(seed: int = 7, *, reps: int = 20000) -> dict:
    check = monte_carlo_bound_check(
        "detection_miss", {"n": 100, "eps": 0.05, "snr_multiplier": 1.05}, reps=reps, seed=seed)
    return {"recipe": "detection-miss", "seed": seed, **check.to_jsonable()}


def snr_risk(seed: int = 7, *, reps: int = 20000) -> dict:
    check = monte_carlo_bound_check(
        "snr_risk", {"n": 100, "snr_bound": 0.8}, reps=reps, seed=seed)
    return {"recipe": "snr-risk", "seed": seed, **check.to_jsonable()}


def grid_check(seed: int = 7, *, n_min: int = 16, n_max: int = 512) -> dict:
    """Deterministic check that near-change scan points keep >= sqrt(3)/3 response.

    For every length and change location, every scan position within
    half the shorter segment of the change must respond at least
    sqrt(3)/3 times the peak.  The dyadic grid always contains such a
    position, so this is the exact ingredient that bounds the grid
    scan's power loss.  The seed is accepted for interface uniformity
    but unused.
    """
    floor = math.sqrt(3.0) / 3.0
    violations = 0
    worst = math.inf
    for n in range(n_min, n_max + 1):
        for tau in range(1, n):
            reach = min(tau, n - tau) / 2.0
            lo = int(math.ceil(tau - reach))
            hi = int(math.floor(tau + reach))
            responses = cusum.step_response(n, tau)[lo - 1:hi]
            ratio = responses.min() / responses[tau - lo]
            worst = min(worst, ratio)
            if ratio < floor - 1e-9:
                violations += 1
    return {
        "recipe": "grid-check",
        "seed": seed,
        "n_min": n_min,
        "n_max": n_max,
        "floor": floor,
        "worst_ratio": worst,
        "violations": violations,
        "passed": violations == 0,
    }


RECIPES = {
    "fig1a": fig1a,
    "fig1d": fig1d,
    "figb1": figb1,
    "table1": table1,
    "thm-localisation": thm_localisation,
    "null-rate": null_rate,
    "detection-miss": detection_miss,
    "snr-risk": snr_risk,
    "grid-check": grid_check,
}


def run_recipe(name: str, seed: int = 7, **overrides) -> dict:
    """Run a named recipe; unknown names raise ``ValueError``."""
    if name not in RECIPES:
        raise ValueError(f"unknown recipe {name!r}; choose from {sorted(RECIPES)}")
    return RECIPES[name](seed, **overrides)
