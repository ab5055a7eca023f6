"""Turn any fixed-window change classifier into a multi-change localiser.

The scheme slides a window of length ``n`` over a long series, records
the binary verdict of the classifier at every offset, smooths the
verdicts with a length-``n`` running mean, and reports one estimated
change point per maximal stretch where the running mean stays at or
above a vote threshold ``gamma``.  Within each stretch the estimate is
the position of the largest running mean (smallest index on ties).

Positions are 1-based: window ``i`` covers series entries ``i`` to
``i + n - 1``, and an estimated change point ``t`` means the generating
distribution shifts between entries ``t`` and ``t + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cusum import as_series, cusum_star_statistic, dyadic_grid

__all__ = [
    "WindowClassifier",
    "LocalisationResult",
    "binary_window_classifier",
    "network_window_classifier",
    "cusum_star_window_classifier",
    "sliding_labels",
    "localise",
]


@dataclass(frozen=True)
class WindowClassifier:
    """A window length plus a decision function ``window -> (label, probability)``.

    ``label_series``, when provided, labels every window of a long
    series in one call and must agree with per-window classification;
    the localiser uses it to avoid a Python loop per offset.
    """

    length: int
    classify: Callable[[np.ndarray], tuple[int, float]]
    label_series: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] | None = field(
        default=None, compare=False
    )

    def __post_init__(self):
        if self.length < 4:
            raise ValueError(f"window length must be >= 4, got {self.length}")


def binary_window_classifier(length: int, decide: Callable[[np.ndarray], int]) -> WindowClassifier:
    """Wrap a plain 0/1 decision function; probability echoes the label."""

    def classify(window):
        label = int(decide(window))
        return label, float(label)

    return WindowClassifier(length, classify)


def network_window_classifier(net, preprocessor=None) -> WindowClassifier:
    """Use a trained binary network as the window classifier.

    Each window is preprocessed (identity when ``preprocessor`` is
    ``None``), labelled by the network's hard decision, and annotated
    with the logistic probability of a change.
    """
    from .network import forward, predict_proba

    if not net.is_binary:
        raise ValueError("localisation needs a binary window classifier")
    length = (net.architecture.input_dim if preprocessor is None
              else _preprocessed_window_length(net, preprocessor))

    def features(window):
        return window if preprocessor is None else preprocessor.apply(window)

    def classify(window):
        feats = features(window)
        _, label = forward(net, feats)
        return int(label), float(predict_proba(net, feats))

    def label_series(series):
        n = length
        windows = np.lib.stride_tricks.sliding_window_view(series, n)
        feats = features(windows)
        _, labels = forward(net, feats)
        probs = predict_proba(net, feats)
        return labels.astype(np.int64), np.asarray(probs, dtype=np.float64)

    return WindowClassifier(length, classify, label_series)


def _preprocessed_window_length(net, preprocessor) -> int:
    n = net.architecture.input_dim // len(preprocessor.channels)
    if preprocessor.output_dim(n) != net.architecture.input_dim:
        raise ValueError("preprocessor channels do not match the network input width")
    return n


def cusum_star_window_classifier(length: int, threshold: float) -> WindowClassifier:
    """Dyadic-grid CUSUM scan as a window classifier, with a vectorised path.

    The vectorised path evaluates every contrast on every window through
    prefix sums of the full series; it matches the per-window scan up to
    rounding of order 1e-12, which only matters for statistics exactly
    at the threshold.
    """
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    grid = dyadic_grid(length)

    def classify(window):
        label = int(cusum_star_statistic(window)[0] > threshold)
        return label, float(label)

    def label_series(series):
        series = as_series(series, min_len=length)
        n = length
        prefix = np.concatenate([[0.0], np.cumsum(series)])
        offsets = np.arange(series.size - n + 1)
        best = np.zeros(offsets.size)
        for t in grid:
            head = prefix[offsets + t] - prefix[offsets]
            tail = prefix[offsets + n] - prefix[offsets + t]
            stat = np.abs(
                np.sqrt((n - t) / (t * n)) * head - np.sqrt(t / ((n - t) * n)) * tail
            )
            np.maximum(best, stat, out=best)
        labels = (best > threshold).astype(np.int64)
        return labels, labels.astype(np.float64)

    return WindowClassifier(length, classify, label_series)


def sliding_labels(series, classifier: WindowClassifier):
    """Classify every window of the series.

    Returns ``(labels, probabilities)`` of length ``len(series) - n + 1``;
    entry ``i-1`` is the verdict on the window starting at position ``i``.
    """
    n = classifier.length
    series = as_series(series, min_len=n)
    if classifier.label_series is not None:
        labels, probs = classifier.label_series(series)
        return np.asarray(labels, dtype=np.int64), np.asarray(probs, dtype=np.float64)
    count = series.size - n + 1
    labels = np.empty(count, dtype=np.int64)
    probs = np.empty(count)
    for i in range(count):
        label, prob = classifier.classify(series[i:i + n])
        labels[i] = label
        probs[i] = prob
    return labels, probs


@dataclass
class LocalisationResult:
    """Estimated change points with the evidence they came from.

    ``running_mean[j]`` is the vote average over windows
    ``j+1 .. j+n`` (1-based window indices ``i = n .. len(series)-n+1``
    map to ``running_mean[i - n]``).  ``segments`` holds the maximal
     1-based index ranges where the running mean reached the vote
    threshold, one estimated change point per segment.  ``probabilities``
    carries the per-window probabilities verbatim; the estimator itself
    uses only the labels.
    """

    change_points: list[int]
    segments: list[tuple[int, int]]
    running_mean: np.ndarray
    labels: np.ndarray
    probabilities: np.ndarray
    window_length: int
    vote_threshold: float


def localise(series, classifier: WindowClassifier, gamma: float = 0.5) -> LocalisationResult:
    """Estimate all change points of ``series`` with a sliding window vote.

    Requires ``len(series) >= 2 * classifier.length`` so at least one
    full running mean exists.  ``gamma`` is the vote threshold in
    (0, 1]; raising it can only remove estimates.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    n = classifier.length
    series = as_series(series, min_len=2 * n)
    labels, probs = sliding_labels(series, classifier)
    window = np.ones(n) / n
    running = np.convolve(labels.astype(np.float64), window, mode="valid")

    hot = running >= gamma
    change_points: list[int] = []
    segments: list[tuple[int, int]] = []
    j = 0
    while j < hot.size:
        if not hot[j]:
            j += 1
            continue
        start = j
        while j < hot.size and hot[j]:
            j += 1
        stop = j - 1  # inclusive
        peak = start + int(np.argmax(running[start:stop + 1]))
        segments.append((start + n, stop + n))  # back to 1-based window indices
        change_points.append(peak + n)
    return LocalisationResult(change_points, segments, running, labels, probs, n, gamma)
