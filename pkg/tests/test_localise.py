"""Tests for the sliding-window change-point localiser."""

import numpy as np
import pytest

from cpdlab import cusum
from cpdlab.localise import (
    WindowClassifier,
    binary_window_classifier,
    cusum_star_window_classifier,
    localise,
    sliding_labels,
)
from cpdlab.simulate import gen_piecewise


def _straddle_classifier(n, tau):
    """Ideal oracle: label 1 iff the window contains the change at tau."""

    def label_series(series):
        count = series.size - n + 1
        labels = np.zeros(count, dtype=np.int64)
        # 1-based windows i in [tau-n+2, tau] contain the change at tau.
        labels[max(0, tau - n + 1):tau] = 1
        return labels, labels.astype(float)

    return WindowClassifier(n, lambda w: (0, 0.0), label_series)


class TestSlidingLabels:
    def test_constant_one_classifier(self):
        clf = binary_window_classifier(4, lambda w: 1)
        labels, probs = sliding_labels(np.zeros(10), clf)
        assert labels.tolist() == [1] * 7
        assert probs.tolist() == [1.0] * 7

    def test_output_length(self):
        clf = binary_window_classifier(5, lambda w: 0)
        for total in (5, 9, 23):
            labels, _ = sliding_labels(np.zeros(total), clf)
            assert labels.size == total - 5 + 1

    def test_huge_threshold_scan_is_silent_on_noise(self):
        rng = np.random.default_rng(0)
        clf = cusum_star_window_classifier(16, 50.0)
        labels, _ = sliding_labels(rng.standard_normal(200), clf)
        assert labels.sum() == 0

    def test_vectorised_path_matches_loop(self):
        rng = np.random.default_rng(1)
        series = rng.standard_normal(120)
        series[60:] += 3.0
        clf = cusum_star_window_classifier(16, 2.0)
        fast, _ = sliding_labels(series, clf)
        slow = np.array([clf.classify(series[i:i + 16])[0] for i in range(series.size - 15)])
        np.testing.assert_array_equal(fast, slow)


class TestLocalise:
    def test_all_zero_classifier_finds_nothing(self):
        clf = binary_window_classifier(8, lambda w: 0)
        result = localise(np.zeros(64), clf)
        assert result.change_points == [] and result.segments == []

    def test_ideal_straddle_recovers_location(self):
        result = localise(np.zeros(3500), _straddle_classifier(700, 1000), 0.5)
        assert len(result.change_points) == 1
        assert result.change_points[0] == 1000
        s, e = result.segments[0]
        assert s <= 1000 <= e

    def test_running_mean_range_and_maximality(self):
        rng = np.random.default_rng(2)
        labels = rng.integers(0, 2, 96)
        clf = WindowClassifier(
            8, lambda w: (0, 0.0), lambda s: (labels.copy(), labels.astype(float))
        )
        result = localise(np.zeros(96 + 8 - 1), clf, gamma=0.5)
        assert np.all(result.running_mean >= 0) and np.all(result.running_mean <= 1)
        for s, e in result.segments:
            lo, hi = s - 8, e - 8  # segment bounds as running-mean offsets
            assert np.all(result.running_mean[lo:hi + 1] >= 0.5)
            if lo > 0:
                assert result.running_mean[lo - 1] < 0.5
            if hi + 1 < result.running_mean.size:
                assert result.running_mean[hi + 1] < 0.5

    def test_translation_shifts_estimates(self):
        # Noiseless steps: labels depend only on window content, so a
        # shifted change moves the estimate by exactly the shift.
        clf = cusum_star_window_classifier(64, cusum.snr_threshold_star(64, 1.5))
        for tau in (600, 750):
            series, _ = gen_piecewise(2000, [tau], [0.0, 8.0], noise_sd=0.0, seed=0)
            result = localise(series, clf, 0.5)
            assert result.change_points == [tau]

    def test_monotone_gamma(self):
        rng = np.random.default_rng(3)
        series, _ = gen_piecewise(1200, [400, 800], [0.0, 7.0, 0.5], noise_sd=1.0, seed=4)
        clf = cusum_star_window_classifier(64, cusum.snr_threshold_star(64, 1.5))
        counts = []
        for gamma in (0.2, 0.4, 0.6, 0.8, 1.0):
            counts.append(len(localise(series, clf, gamma).change_points))
        assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_input_validation(self):
        clf = binary_window_classifier(16, lambda w: 0)
        with pytest.raises(ValueError, match="length >= 32"):
            localise(np.zeros(20), clf)
        with pytest.raises(ValueError, match="gamma"):
            localise(np.zeros(64), clf, gamma=0.0)
        with pytest.raises(ValueError, match="gamma"):
            localise(np.zeros(64), clf, gamma=1.5)

    def test_noisy_multi_change_recovery(self):
        clf = cusum_star_window_classifier(128, cusum.snr_threshold_star(128, 1.8))
        series, _ = gen_piecewise(
            3500, [990, 1691, 2733], [0.0, 11.0, -1.0, 12.0], seed=5, min_spacing=256
        )
        result = localise(series, clf, 0.5)
        assert result.change_points == [990, 1691, 2733]


class TestNetworkWindowClassifier:
    def test_embedded_net_matches_scan_classifier(self):
        from cpdlab.localise import network_window_classifier
        from cpdlab.network import embed_cusum

        rng = np.random.default_rng(6)
        lam = cusum.snr_threshold_star(64, 1.5)
        clf = network_window_classifier(embed_cusum(64, lam, "star"))
        assert clf.length == 64
        series, _ = gen_piecewise(600, [300], [0.0, 6.0], seed=7, min_spacing=128)
        labels, probs = sliding_labels(series, clf)
        direct = np.array([cusum.cusum_star_classify(series[i:i + 64], lam)
                           for i in range(series.size - 63)])
        np.testing.assert_array_equal(labels, direct)
        assert np.all((probs >= 0) & (probs <= 1))

    def test_preprocessed_window_length(self):
        from cpdlab.localise import network_window_classifier
        from cpdlab.network import Architecture, Preprocessor, TrainConfig, train

        rng = np.random.default_rng(8)
        pre = Preprocessor((("unit_scale",), (("square",), ("unit_scale",))))
        X = rng.standard_normal((40, 32))
        y = (np.abs(X).max(axis=1) > 2.5).astype(int)
        net = train(pre.apply(X), y, Architecture(64, (4,), 1), TrainConfig(epochs=2, seed=0))
        clf = network_window_classifier(net, pre)
        assert clf.length == 32
        labels, _ = sliding_labels(rng.standard_normal(100), clf)
        assert labels.size == 100 - 32 + 1
