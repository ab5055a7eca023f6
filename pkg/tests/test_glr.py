"""Tests for the generalised likelihood-ratio scans and BIC classifier."""

import numpy as np
import pytest

from cpdlab import cusum, glr


def test_mean_design_matches_cusum_contrasts():
    n = 10
    dirs = glr.glr_directions(glr.mean_change_design(n))
    basis = cusum.cusum_basis(n)
    for k, tau in enumerate(dirs.taus):
        v = dirs.directions[k]
        u = basis[tau - 1]
        assert min(np.abs(v - u).max(), np.abs(v + u).max()) < 1e-10


def test_mean_design_statistic_equals_scan():
    rng = np.random.default_rng(0)
    for n in (5, 20, 100):
        dirs = glr.glr_directions(glr.mean_change_design(n))
        for _ in range(1000):
            x = rng.standard_normal(n)
            stat, tau = glr.glr_statistic(x, dirs)
            full, tau_full = cusum.cusum_statistic(x)
            assert abs(stat - full) < 1e-10
            assert tau == tau_full


def test_covariate_in_base_span_is_degenerate():
    n = 8
    design = glr.ChangeDesign(
        base=np.ones((n, 1)),
        change_covariates={3: np.full(n, 2.0), 5: (np.arange(1, n + 1) > 5).astype(float)},
    )
    dirs = glr.glr_directions(design)
    assert dirs.degenerate.tolist() == [True, False]
    stat, tau = glr.glr_statistic(np.arange(n, dtype=float), dirs)
    assert tau == 5
    with pytest.raises(ValueError, match="degenerate"):
        glr.glr_statistic(
            np.ones(n),
            glr.glr_directions(
                glr.ChangeDesign(np.ones((n, 1)), {2: np.full(n, 3.0)})
            ),
        )


def test_slope_directions_orthogonal_to_base():
    n = 30
    design = glr.slope_change_design(n)
    dirs = glr.glr_directions(design)
    products = dirs.directions[~dirs.degenerate] @ design.base
    assert np.abs(products).max() < 1e-8


def test_direction_unit_norms():
    dirs = glr.glr_directions(glr.slope_change_design(25))
    norms = np.linalg.norm(dirs.directions[~dirs.degenerate], axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-10)


def test_constant_series_gives_zero_statistic():
    dirs = glr.glr_directions(glr.mean_change_design(12))
    stat, _ = glr.glr_statistic(np.full(12, 4.2), dirs)
    assert stat == pytest.approx(0.0, abs=1e-12)


def test_two_point_statistic():
    dirs = glr.glr_directions(glr.mean_change_design(2))
    stat, tau = glr.glr_statistic(np.array([3.0, 0.0]), dirs)
    assert stat == pytest.approx(2.1213, abs=1e-4)
    assert tau == 1


def test_statistic_scales_linearly():
    rng = np.random.default_rng(3)
    dirs = glr.glr_directions(glr.mean_change_design(15))
    x = rng.standard_normal(15)
    stat, tau = glr.glr_statistic(x, dirs)
    stat2, tau2 = glr.glr_statistic(2.5 * x, dirs)
    assert stat2 == pytest.approx(2.5 * stat)
    assert tau2 == tau


def test_whitening_removes_base_effects():
    # Under x = Z b + G e, the scan must not depend on b.
    rng = np.random.default_rng(4)
    n = 20
    gamma = np.eye(n) + 0.1 * rng.standard_normal((n, n))
    design = glr.slope_change_design(n, noise_transform=gamma)
    dirs = glr.glr_directions(design)
    e = rng.standard_normal(n)
    x = gamma @ e
    base_shift = design.base @ np.array([3.0, -0.7])
    stat1, tau1 = glr.glr_statistic(x, dirs)
    stat2, tau2 = glr.glr_statistic(x + base_shift, dirs)
    assert stat1 == pytest.approx(stat2, abs=1e-8)
    assert tau1 == tau2


def test_singular_noise_transform_rejected():
    n = 6
    singular = np.zeros((n, n))
    with pytest.raises(ValueError, match="singular"):
        glr.glr_directions(glr.mean_change_design(n, noise_transform=singular))


def test_rank_deficient_base_rejected():
    n = 6
    base = np.column_stack([np.ones(n), 2 * np.ones(n)])
    with pytest.raises(ValueError, match="rank deficient"):
        glr.ChangeDesign(base, {2: np.arange(n, dtype=float)})


class TestVarianceScan:
    def test_degenerate_halves_do_not_crash(self):
        x = np.array([1.0] * 5 + [2.0] * 5)
        stat, tau = glr.lr_variance_scan(x)
        assert np.isfinite(stat)

    def test_statistic_nonnegative(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            x = rng.standard_normal(int(rng.integers(4, 80)))
            assert glr.lr_variance_scan(x)[0] >= -1e-9

    def test_localises_variance_change(self):
        rng = np.random.default_rng(6)
        hits = 0
        for _ in range(200):
            x = np.concatenate([rng.standard_normal(100), 3.0 * rng.standard_normal(100)])
            _, tau = glr.lr_variance_scan(x)
            hits += abs(tau - 100) <= 10
        assert hits / 200 >= 0.95


class TestAdaptiveClassify:
    def test_strong_mean_step(self):
        rng = np.random.default_rng(7)
        hits = 0
        for _ in range(100):
            tau = int(rng.integers(100, 301))
            x = np.where(np.arange(1, 401) <= tau, 0.0, 5.0) + rng.standard_normal(400)
            hits += glr.adaptive_classify(x) == glr.CLASS_MEAN_CHANGE
        assert hits >= 95

    def test_pure_linear_trend(self):
        rng = np.random.default_rng(8)
        hits = 0
        for _ in range(100):
            x = 0.05 * np.arange(1, 401) + rng.standard_normal(400)
            hits += glr.adaptive_classify(x) == glr.CLASS_SLOPE_NO_CHANGE
        assert hits >= 90

    def test_white_noise(self):
        rng = np.random.default_rng(9)
        hits = 0
        for _ in range(100):
            x = rng.standard_normal(400)
            hits += glr.adaptive_classify(x) == glr.CLASS_NO_CHANGE
        assert hits >= 90


class TestOracleClassify:
    def test_constant_series_never_fires(self):
        assert glr.oracle_classify(np.full(20, 1.3), "mean", 0.5) == 0

    def test_mean_oracle_matches_cusum(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            x = rng.standard_normal(30)
            for thr in (0.5, 1.5, 3.0):
                assert glr.oracle_classify(x, "mean", thr) == cusum.cusum_classify(x, thr)

    def test_variance_oracle_detects_sd_doubling(self):
        rng = np.random.default_rng(11)
        # Threshold from the null distribution of the scan statistic.
        null_stats = [glr.lr_variance_scan(rng.standard_normal(400))[0] for _ in range(100)]
        thr = float(np.quantile(null_stats, 0.95))
        hits = 0
        for _ in range(100):
            tau = int(rng.integers(100, 301))
            sd = np.where(np.arange(1, 401) <= tau, 0.3, 0.6)
            hits += glr.oracle_classify(sd * rng.standard_normal(400), "variance", thr)
        assert hits >= 95

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown oracle kind"):
            glr.oracle_classify(np.ones(10), "median", 1.0)
