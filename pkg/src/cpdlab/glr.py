"""Generalised likelihood-ratio scans for regression-type change models.

A change model here is ``x = Z b + c_tau * phi + G e`` with base
covariates ``Z`` (the no-change part), a per-location change covariate
``c_tau``, an invertible noise mixing matrix ``G`` and standard Gaussian
``e``.  Whitening by ``G`` and projecting ``c_tau`` onto the
orthocomplement of the whitened base columns turns the likelihood-ratio
test for ``phi = 0`` into a scan ``max_tau |u_tau . (G^-1 x)|`` with unit
directions ``u_tau``; for the plain mean-change design this reduces to
the CUSUM scan of :mod:`cpdlab.cusum` up to sign.

The module also provides the single-change Gaussian likelihood scans
used by the type-specific (oracle) classifiers and the min-BIC adaptive
classifier over five candidate change models.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .cusum import as_series, cusum_statistic

__all__ = [
    "ChangeDesign",
    "GlrDirections",
    "mean_change_design",
    "slope_change_design",
    "glr_directions",
    "glr_statistic",
    "lr_variance_scan",
    "lr_slope_scan",
    "adaptive_classify",
    "oracle_classify",
    "CLASS_NO_CHANGE",
    "CLASS_MEAN_CHANGE",
    "CLASS_VARIANCE_CHANGE",
    "CLASS_SLOPE_NO_CHANGE",
    "CLASS_SLOPE_CHANGE",
]

# Class labels of the adaptive classifier, in BIC-candidate order.
CLASS_NO_CHANGE = 1
CLASS_MEAN_CHANGE = 2
CLASS_VARIANCE_CHANGE = 3
CLASS_SLOPE_NO_CHANGE = 4
CLASS_SLOPE_CHANGE = 5

# Floor applied to maximum-likelihood variance estimates so degenerate
# segments (identical values) stay finite.
VARIANCE_FLOOR = 1e-12

# Relative residual norm below which a change covariate is treated as
# lying in the span of the base covariates (scan statistic forced to 0).
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class ChangeDesign:
    """Covariate layout of a regression-type change model.

    Parameters
    ----------
    base : (n, p) array
        Covariates of the no-change model; must have full column rank.
    change_covariates : dict[int, (n,) array]
        Maps each candidate change location tau to its covariate.
    noise_transform : (n, n) array, optional
        Invertible mixing matrix applied to the white noise; ``None``
        means the identity.
    """

    base: np.ndarray
    change_covariates: dict[int, np.ndarray] = field(repr=False)
    noise_transform: np.ndarray | None = None

    def __post_init__(self):
        base = np.atleast_2d(np.asarray(self.base, dtype=np.float64))
        if base.ndim != 2:
            raise ValueError("base covariates must form a 2-D matrix")
        n, p = base.shape
        if p < 1 or n < 2:
            raise ValueError(f"base covariate matrix has invalid shape {base.shape}")
        if np.linalg.matrix_rank(base) < p:
            raise ValueError("base covariate matrix is rank deficient")
        covs = {}
        for tau, c in self.change_covariates.items():
            c = np.asarray(c, dtype=np.float64)
            if c.shape != (n,):
                raise ValueError(
                    f"change covariate at tau={tau} has shape {c.shape}, expected ({n},)"
                )
            covs[int(tau)] = c
        gamma = self.noise_transform
        if gamma is not None:
            gamma = np.asarray(gamma, dtype=np.float64)
            if gamma.shape != (n, n):
                raise ValueError(
                    f"noise transform has shape {gamma.shape}, expected ({n}, {n})"
                )
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "change_covariates", covs)
        object.__setattr__(self, "noise_transform", gamma)

    @property
    def n(self) -> int:
        return self.base.shape[0]


@dataclass(frozen=True)
class GlrDirections:
    """Whitened unit scan directions derived from a :class:`ChangeDesign`.

    ``directions[k]`` acts on the whitened series; rows flagged in
    ``degenerate`` are zero and their statistic is fixed at 0.
    """

    n: int
    taus: np.ndarray
    directions: np.ndarray
    degenerate: np.ndarray
    noise_transform: np.ndarray | None = None


def mean_change_design(n: int, noise_transform=None, taus=None) -> ChangeDesign:
    """Design for one mean shift: intercept base, step covariates."""
    if taus is None:
        taus = range(1, n)
    base = np.ones((n, 1))
    idx = np.arange(1, n + 1)
    covs = {int(t): (idx > t).astype(np.float64) for t in taus}
    return ChangeDesign(base, covs, noise_transform)


def slope_change_design(n: int, noise_transform=None, taus=None) -> ChangeDesign:
    """Design for one continuous slope change: intercept+trend base, hinge covariates."""
    if taus is None:
        taus = range(1, n)
    idx = np.arange(1, n + 1, dtype=np.float64)
    base = np.column_stack([np.ones(n), idx])
    covs = {int(t): np.maximum(0.0, idx - t) for t in taus}
    return ChangeDesign(base, covs, noise_transform)


def glr_directions(design: ChangeDesign) -> GlrDirections:
    """Build the unit scan directions of the likelihood-ratio test for ``design``.

    Each change covariate is whitened, projected onto the orthocomplement
    of the whitened base columns, and normalised.  Covariates whose
    residual norm falls below ``DEGENERACY_TOL`` relative to the whitened
    covariate are marked degenerate: a change there is indistinguishable
    from the no-change model and its statistic is 0 by convention.
    """
    taus = np.array(sorted(design.change_covariates), dtype=np.int64)
    if taus.size == 0:
        raise ValueError("design has no change covariates")
    n = design.n
    cmat = np.column_stack([design.change_covariates[t] for t in taus])
    gamma = design.noise_transform
    if gamma is None:
        z_w, c_w = design.base, cmat
    else:
        try:
            z_w = np.linalg.solve(gamma, design.base)
            c_w = np.linalg.solve(gamma, cmat)
        except np.linalg.LinAlgError as exc:
            raise ValueError("noise transform is singular") from exc
    q, _ = np.linalg.qr(z_w)
    resid = c_w - q @ (q.T @ c_w)
    resid_norm = np.linalg.norm(resid, axis=0)
    c_norm = np.linalg.norm(c_w, axis=0)
    degenerate = resid_norm < DEGENERACY_TOL * np.maximum(c_norm, 1e-300)
    directions = np.zeros((taus.size, n))
    ok = ~degenerate
    directions[ok] = (resid[:, ok] / resid_norm[ok]).T
    return GlrDirections(n, taus, directions, degenerate, gamma)


def glr_statistic(x, dirs: GlrDirections) -> tuple[float, int]:
    """Return ``(max_tau |u_tau . (G^-1 x)|, argmax tau)`` over non-degenerate taus.

    Ties break toward the smallest tau.  Raises if every direction is
    degenerate, since the scan is then empty.
    """
    x = as_series(x)
    if x.size != dirs.n:
        raise ValueError(f"series length {x.size} does not match design length {dirs.n}")
    if bool(np.all(dirs.degenerate)):
        raise ValueError("all change directions are degenerate; nothing to scan")
    if dirs.noise_transform is None:
        y = x
    else:
        y = np.linalg.solve(dirs.noise_transform, x)
    scores = np.abs(dirs.directions @ y)
    scores[dirs.degenerate] = -np.inf
    k = int(np.argmax(scores))
    return float(scores[k]), int(dirs.taus[k])


def lr_variance_scan(x) -> tuple[float, int]:
    """Scan for one variance change around a common mean.

    Returns twice the maximised Gaussian log likelihood ratio,
    ``n log s0^2 - tau log s1^2 - (n-tau) log s2^2`` with per-segment ML
    variances, maximised over tau in [2, n-2]; ties break toward the
    smallest tau.  Segment variances are floored at ``VARIANCE_FLOOR``.
    """
    x = as_series(x, min_len=4)
    n = x.size
    d2 = (x - x.mean()) ** 2
    prefix = np.cumsum(d2)
    taus = np.arange(2, n - 1)
    left = prefix[taus - 1] / taus
    right = (prefix[-1] - prefix[taus - 1]) / (n - taus)
    total = prefix[-1] / n
    stat = (
        n * math.log(max(total, VARIANCE_FLOOR))
        - taus * np.log(np.maximum(left, VARIANCE_FLOOR))
        - (n - taus) * np.log(np.maximum(right, VARIANCE_FLOOR))
    )
    k = int(np.argmax(stat))
    return float(stat[k]), int(taus[k])


@functools.lru_cache(maxsize=16)
def _slope_directions(n: int) -> GlrDirections:
    return glr_directions(slope_change_design(n))


def lr_slope_scan(x) -> tuple[float, int]:
    """Scan for one continuous slope change against a single linear trend."""
    x = as_series(x, min_len=4)
    return glr_statistic(x, _slope_directions(x.size))


def oracle_classify(x, kind: str, threshold: float) -> int:
    """Type-specific change detector: 1 iff the matched scan exceeds ``threshold``.

    ``kind`` selects the scan: "mean" (CUSUM), "variance"
    (:func:`lr_variance_scan`) or "slope" (:func:`lr_slope_scan`).  The
    threshold is typically tuned on training data with
    :func:`cpdlab.evaluate.tune_threshold`.
    """
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    if kind == "mean":
        stat, _ = cusum_statistic(x)
    elif kind == "variance":
        stat, _ = lr_variance_scan(x)
    elif kind == "slope":
        stat, _ = lr_slope_scan(x)
    else:
        raise ValueError(f"unknown oracle kind {kind!r}")
    return int(stat > threshold)


def adaptive_classify(x) -> int:
    """Pick a change type by minimum BIC over five candidate models.

    Candidates, in label order: constant mean (1), one mean change (2),
    one variance change (3), single linear trend (4), one continuous
    slope change (5).  Each is fitted by maximum Gaussian likelihood
    (scanning tau where applicable) and scored with
    ``BIC = -2 loglik + k log n`` using free-parameter counts
    (2, 4, 4, 3, 5); sigma is counted once per model.  Ties break toward
    the smallest label.
    """
    x = as_series(x, min_len=6)
    n = x.size
    logliks = np.array(
        [
            _loglik_const(x),
            _loglik_mean_change(x),
            _loglik_variance_change(x),
            _loglik_line(x),
            _loglik_kinked_line(x),
        ]
    )
    k = np.array([2.0, 4.0, 4.0, 3.0, 5.0])
    bic = -2.0 * logliks + k * math.log(n)
    return int(np.argmin(bic)) + 1


def _gauss_loglik(n: int, rss: float) -> float:
    """Profile Gaussian log likelihood with sigma^2 = rss/n."""
    s2 = max(rss / n, VARIANCE_FLOOR)
    return -0.5 * n * (math.log(2.0 * math.pi * s2) + 1.0)


def _loglik_const(x: np.ndarray) -> float:
    n = x.size
    rss = float(np.sum((x - x.mean()) ** 2))
    return _gauss_loglik(n, rss)


def _loglik_mean_change(x: np.ndarray) -> float:
    n = x.size
    s = np.cumsum(x)
    sq = float(np.sum(x * x))
    taus = np.arange(1, n)
    left = s[taus - 1]
    right = s[-1] - left
    rss = sq - left**2 / taus - right**2 / (n - taus)
    return _gauss_loglik(n, float(np.min(rss)))


def _loglik_variance_change(x: np.ndarray) -> float:
    n = x.size
    d2 = (x - x.mean()) ** 2
    prefix = np.cumsum(d2)
    taus = np.arange(2, n - 1)
    s1 = np.maximum(prefix[taus - 1] / taus, VARIANCE_FLOOR)
    s2 = np.maximum((prefix[-1] - prefix[taus - 1]) / (n - taus), VARIANCE_FLOOR)
    ll = -0.5 * (
        taus * np.log(2.0 * math.pi * s1)
        + (n - taus) * np.log(2.0 * math.pi * s2)
        + n
    )
    return float(np.max(ll))


def _loglik_line(x: np.ndarray) -> float:
    n = x.size
    t = np.arange(1, n + 1, dtype=np.float64)
    design = np.column_stack([np.ones(n), t])
    coef = np.linalg.lstsq(design, x, rcond=None)[0]
    rss = float(np.sum((x - design @ coef) ** 2))
    return _gauss_loglik(n, rss)


def _loglik_kinked_line(x: np.ndarray) -> float:
    """Best continuous piecewise-linear fit with one kink, tau in [2, n-2].

    The hinge column's cross products have closed forms in tau, so the
    normal equations for every tau are assembled at once and solved as a
    batched 3x3 system.
    """
    n = x.size
    t = np.arange(1, n + 1, dtype=np.float64)
    taus = np.arange(2, n - 1)
    m = (n - taus).astype(np.float64)

    sum_s = m * (m + 1) / 2.0
    sum_s2 = m * (m + 1) * (2 * m + 1) / 6.0
    sum_ts = taus * sum_s + sum_s2

    sum_t = t.sum()
    sum_t2 = float(np.sum(t * t))
    sum_x = x.sum()
    sum_xt = float(np.sum(x * t))
    sum_x2 = float(np.sum(x * x))

    xt_suffix = np.cumsum((x * t)[::-1])[::-1]
    x_suffix = np.cumsum(x[::-1])[::-1]
    sum_xs = xt_suffix[taus] - taus * x_suffix[taus]

    k = taus.size
    gram = np.empty((k, 3, 3))
    gram[:, 0, 0] = n
    gram[:, 0, 1] = gram[:, 1, 0] = sum_t
    gram[:, 0, 2] = gram[:, 2, 0] = sum_s
    gram[:, 1, 1] = sum_t2
    gram[:, 1, 2] = gram[:, 2, 1] = sum_ts
    gram[:, 2, 2] = sum_s2
    rhs = np.empty((k, 3))
    rhs[:, 0] = sum_x
    rhs[:, 1] = sum_xt
    rhs[:, 2] = sum_xs
    coef = np.linalg.solve(gram, rhs[..., None])[..., 0]
    rss = sum_x2 - np.einsum("ij,ij->i", coef, rhs)
    return _gauss_loglik(n, float(max(np.min(rss), 0.0)))
