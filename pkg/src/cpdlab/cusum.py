"""CUSUM-type scan statistics for a single change in mean.

The scan works with the unit-norm step contrasts

    v_i = ( sqrt((n-i)/(i*n)) repeated i times,
           -sqrt(i/((n-i)*n)) repeated n-i times ),    i = 1, ..., n-1,

so that ``|v_i . x|`` measures the evidence for a mean shift directly
after position ``i`` (all positions are 1-based throughout this package).
Under i.i.d. Gaussian noise this is the likelihood-ratio statistic for a
change at ``i``, and the full scan maximises it over all ``i``.  A
dyadic-grid variant evaluates only O(log n) contrasts and loses at most
a fixed fraction of the peak response (see :func:`step_response`).

All functions are pure; the contrast matrix returned by
:func:`cusum_basis` is cached per length and marked read-only so it can
be shared across workers.
"""

from __future__ import annotations

import functools
import math

import numpy as np

__all__ = [
    "as_series",
    "cusum_basis",
    "cusum_transform",
    "cusum_statistic",
    "cusum_classify",
    "dyadic_grid",
    "cusum_star_statistic",
    "cusum_star_classify",
    "null_threshold",
    "snr_threshold",
    "snr_threshold_star",
    "misclassification_bound",
    "misclassification_bound_star",
    "snr",
    "step_response",
]


def as_series(x, min_len: int = 2) -> np.ndarray:
    """Validate and return ``x`` as a 1-D float64 array of length >= ``min_len``."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"series must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_len:
        raise ValueError(f"series must have length >= {min_len}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("series contains non-finite entries")
    return arr


@functools.lru_cache(maxsize=64)
def cusum_basis(n: int) -> np.ndarray:
    """Return the (n-1, n) matrix whose i-th row is the step contrast v_i.

    Rows are unit-norm, sum to zero, and are cached per ``n``.  The
    returned array is read-only; copy before mutating.
    """
    if n < 2:
        raise ValueError(f"basis needs length >= 2, got n={n}")
    i = np.arange(1, n, dtype=np.float64)[:, None]
    pos = np.sqrt((n - i) / (i * n))
    neg = -np.sqrt(i / ((n - i) * n))
    cols = np.arange(1, n + 1, dtype=np.float64)[None, :]
    basis = np.where(cols <= i, pos, neg)
    basis.flags.writeable = False
    return basis


def cusum_transform(x) -> np.ndarray:
    """Apply every step contrast to ``x``, returning the length n-1 scan vector.

    Evaluated in O(n) via prefix sums; entry ``i-1`` equals ``v_i . x``.
    The map is linear in ``x`` and annihilates constant shifts.
    """
    x = as_series(x)
    n = x.size
    s = np.cumsum(x)
    i = np.arange(1, n)
    head = s[:-1]
    tail = s[-1] - head
    return np.sqrt((n - i) / (i * n)) * head - np.sqrt(i / ((n - i) * n)) * tail


def cusum_statistic(x) -> tuple[float, int]:
    """Return ``(max_i |v_i . x|, argmax i)`` with the smallest i on ties."""
    t = np.abs(cusum_transform(x))
    k = int(np.argmax(t))
    return float(t[k]), k + 1


def cusum_classify(x, threshold: float) -> int:
    """Flag a mean change when the full scan strictly exceeds ``threshold``.

    Ties with the threshold classify as 0.
    """
    _check_threshold(threshold)
    return int(cusum_statistic(x)[0] > threshold)


@functools.lru_cache(maxsize=64)
def dyadic_grid(n: int) -> np.ndarray:
    """Return the sorted dyadic scan grid {2^q} | {n - 2^q}, q = 0..floor(log2(n/2)).

    Coinciding points are stored once, so the size is at most
    2*floor(log2(n)) and can be smaller (n=8 collapses the duplicate 4).
    """
    if n < 4:
        raise ValueError(f"dyadic grid needs length >= 4, got n={n}")
    q_max = (n // 2).bit_length() - 1
    points = {1 << q for q in range(q_max + 1)}
    points |= {n - (1 << q) for q in range(q_max + 1)}
    grid = np.array(sorted(points), dtype=np.int64)
    grid.flags.writeable = False
    return grid


def cusum_star_statistic(x) -> tuple[float, int]:
    """Return ``(max over the dyadic grid of |v_t . x|, argmax t)``."""
    x = as_series(x, min_len=4)
    grid = dyadic_grid(x.size)
    t = np.abs(cusum_transform(x)[grid - 1])
    k = int(np.argmax(t))
    return float(t[k]), int(grid[k])


def cusum_star_classify(x, threshold: float) -> int:
    """Dyadic-grid analogue of :func:`cusum_classify`."""
    _check_threshold(threshold)
    return int(cusum_star_statistic(x)[0] > threshold)


def null_threshold(n: int, eps: float) -> float:
    """Threshold sqrt(2 log(n/eps)) whose null exceedance probability is <= eps."""
    if n < 2:
        raise ValueError(f"need n >= 2, got n={n}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return math.sqrt(2.0 * math.log(n / eps))

def snr_threshold(n: int, snr_bound: float) -> float:
    """Full-scan threshold B*sqrt(n)/2 for problems with SNR 0 or > B."""
    _check_snr_args(n, snr_bound)
    return snr_bound * math.sqrt(n) / 2.0


def snr_threshold_star(n: int, snr_bound: float) -> float:
    """Dyadic-grid threshold B*sqrt(3n)/6 for problems with SNR 0 or > B."""
    _check_snr_args(n, snr_bound)
    return snr_bound * math.sqrt(3.0 * n) / 6.0


def misclassification_bound(n: int, snr_bound: float) -> float:
    """Risk bound n*exp(-n B^2/8) for the full scan at threshold B*sqrt(n)/2."""
    _check_snr_args(n, snr_bound)
    return n * math.exp(-n * snr_bound**2 / 8.0)


def misclassification_bound_star(n: int, snr_bound: float) -> float:
    """Risk bound 2*floor(log2 n)*exp(-n B^2/24) for the dyadic-grid scan.

    Only the scan-error term is computed; the training-complexity term of
    the corresponding generalisation bound carries an unspecified constant
    and is checked by Monte Carlo instead (see :mod:`cpdlab.evaluate`).
    """
    if n < 4:
        raise ValueError(f"need n >= 4, got n={n}")
    if snr_bound <= 0:
        raise ValueError(f"snr_bound must be positive, got {snr_bound}")
    return 2 * (n.bit_length() - 1) * math.exp(-n * snr_bound**2 / 24.0)


def snr(n: int, tau: int, mu_left: float, mu_right: float) -> float:
    """Signal-to-noise ratio |mu_L - mu_R| * sqrt(tau*(n-tau))/n of a mean change."""
    if not 1 <= tau <= n - 1:
        raise ValueError(f"tau must lie in [1, n-1], got tau={tau}, n={n}")
    return abs(mu_left - mu_right) * math.sqrt(tau * (n - tau)) / n


def step_response(n: int, tau: int, delta: float = 1.0) -> np.ndarray:
    """Noiseless scan response |v_i . mu| of a step of size ``delta`` at ``tau``.

    Closed form: the response rises like delta*(n-tau)*sqrt(i/(n(n-i)))
    up to the change and decays like delta*tau*sqrt((n-i)/(n i)) after it,
    peaking at i = tau with value delta*sqrt(tau*(n-tau)/n).  Entry ``i-1``
    of the returned vector is the response at scan position ``i``.
    """
    if not 1 <= tau <= n - 1:
        raise ValueError(f"tau must lie in [1, n-1], got tau={tau}, n={n}")
    i = np.arange(1, n, dtype=np.float64)
    rising = (n - tau) * np.sqrt(i / (n * (n - i)))
    falling = tau * np.sqrt((n - i) / (n * i))
    return abs(delta) * np.where(i <= tau, rising, falling)


def _check_threshold(threshold: float) -> None:
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")


def _check_snr_args(n: int, snr_bound: float) -> None:
    if n < 2:
        raise ValueError(f"need n >= 2, got n={n}")
    if snr_bound <= 0:
        raise ValueError(f"snr_bound must be positive, got {snr_bound}")
