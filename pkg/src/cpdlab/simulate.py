"""Seeded generators for every synthetic benchmark used by the package.

Binary scenario datasets pair mean-change series against no-change noise
under four noise regimes:

    S1   independent standard Gaussian
    S1'  AR(1) with coefficient 0.7, Gaussian innovations
    S2   AR(1) with a fresh Unif[0,1] coefficient at every step,
         Gaussian innovations with variance 2
    S3   independent Cauchy(0, 0.3)

Change magnitudes scale with ``snr_base`` so detection stays neither
trivial nor hopeless across change locations; test-role datasets widen
the magnitude band.  The multiclass generator produces the five-way
mixture (no change / mean change / variance change / pure trend / slope
change) with parameters drawn from tabulated weak- or strong-signal
ranges.

Every generator is a pure function of its spec and seed.  Example ``k``
of a dataset is generated from the sub-seed ``SeedSequence(seed,
spawn_key=(k,))``, so any single example can be regenerated without
touching the others; the shuffle that mixes change and no-change halves
uses one extra sub-seed.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SCENARIOS",
    "ScenarioSpec",
    "MulticlassSpec",
    "LabeledDataset",
    "snr_base",
    "ar1_noise",
    "gen_scenario",
    "regenerate_example",
    "gen_changetype",
    "gen_multiclass",
    "gen_piecewise",
]

SCENARIOS = ("S1", "S1'", "S2", "S3")
_SCENARIO_ALIASES = {"s1": "S1", "s1'": "S1'", "s1p": "S1'", "s1prime": "S1'", "s2": "S2", "s3": "S3"}

# Parameter table for the multiclass mixture: value bounds are shared,
# the |difference| band depends on the signal regime.
_MEAN_BOUNDS = (-5.0, 5.0)
_SD_BOUNDS = (0.3, 0.7)
_SLOPE_BOUNDS = (-0.025, 0.025)
_DIFF_BANDS = {
    "weak": {"mean": (0.25, 0.5), "sd": (0.12, 0.24), "slope": (0.006, 0.012)},
    "strong": {"mean": (0.6, 1.2), "sd": (0.2, 0.4), "slope": (0.015, 0.03)},
}
MEAN_NOISE_SD = 0.7  # noise variance 0.49 for mean-change data
SLOPE_NOISE_SD = 0.5  # noise variance 0.25 for slope-change data

_MAX_REJECTION_DRAWS = 10**6


def canonical_scenario(name: str) -> str:
    key = str(name).lower()
    if key not in _SCENARIO_ALIASES:
        raise ValueError(f"unknown scenario {name!r}; expected one of {SCENARIOS}")
    return _SCENARIO_ALIASES[key]


@dataclass(frozen=True)
class ScenarioSpec:
    """Recipe for one binary scenario dataset."""

    scenario: str
    n: int = 100
    size: int = 700
    role: str = "train"

    def __post_init__(self):
        object.__setattr__(self, "scenario", canonical_scenario(self.scenario))
        if self.n < 4:
            raise ValueError(f"series length must be >= 4, got {self.n}")
        if self.size < 2 or self.size % 2:
            raise ValueError(f"dataset size must be even and >= 2, got {self.size}")
        if self.role not in ("train", "test"):
            raise ValueError(f"role must be 'train' or 'test', got {self.role!r}")

    @property
    def magnitude_band(self) -> tuple[float, float]:
        """Multiples of ``snr_base`` bounding |mu_right| for change examples."""
        return (0.5, 1.5) if self.role == "train" else (0.25, 1.75)


@dataclass(frozen=True)
class MulticlassSpec:
    """Recipe for the five-class change-type mixture.

    ``None`` range fields are filled from the tabulated values for
    ``regime``; explicit ranges must keep lower < upper.
    """

    regime: str
    n: int = 400
    per_class: int = 500
    margin: int = 40
    mean_bounds: tuple[float, float] = _MEAN_BOUNDS
    sd_bounds: tuple[float, float] = _SD_BOUNDS
    slope_bounds: tuple[float, float] = _SLOPE_BOUNDS
    mean_diff: tuple[float, float] | None = None
    sd_diff: tuple[float, float] | None = None
    slope_diff: tuple[float, float] | None = None

    def __post_init__(self):
        if self.regime not in _DIFF_BANDS:
            raise ValueError(f"regime must be 'weak' or 'strong', got {self.regime!r}")
        if self.per_class < 1:
            raise ValueError("per_class must be >= 1")
        if not 1 <= self.margin < self.n // 2:
            raise ValueError(f"margin must lie in [1, n/2), got {self.margin}")
        bands = _DIFF_BANDS[self.regime]
        for name, table_key in (("mean_diff", "mean"), ("sd_diff", "sd"), ("slope_diff", "slope")):
            value = getattr(self, name) or bands[table_key]
            lo, hi = value
            if not lo < hi:
                raise ValueError(f"{name} must satisfy lower < upper, got {value}")
            object.__setattr__(self, name, (float(lo), float(hi)))
        for name in ("mean_bounds", "sd_bounds", "slope_bounds"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name} must satisfy lower < upper")


@dataclass
class LabeledDataset:
    """Series matrix with labels and per-example generation metadata."""

    values: np.ndarray  # (N, n)
    labels: np.ndarray  # (N,), 0/1 binary or 1..5 multiclass
    metadata: list[dict] = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.values.ndim != 2:
            raise ValueError("values must be a 2-D matrix of series")
        if self.labels.shape != (self.values.shape[0],):
            raise ValueError("labels length must match the number of series")
        if len(self.metadata) != self.values.shape[0]:
            raise ValueError("metadata length must match the number of series")

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def fingerprint(self) -> str:
        """SHA-256 over shapes, labels and values; stable across processes."""
        digest = hashlib.sha256()
        digest.update(np.asarray(self.values.shape, dtype=np.int64).tobytes())
        digest.update(self.labels.tobytes())
        digest.update(np.ascontiguousarray(self.values).tobytes())
        return digest.hexdigest()


def snr_base(n: int, tau: int) -> float:
    """Magnitude unit sqrt(8 n log(20n) / (tau (n - tau))) for change draws.

    Symmetric in tau <-> n - tau and smallest at the midpoint, so changes
    near the boundary get proportionally larger shifts.
    """
    if not 1 <= tau <= n - 1:
        raise ValueError(f"tau must lie in [1, n-1], got tau={tau}, n={n}")
    return math.sqrt(8.0 * n * math.log(20.0 * n) / (tau * (n - tau)))


def ar1_noise(rho: np.ndarray, innovations: np.ndarray) -> np.ndarray:
    """Run the AR(1) recursion e_t = rho_t e_{t-1} + xi_t with e_1 = xi_1."""
    rho = np.asarray(rho, dtype=np.float64)
    xi = np.asarray(innovations, dtype=np.float64)
    if rho.shape != xi.shape:
        raise ValueError("rho and innovations must have equal length")
    if not np.any(rho):
        return xi.copy()
    eps = np.empty_like(xi)
    eps[0] = xi[0]
    for t in range(1, xi.size):
        eps[t] = rho[t] * eps[t - 1] + xi[t]
    return eps


def _scenario_noise(rng: np.random.Generator, n: int, scenario: str) -> np.ndarray:
    """Draw one noise path.  Draw order (rho, then innovations) is fixed."""
    if scenario == "S1":
        rho = np.zeros(n)
        xi = rng.standard_normal(n)
    elif scenario == "S1'":
        rho = np.full(n, 0.7)
        xi = rng.standard_normal(n)
    elif scenario == "S2":
        rho = rng.uniform(0.0, 1.0, n)
        xi = rng.standard_normal(n) * math.sqrt(2.0)
    elif scenario == "S3":
        rho = np.zeros(n)
        xi = rng.standard_cauchy(n) * 0.3
    else:  # pragma: no cover - spec validation prevents this
        raise ValueError(f"unknown scenario {scenario!r}")
    return ar1_noise(rho, xi)


def _example_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _scenario_example(spec: ScenarioSpec, seed: int, index: int, with_change: bool):
    rng = _example_rng(seed, index)
    n = spec.n
    meta = {"index": index, "scenario": spec.scenario, "role": spec.role, "tau": None, "mu_right": None}
    signal = np.zeros(n)
    if with_change:
        tau = int(rng.integers(2, n - 1))  # uniform on {2, ..., n-2}
        lo, hi = spec.magnitude_band
        b = snr_base(n, tau)
        magnitude = rng.uniform(lo * b, hi * b)
        sign = 1.0 if rng.integers(0, 2) else -1.0
        mu_right = sign * magnitude
        signal[tau:] = mu_right
        meta["tau"] = tau
        meta["mu_right"] = float(mu_right)
    values = signal + _scenario_noise(rng, n, spec.scenario)
    return values, int(with_change), meta


def gen_scenario(spec: ScenarioSpec, seed: int) -> LabeledDataset:
    """Generate a shuffled scenario dataset, half change and half no-change.

    Change examples draw tau uniformly on {2, ..., n-2}, keep the left
    mean at zero and draw the right mean as +/- Unif(band * snr_base);
    the no-change half is pure noise.  Deterministic given (spec, seed).
    """
    half = spec.size // 2
    rows, labels, metas = [], [], []
    for k in range(spec.size):
        values, label, meta = _scenario_example(spec, seed, k, with_change=k < half)
        rows.append(values)
        labels.append(label)
        metas.append(meta)
    order = np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(spec.size,))
    ).permutation(spec.size)
    values = np.asarray(rows)[order]
    labels = np.asarray(labels, dtype=np.int64)[order]
    metas = [metas[i] for i in order]
    return LabeledDataset(values, labels, metas)


def regenerate_example(spec: ScenarioSpec, seed: int, index: int):
    """Rebuild example ``index`` (pre-shuffle position) of a scenario dataset."""
    if not 0 <= index < spec.size:
        raise ValueError(f"index must lie in [0, {spec.size}), got {index}")
    return _scenario_example(spec, seed, index, with_change=index < spec.size // 2)


def _draw_in_band(rng, bounds, diff_band):
    """Draw a pair from Unif(bounds) with |difference| inside ``diff_band``."""
    lo, hi = bounds
    dlo, dhi = diff_band
    for _ in range(_MAX_REJECTION_DRAWS):
        a, b = rng.uniform(lo, hi, 2)
        if dlo <= abs(a - b) <= dhi:
            return float(a), float(b)
    raise RuntimeError(
        f"rejection sampling failed: no pair in {bounds} with |diff| in {diff_band} "
        f"after {_MAX_REJECTION_DRAWS} draws"
    )


def _kinked_line(n: int, tau: int, slope_left: float, slope_right: float, intercept: float = 0.0):
    """Continuous piecewise-linear mean: slope changes at tau, no jump."""
    t = np.arange(1, n + 1, dtype=np.float64)
    left = intercept + slope_left * t
    right = intercept + (slope_left - slope_right) * tau + slope_right * t
    return np.where(t <= tau, left, right)


def _tau_range(kind: str, n: int, margin: int) -> tuple[int, int]:
    if kind == "simultaneous":
        return 40, n - 41
    if kind == "ar_coeff":
        return 10, min(89, n - 2)
    return margin + 1, n - margin


def gen_changetype(kind: str, params: dict | None = None, seed: int = 0):
    """Generate one series of the requested change type.

    ``params`` may fix any of the generating quantities; everything left
    unset is drawn from the tabulated ranges for ``params['regime']``
    (default ``"strong"``).  Supported kinds: ``mean``, ``slope``,
    ``variance``, ``simultaneous`` (mean and variance jump together) and
    ``ar_coeff`` (autoregression coefficient steps 0.2 -> 0.8).

    Returns ``(series, metadata)`` where the metadata records every
    resolved parameter.  Explicit values outside the tabulated ranges
    raise ``ValueError``.
    """
    params = dict(params or {})
    regime = params.pop("regime", "strong")
    if regime not in _DIFF_BANDS:
        raise ValueError(f"regime must be 'weak' or 'strong', got {regime!r}")
    bands = _DIFF_BANDS[regime]
    n = int(params.pop("n", 100 if kind == "ar_coeff" else 400))
    margin = int(params.pop("margin", 40))
    rng = np.random.default_rng(seed)

    lo, hi = _tau_range(kind, n, margin)
    if not 1 <= lo <= hi <= n - 1:
        raise ValueError(f"no admissible change location for kind={kind!r}, n={n}")
    tau = params.pop("tau", None)
    tau = int(rng.integers(lo, hi + 1)) if tau is None else int(tau)
    if not lo <= tau <= hi:
        raise ValueError(f"tau={tau} outside admissible range [{lo}, {hi}]")

    meta = {"kind": kind, "regime": regime, "n": n, "tau": tau, "seed": seed}

    if kind == "mean":
        pair = _resolve_pair(params, rng, "mu_left", "mu_right", _MEAN_BOUNDS, bands["mean"])
        noise_sd = float(params.pop("noise_sd", MEAN_NOISE_SD))
        _no_leftover(params)
        signal = np.where(np.arange(1, n + 1) <= tau, pair[0], pair[1])
        x = signal + noise_sd * rng.standard_normal(n)
        meta.update(mu_left=pair[0], mu_right=pair[1], noise_sd=noise_sd,
                    change=pair[0] != pair[1])
    elif kind == "variance":
        pair = _resolve_pair(params, rng, "sd_left", "sd_right", _SD_BOUNDS, bands["sd"])
        _no_leftover(params)
        sd = np.where(np.arange(1, n + 1) <= tau, pair[0], pair[1])
        x = sd * rng.standard_normal(n)
        meta.update(sd_left=pair[0], sd_right=pair[1], mean=0.0, change=pair[0] != pair[1])
    elif kind == "slope":
        pair = _resolve_pair(params, rng, "slope_left", "slope_right", _SLOPE_BOUNDS, bands["slope"])
        noise_sd = float(params.pop("noise_sd", SLOPE_NOISE_SD))
        _no_leftover(params)
        x = _kinked_line(n, tau, *pair) + noise_sd * rng.standard_normal(n)
        meta.update(slope_left=pair[0], slope_right=pair[1], intercept=0.0,
                    noise_sd=noise_sd, change=pair[0] != pair[1])
    elif kind == "simultaneous":
        mu = _resolve_pair(params, rng, "mu_left", "mu_right", _MEAN_BOUNDS, bands["mean"])
        sd = _resolve_pair(params, rng, "sd_left", "sd_right", _SD_BOUNDS, bands["sd"])
        _no_leftover(params)
        before = np.arange(1, n + 1) <= tau
        x = np.where(before, mu[0], mu[1]) + np.where(before, sd[0], sd[1]) * rng.standard_normal(n)
        meta.update(mu_left=mu[0], mu_right=mu[1], sd_left=sd[0], sd_right=sd[1],
                    change=mu[0] != mu[1] or sd[0] != sd[1])
    elif kind == "ar_coeff":
        coef_left = float(params.pop("coef_left", 0.2))
        coef_right = float(params.pop("coef_right", 0.8))
        noise_sd = float(params.pop("noise_sd", 0.25))
        _no_leftover(params)
        if max(abs(coef_left), abs(coef_right)) >= 1.0:
            raise ValueError("autoregression coefficients must have modulus < 1")
        xi = noise_sd * rng.standard_normal(n)
        coef = np.where(np.arange(1, n + 1) < tau, coef_left, coef_right)
        x = np.empty(n)
        x[0] = xi[0]
        for t in range(1, n):
            x[t] = coef[t] * x[t - 1] + xi[t]
        meta.update(coef_left=coef_left, coef_right=coef_right, noise_sd=noise_sd,
                    change=coef_left != coef_right)
    else:
        raise ValueError(f"unknown change type {kind!r}")
    return x, meta


def _resolve_pair(params, rng, left_key, right_key, bounds, diff_band):
    """Draw or validate a before/after parameter pair.

    Explicitly equal values are allowed and mean "no change"; unequal
    explicit values must respect the regime's |difference| band.
    """
    left, right = params.pop(left_key, None), params.pop(right_key, None)
    if left is None and right is None:
        return _draw_in_band(rng, bounds, diff_band)
    if left is None or right is None:
        raise ValueError(f"{left_key} and {right_key} must be given together")
    left, right = float(left), float(right)
    lo, hi = bounds
    if not (lo <= left <= hi and lo <= right <= hi):
        raise ValueError(f"{left_key}/{right_key} must lie in [{lo}, {hi}]")
    dlo, dhi = diff_band
    if left != right and not dlo <= abs(left - right) <= dhi:
        raise ValueError(f"|{left_key} - {right_key}| must lie in [{dlo}, {dhi}]")
    return left, right


def _no_leftover(params: dict) -> None:
    if params:
        raise ValueError(f"unknown parameters: {sorted(params)}")


def gen_multiclass(spec: MulticlassSpec, seed: int) -> LabeledDataset:
    """Generate the five-class mixture with ``spec.per_class`` examples per class.

    Labels: 1 constant mean, 2 mean change, 3 variance change, 4 pure
    linear trend, 5 slope change.  Change locations are uniform on
    {margin+1, ..., n-margin}; parameters are redrawn per example with
    the |difference| constraints of the regime.
    """
    n, margin = spec.n, spec.margin
    total = 5 * spec.per_class
    t = np.arange(1, n + 1, dtype=np.float64)
    rows, labels, metas = [], [], []
    index = 0
    for label in (1, 2, 3, 4, 5):
        for _ in range(spec.per_class):
            rng = _example_rng(seed, index)
            meta = {"index": index, "label": label, "tau": None}
            if label in (2, 3, 5):
                tau = int(rng.integers(margin + 1, n - margin + 1))
                meta["tau"] = tau
            if label == 1:
                mu = float(rng.uniform(*spec.mean_bounds))
                x = mu + MEAN_NOISE_SD * rng.standard_normal(n)
                meta.update(mu=mu)
            elif label == 2:
                mu1, mu2 = _draw_in_band(rng, spec.mean_bounds, spec.mean_diff)
                x = np.where(t <= tau, mu1, mu2) + MEAN_NOISE_SD * rng.standard_normal(n)
                meta.update(mu_left=mu1, mu_right=mu2)
            elif label == 3:
                sd1, sd2 = _draw_in_band(rng, spec.sd_bounds, spec.sd_diff)
                x = np.where(t <= tau, sd1, sd2) * rng.standard_normal(n)
                meta.update(sd_left=sd1, sd_right=sd2)
            elif label == 4:
                slope = float(rng.uniform(*spec.slope_bounds))
                x = slope * t + SLOPE_NOISE_SD * rng.standard_normal(n)
                meta.update(slope=slope)
            else:
                s1, s2 = _draw_in_band(rng, spec.slope_bounds, spec.slope_diff)
                x = _kinked_line(n, tau, s1, s2) + SLOPE_NOISE_SD * rng.standard_normal(n)
                meta.update(slope_left=s1, slope_right=s2)
            rows.append(x)
            labels.append(label)
            metas.append(meta)
            index += 1
    order = np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(total,))
    ).permutation(total)
    values = np.asarray(rows)[order]
    labels = np.asarray(labels, dtype=np.int64)[order]
    metas = [metas[i] for i in order]
    return LabeledDataset(values, labels, metas)


def gen_piecewise(length: int, taus, means, noise_sd: float = 1.0, seed: int = 0,
                  min_spacing: int | None = None):
    """Piecewise-constant mean plus i.i.d. Gaussian noise.

    Segment r covers positions tau_{r-1}+1 .. tau_r (1-based, with
    tau_0 = 0 and tau_{nu+1} = length) at level ``means[r]``.  When
    ``min_spacing`` is given, every segment, including the two boundary
    segments, must span at least that many points; the downstream
    sliding-window localiser needs spacing >= twice its window length.

    Returns ``(series, metadata)``.
    """
    taus = [int(t) for t in taus]
    means = [float(m) for m in means]
    if len(means) != len(taus) + 1:
        raise ValueError(f"need len(means) == len(taus) + 1, got {len(means)} and {len(taus)}")
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("change locations must be strictly increasing")
    if taus and not (1 <= taus[0] and taus[-1] <= length - 1):
        raise ValueError(f"change locations must lie in [1, {length - 1}]")
    edges = [0, *taus, length]
    if min_spacing is not None:
        spacings = [b - a for a, b in zip(edges, edges[1:])]
        if min(spacings) < min_spacing:
            raise ValueError(
                f"segment spacing {min(spacings)} below required minimum {min_spacing}"
            )
    signal = np.empty(length)
    for level, (start, stop) in zip(means, zip(edges, edges[1:])):
        signal[start:stop] = level
    rng = np.random.default_rng(seed)
    series = signal + noise_sd * rng.standard_normal(length)
    meta = {"taus": taus, "means": means, "noise_sd": float(noise_sd), "seed": int(seed)}
    return series, meta
