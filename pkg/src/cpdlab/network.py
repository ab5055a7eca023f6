"""Feedforward ReLU networks that contain the CUSUM-type scans exactly.

A network here maps an input vector through ``L >= 1`` hidden layers of
shifted ReLUs, ``a -> max(W a - b, 0)``, then through a final linear
layer to a score.  Binary networks label ``1`` when the score strictly
exceeds the decision threshold; multiclass networks take the argmax.

:func:`embed_cusum` builds the exact network form of the CUSUM
classifier: one hidden unit per signed scan contrast with bias equal to
the scan threshold, and a summing output unit thresholded at zero.  The
sum of hinges is positive precisely when some contrast exceeds the
threshold, so the network and the direct classifier agree on every
input whose statistic is not exactly at the threshold.

Training minimises the cross-entropy of a logistic (or softmax) link on
the score with Adam; the hard threshold is evaluation-only since the
0-1 loss has no usable gradient.  Given a seed, initialisation, batch
order and therefore the trained network are fully deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .cusum import cusum_basis, dyadic_grid
from .robust import zscore_truncate

__all__ = [
    "Architecture",
    "Network",
    "TrainConfig",
    "Preprocessor",
    "TrainingError",
    "unit_scale",
    "lag_product",
    "forward",
    "predict_proba",
    "embed_cusum",
    "loss_and_gradient",
    "train",
    "grad_check",
    "network_to_json",
    "network_from_json",
]

SCHEMA_VERSION = 1


class TrainingError(RuntimeError):
    """Raised when optimisation produces non-finite losses or parameters."""


@dataclass(frozen=True)
class Architecture:
    """Shape of a network: input width, hidden widths, output width."""

    input_dim: int
    hidden: tuple[int, ...]
    output_dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(m) for m in self.hidden))
        if self.input_dim < 1 or self.output_dim < 1:
            raise ValueError("input and output dimensions must be >= 1")
        if len(self.hidden) < 1 or any(m < 1 for m in self.hidden):
            raise ValueError("need at least one hidden layer, all widths >= 1")

    @property
    def depth(self) -> int:
        return len(self.hidden)

    @property
    def layer_dims(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden, self.output_dim)


@dataclass(eq=False)
class Network:
    """Weights and biases of one ReLU network plus its decision rule.

    ``weights[l]`` maps layer ``l`` to layer ``l+1``; ``biases[l]`` is
    subtracted before the ReLU of hidden layer ``l+1``.  Binary networks
    (output width 1) decide ``score > threshold``; multiclass networks
    return ``classes[argmax score]`` with the smallest index on ties.
    """

    architecture: Architecture
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    output_bias: np.ndarray
    threshold: float = 0.0
    classes: tuple[int, ...] | None = None

    def __post_init__(self):
        dims = self.architecture.layer_dims
        if len(self.weights) != len(dims) - 1:
            raise ValueError(f"expected {len(dims) - 1} weight matrices, got {len(self.weights)}")
        for l, w in enumerate(self.weights):
            if w.shape != (dims[l + 1], dims[l]):
                raise ValueError(
                    f"weight {l} has shape {w.shape}, expected {(dims[l + 1], dims[l])}"
                )
        if len(self.biases) != self.architecture.depth:
            raise ValueError(f"expected {self.architecture.depth} bias vectors")
        for l, b in enumerate(self.biases):
            if b.shape != (dims[l + 1],):
                raise ValueError(f"bias {l} has shape {b.shape}, expected ({dims[l + 1]},)")
        if self.output_bias.shape != (dims[-1],):
            raise ValueError(f"output bias has shape {self.output_bias.shape}")
        for arr in (*self.weights, *self.biases, self.output_bias):
            if not np.all(np.isfinite(arr)):
                raise ValueError("network parameters contain non-finite values")

    @property
    def is_binary(self) -> bool:
        return self.architecture.output_dim == 1


@dataclass(frozen=True)
class TrainConfig:
    """Optimiser settings; the defaults are what the benchmark recipes use."""

    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    lr_decay: float = 0.0  # inverse time decay per epoch: lr / (1 + decay * epoch)

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if min(self.learning_rate, self.beta1, self.beta2, self.adam_eps) <= 0:
            raise ValueError("optimiser constants must be positive")
        if self.lr_decay < 0:
            raise ValueError("lr_decay must be >= 0")


def unit_scale(x) -> np.ndarray:
    """Rescale each series onto [0, 1]; constant input maps to all zeros.

    Works on a single series or row-wise on a matrix of series.  Because
    only min and max enter, the output is invariant to positive affine
    maps of the input, which makes downstream classifiers ignore level
    and scale.
    """
    x = np.asarray(x, dtype=np.float64)
    lo = x.min(axis=-1, keepdims=True)
    hi = x.max(axis=-1, keepdims=True)
    span = hi - lo
    safe = np.where(span == 0.0, 1.0, span)
    out = (x - lo) / safe
    return np.where(span == 0.0, 0.0, out)


def lag_product(x) -> np.ndarray:
    """Products of consecutive entries, length n-1 (row-wise on matrices)."""
    x = np.asarray(x, dtype=np.float64)
    return x[..., :-1] * x[..., 1:]


_STEP_NAMES = ("identity", "unit_scale", "square", "lag_product", "truncate")


@dataclass(frozen=True)
class Preprocessor:
    """Per-channel step pipelines applied to a raw series, then concatenated.

    Each channel is a tuple of steps from ``identity``, ``unit_scale``,
    ``square``, ``lag_product`` and ``("truncate", z)``, applied in
    order.  A channel whose pipeline contains ``lag_product`` comes out
    one entry short and is zero-padded on the right, so every channel
    contributes exactly ``n`` features.
    """

    channels: tuple[tuple, ...] = ((("unit_scale",),))

    def __post_init__(self):
        norm = []
        for channel in self.channels:
            steps = []
            for step in channel:
                if isinstance(step, str):
                    step = (step,)
                name = step[0]
                if name not in _STEP_NAMES:
                    raise ValueError(f"unknown preprocessing step {name!r}")
                if name == "truncate":
                    if len(step) != 2 or not float(step[1]) > 0:
                        raise ValueError("truncate step needs one positive parameter")
                    step = (name, float(step[1]))
                else:
                    step = (name,)
                steps.append(step)
            norm.append(tuple(steps))
        object.__setattr__(self, "channels", tuple(norm))

    def output_dim(self, n: int) -> int:
        return n * len(self.channels)

    def apply(self, x) -> np.ndarray:
        """Transform one series (or a matrix row-wise) into feature vectors."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        rows = x[None, :] if single else x
        n = rows.shape[1]
        parts = []
        for channel in self.channels:
            v = rows
            for step in channel:
                name = step[0]
                if name == "identity":
                    pass
                elif name == "unit_scale":
                    v = unit_scale(v)
                elif name == "square":
                    v = v**2
                elif name == "lag_product":
                    v = lag_product(v)
                else:
                    v = np.array([zscore_truncate(row, step[1]) for row in v])
            if v.shape[1] < n:
                pad = np.zeros((v.shape[0], n - v.shape[1]))
                v = np.hstack([v, pad])
            parts.append(v)
        out = np.hstack(parts)
        return out[0] if single else out

    def to_jsonable(self) -> list:
        return [[list(step) for step in channel] for channel in self.channels]

    @classmethod
    def from_jsonable(cls, data) -> "Preprocessor":
        return cls(tuple(tuple(tuple(step) for step in channel) for channel in data))


def _forward_pass(net: Network, X: np.ndarray):
    """Return hidden activations [a_0 .. a_L] and the output scores."""
    activations = [X]
    a = X
    for w, b in zip(net.weights[:-1], net.biases):
        a = np.maximum(a @ w.T - b, 0.0)
        activations.append(a)
    scores = a @ net.weights[-1].T - net.output_bias
    return activations, scores


def forward(net: Network, x):
    """Evaluate the network on one input or a batch of inputs.

    Returns ``(score, label)``.  For binary networks the score is the
    scalar pre-threshold output and ``label = 1{score > threshold}``;
    for multiclass networks the score is the logit vector and the label
    is the class with the largest logit (smallest index on ties).
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != net.architecture.input_dim:
        raise ValueError(
            f"input dimension {X.shape[1]} does not match network "
            f"input {net.architecture.input_dim}"
        )
    _, scores = _forward_pass(net, X)
    if net.is_binary:
        scores = scores[:, 0]
        labels = (scores > net.threshold).astype(np.int64)
    else:
        idx = np.argmax(scores, axis=1)
        if net.classes is not None:
            labels = np.asarray(net.classes, dtype=np.int64)[idx]
        else:
            labels = idx.astype(np.int64)
    if single:
        return (float(scores[0]) if net.is_binary else scores[0]), int(labels[0])
    return scores, labels


def predict_proba(net: Network, x):
    """Probability view of the scores: logistic for binary, softmax rows otherwise.

    This is the calibration used during training; the hard label rule of
    :func:`forward` is the evaluation-time decision.
    """
    scores, _ = forward(net, x)
    if net.is_binary:
        if np.ndim(scores) == 0:
            return float(_sigmoid(np.array([scores]))[0])
        return _sigmoid(scores)
    shift = scores - np.max(scores, axis=-1, keepdims=True)
    weights = np.exp(shift)
    return weights / weights.sum(axis=-1, keepdims=True)


def embed_cusum(n: int, threshold: float, variant: str = "full") -> Network:
    """Build the network that reproduces the CUSUM classifier exactly.

    The first layer stacks every scan contrast with both signs, each
    hidden unit biased by the scan threshold; the output unit sums the
    hinges and fires when the sum is positive.  ``variant="star"``
    restricts the contrasts to the dyadic grid, giving a hidden width of
    twice the grid size instead of 2n-2.
    """
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    if variant == "full":
        rows = np.array(cusum_basis(n))
    elif variant == "star":
        rows = np.array(cusum_basis(n))[dyadic_grid(n) - 1]
    else:
        raise ValueError(f"variant must be 'full' or 'star', got {variant!r}")
    width = 2 * rows.shape[0]
    arch = Architecture(n, (width,), 1)
    w0 = np.vstack([rows, -rows])
    b1 = np.full(width, float(threshold))
    w1 = np.ones((1, width))
    return Network(arch, [w0, w1], [b1], np.zeros(1), threshold=0.0)


def _sigmoid(s: np.ndarray) -> np.ndarray:
    out = np.empty_like(s)
    pos = s >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    e = np.exp(s[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _binary_loss(scores: np.ndarray, y: np.ndarray):
    """Mean logistic cross-entropy and d(loss)/d(score)."""
    s = scores
    loss = np.mean(np.logaddexp(0.0, s) - y * s)
    grad = (_sigmoid(s) - y) / s.size
    return float(loss), grad


def _softmax_loss(scores: np.ndarray, y_idx: np.ndarray):
    """Mean softmax cross-entropy (log-sum-exp stabilised) and gradient."""
    m = scores.shape[0]
    shift = scores - scores.max(axis=1, keepdims=True)
    log_z = np.log(np.sum(np.exp(shift), axis=1))
    loss = float(np.mean(log_z - shift[np.arange(m), y_idx]))
    grad = np.exp(shift) / np.exp(log_z)[:, None]
    grad[np.arange(m), y_idx] -= 1.0
    return loss, grad / m


def loss_and_gradient(net: Network, X, y):
    """Cross-entropy loss of a batch and its exact parameter gradient.

    ``y`` holds 0/1 labels for binary networks or class indices
    ``0..K-1`` for multiclass ones.  Returns ``(loss, (dW, db, d_ob))``
    with arrays shaped like the corresponding parameters.  Duplicated
    examples leave both loss and gradient unchanged (mean reduction).
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[0] == 0:
        raise ValueError("batch must be non-empty")
    y = np.asarray(y)
    activations, scores = _forward_pass(net, X)
    if net.is_binary:
        loss, dscore = _binary_loss(scores[:, 0], y.astype(np.float64))
        g = dscore[:, None]
    else:
        loss, g = _softmax_loss(scores, y.astype(np.int64))
    if not math.isfinite(loss):
        raise TrainingError(f"non-finite loss {loss!r}; inputs or parameters diverged")

    depth = net.architecture.depth
    d_weights = [None] * len(net.weights)
    d_biases = [None] * depth
    d_weights[-1] = g.T @ activations[-1]
    d_output_bias = -g.sum(axis=0)
    delta = g @ net.weights[-1]
    for l in range(depth, 0, -1):
        delta = delta * (activations[l] > 0)
        d_weights[l - 1] = delta.T @ activations[l - 1]
        d_biases[l - 1] = -delta.sum(axis=0)
        if l > 1:
            delta = delta @ net.weights[l - 1]
    return loss, (d_weights, d_biases, d_output_bias)


def _init_network(arch: Architecture, rng: np.random.Generator) -> Network:
    """Fan-scaled uniform weight init, zero biases."""
    weights = []
    dims = arch.layer_dims
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
    biases = [np.zeros(m) for m in arch.hidden]
    return Network(arch, weights, biases, np.zeros(arch.output_dim), threshold=0.0)


def train(X, y, arch: Architecture, config: TrainConfig = TrainConfig(),
          init: Network | None = None) -> Network:
    """Train a network on feature rows ``X`` with labels ``y``.

    Binary targets must be 0/1 and need ``output_dim == 1``; any other
    label set is trained with a softmax head over the sorted distinct
    labels, which must number ``output_dim``.  ``init`` (for example an
    :func:`embed_cusum` network) overrides the seeded random start.
    Everything downstream of ``config.seed`` is deterministic: same
    inputs and seed give a bit-identical network.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y)
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and y must have the same number of rows")
    if X.shape[0] == 0:
        raise ValueError("training set must be non-empty")
    if X.shape[1] != arch.input_dim:
        raise ValueError(f"feature dimension {X.shape[1]} != input_dim {arch.input_dim}")

    classes = None
    if arch.output_dim == 1:
        targets = y.astype(np.float64)
        if not np.all(np.isin(y, (0, 1))):
            raise ValueError("binary training labels must be 0 or 1")
    else:
        classes = tuple(int(c) for c in np.unique(y))
        if len(classes) != arch.output_dim:
            raise ValueError(
                f"{len(classes)} distinct labels but output_dim {arch.output_dim}"
            )
        lookup = {c: i for i, c in enumerate(classes)}
        targets = np.array([lookup[int(v)] for v in y], dtype=np.int64)

    if init is not None and init.architecture != arch:
        raise ValueError("init network architecture does not match arch")
    rng = np.random.default_rng(config.seed)
    net = init if init is not None else _init_network(arch, rng)
    params = [w.copy() for w in net.weights] + [b.copy() for b in net.biases]
    params.append(net.output_bias.copy())
    n_weights = len(net.weights)
    # The working network views the parameter arrays, so in-place Adam
    # updates are visible to every later gradient evaluation.
    current = Network(arch, params[:n_weights], params[n_weights:-1], params[-1],
                      threshold=0.0, classes=classes)

    m_state = [np.zeros_like(p) for p in params]
    v_state = [np.zeros_like(p) for p in params]
    step = 0
    n_rows = X.shape[0]
    for epoch in range(config.epochs):
        lr = config.learning_rate / (1.0 + config.lr_decay * epoch)
        order = rng.permutation(n_rows)
        for start in range(0, n_rows, config.batch_size):
            batch = order[start:start + config.batch_size]
            _, (d_w, d_b, d_ob) = loss_and_gradient(current, X[batch], targets[batch])
            grads = list(d_w) + list(d_b) + [d_ob]
            step += 1
            c1 = 1.0 - config.beta1**step
            c2 = 1.0 - config.beta2**step
            for p, g, m_vec, v_vec in zip(params, grads, m_state, v_state):
                m_vec *= config.beta1
                m_vec += (1.0 - config.beta1) * g
                v_vec *= config.beta2
                v_vec += (1.0 - config.beta2) * g * g
                p -= lr * (m_vec / c1) / (np.sqrt(v_vec / c2) + config.adam_eps)
        if not all(np.all(np.isfinite(p)) for p in params):
            raise TrainingError(f"parameters diverged in epoch {epoch}")
    return Network(arch, params[:n_weights], params[n_weights:-1], params[-1],
                   threshold=0.0, classes=classes)


def _loss_only(net: Network, X, y) -> float:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    _, scores = _forward_pass(net, X)
    if net.is_binary:
        return _binary_loss(scores[:, 0], np.asarray(y, dtype=np.float64))[0]
    return _softmax_loss(scores, np.asarray(y, dtype=np.int64))[0]


def grad_check(net: Network, x, y, step: float = 1e-5, kink_margin: float = 1e-6) -> float:
    """Largest deviation of the analytic gradient from central differences.

    Deviations are measured relative to ``max(1, |analytic|, |numeric|)``
    so near-zero entries are compared on an absolute scale.  Before
    checking, any hidden pre-activation within ``kink_margin`` of the
    ReLU kink is moved off it by shifting the corresponding bias, since
    a central difference across the kink measures the wrong one-sided
    slope.
    """
    if not 0 < step <= 1e-3:
        raise ValueError(f"step must lie in (0, 1e-3], got {step}")
    X = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y).reshape(-1)

    biases = [b.copy() for b in net.biases]
    net = replace(net, biases=biases)
    a = X
    for l, (w, b) in enumerate(zip(net.weights[:-1], biases)):
        z = a @ w.T - b
        near = np.abs(z) < kink_margin
        if np.any(near):
            b[np.any(near, axis=0)] -= 2.0 * kink_margin
            z = a @ w.T - b
        a = np.maximum(z, 0.0)

    _, (d_w, d_b, d_ob) = loss_and_gradient(net, X, y)
    analytic = list(d_w) + list(d_b) + [d_ob]
    params = list(net.weights) + list(net.biases) + [net.output_bias]
    worst = 0.0
    for p, g in zip(params, analytic):
        flat = p.reshape(-1)
        g_flat = g.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + step
            up = _loss_only(net, X, y)
            flat[i] = keep - step
            down = _loss_only(net, X, y)
            flat[i] = keep
            numeric = (up - down) / (2.0 * step)
            denom = max(1.0, abs(g_flat[i]), abs(numeric))
            worst = max(worst, abs(g_flat[i] - numeric) / denom)
    return worst


def network_to_json(net: Network, preprocessor: Preprocessor | None = None) -> str:
    """Serialise a network (and optional preprocessor) to versioned JSON.

    Floats are written with shortest round-trip decimals, so loading the
    string back yields bit-identical parameters.
    """
    payload = {
        "schema_version": SCHEMA_VERSION,
        "architecture": {
            "input_dim": net.architecture.input_dim,
            "hidden": list(net.architecture.hidden),
            "output_dim": net.architecture.output_dim,
        },
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
        "output_bias": net.output_bias.tolist(),
        "threshold": net.threshold,
        "classes": list(net.classes) if net.classes is not None else None,
    }
    if preprocessor is not None:
        payload["preprocessor"] = preprocessor.to_jsonable()
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def network_from_json(text: str):
    """Inverse of :func:`network_to_json`; returns ``(network, preprocessor)``."""
    payload = json.loads(text)
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported network schema version {version!r}")
    arch = Architecture(
        payload["architecture"]["input_dim"],
        tuple(payload["architecture"]["hidden"]),
        payload["architecture"]["output_dim"],
    )
    net = Network(
        arch,
        [np.asarray(w, dtype=np.float64) for w in payload["weights"]],
        [np.asarray(b, dtype=np.float64) for b in payload["biases"]],
        np.asarray(payload["output_bias"], dtype=np.float64),
        threshold=float(payload["threshold"]),
        classes=tuple(payload["classes"]) if payload.get("classes") is not None else None,
    )
    pre = payload.get("preprocessor")
    return net, (Preprocessor.from_jsonable(pre) if pre is not None else None)
