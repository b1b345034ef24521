"""Minimal multilayer perceptron with manual backpropagation.

All math is float64. The model is a flat parameter vector (weights row-major,
then biases, per layer) so optimizer steps and gradient checks are plain
vector arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, LabelError, ShapeError

_ACTIVATIONS = ("relu", "tanh")


@dataclass(frozen=True)
class Model:
    """Immutable MLP snapshot: layer sizes plus one flat parameter vector."""

    layer_dims: tuple[int, ...]
    params: np.ndarray
    activation: str = "relu"

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def num_classes(self) -> int:
        return self.layer_dims[-1]


@dataclass(frozen=True)
class LossConfig:
    smoothing: float = 0.0
    reduction: str = "mean"

    def __post_init__(self):
        if not 0.0 <= self.smoothing < 1.0:
            raise ConfigurationError(f"smoothing must be in [0, 1), got {self.smoothing}")
        if self.reduction not in ("sum", "mean"):
            raise ConfigurationError(f"reduction must be 'sum' or 'mean', got {self.reduction!r}")


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigurationError(f"learning_rate must be positive, got {self.learning_rate}")


def param_count(layer_dims) -> int:
    return sum(fi * fo + fo for fi, fo in zip(layer_dims[:-1], layer_dims[1:]))


def init_model(layer_dims, seed: int, activation: str = "relu") -> Model:
    """Kaiming-normal weights (std sqrt(2/fan_in)), zero biases.

    Deterministic in (layer_dims, seed); distinct seeds give distinct weights,
    which is what keeps two co-trained networks from collapsing into one.
    """
    dims = tuple(int(d) for d in layer_dims)
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise ConfigurationError(f"layer_dims needs >= 2 entries, all >= 1, got {dims}")
    if activation not in _ACTIVATIONS:
        raise ConfigurationError(f"activation must be one of {_ACTIVATIONS}, got {activation!r}")
    rng = np.random.default_rng(seed)
    chunks = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_out, fan_in))
        chunks.append(w.ravel())
        chunks.append(np.zeros(fan_out))
    return Model(layer_dims=dims, params=np.concatenate(chunks), activation=activation)


def unpack_params(model: Model) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split the flat vector back into per-layer (W, b) views."""
    layers = []
    off = 0
    for fan_in, fan_out in zip(model.layer_dims[:-1], model.layer_dims[1:]):
        w = model.params[off : off + fan_in * fan_out].reshape(fan_out, fan_in)
        off += fan_in * fan_out
        b = model.params[off : off + fan_out]
        off += fan_out
        layers.append((w, b))
    return layers


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    return np.maximum(z, 0.0) if kind == "relu" else np.tanh(z)


def _activate_grad(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return (z > 0.0).astype(float)
    return 1.0 - np.tanh(z) ** 2


def _forward_cached(model: Model, X: np.ndarray):
    """Forward pass keeping pre-activations and activations for backprop."""
    layers = unpack_params(model)
    a = X
    pre, acts = [], [X]
    for i, (w, b) in enumerate(layers):
        z = a @ w.T + b
        pre.append(z)
        a = z if i == len(layers) - 1 else _activate(z, model.activation)
        acts.append(a)
    return a, pre, acts


def _as_batch(X: np.ndarray, input_dim: int) -> tuple[np.ndarray, bool]:
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != input_dim:
        raise ShapeError(f"expected features of dim {input_dim}, got shape {X.shape}")
    return X, single


def forward(model: Model, x) -> np.ndarray:
    """Logits for one feature vector or a (n, input_dim) batch."""
    X, single = _as_batch(x, model.input_dim)
    logits, _, _ = _forward_cached(model, X)
    return logits[0] if single else logits


def predict(model: Model, x) -> np.ndarray:
    """Argmax class per row; ties resolve to the lowest class index."""
    return np.argmax(np.atleast_2d(forward(model, x)), axis=1)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def _smoothed_targets(y: np.ndarray, num_classes: int, smoothing: float) -> np.ndarray:
    # (1-eps) * one_hot + eps/C uniform; rows sum to 1.
    t = np.full((len(y), num_classes), smoothing / num_classes)
    t[np.arange(len(y)), y] += 1.0 - smoothing
    return t


def _check_labels(y, num_classes: int) -> np.ndarray:
    y = np.asarray(y, dtype=int)
    if y.ndim == 0:
        y = y[None]
    if y.size and (y.min() < 0 or y.max() >= num_classes):
        raise LabelError(f"labels must lie in [0, {num_classes}), got range [{y.min()}, {y.max()}]")
    return y


def per_example_losses(model: Model, X, y, cfg: LossConfig = LossConfig()) -> np.ndarray:
    """Softmax cross-entropy per row, against optionally smoothed targets."""
    X, _ = _as_batch(X, model.input_dim)
    y = _check_labels(y, model.num_classes)
    logits, _, _ = _forward_cached(model, X)
    z = logits - np.max(logits, axis=1, keepdims=True)
    log_probs = z - np.log(np.sum(np.exp(z), axis=1, keepdims=True))
    t = _smoothed_targets(y, model.num_classes, cfg.smoothing)
    return -np.sum(t * log_probs, axis=1)


def per_example_loss(model: Model, x, y: int, cfg: LossConfig = LossConfig()) -> float:
    return float(per_example_losses(model, np.atleast_2d(x), [y], cfg)[0])


def gradient(model: Model, X, y, cfg: LossConfig = LossConfig()) -> np.ndarray:
    """Gradient of the summed (or mean) batch loss w.r.t. the flat params."""
    X, _ = _as_batch(X, model.input_dim)
    y = _check_labels(y, model.num_classes)
    if len(X) == 0:
        raise ShapeError("gradient requires a non-empty batch")
    if len(X) != len(y):
        raise ShapeError(f"batch has {len(X)} rows but {len(y)} labels")
    logits, pre, acts = _forward_cached(model, X)
    t = _smoothed_targets(y, model.num_classes, cfg.smoothing)
    delta = softmax(logits) - t
    if cfg.reduction == "mean":
        delta = delta / len(X)
    layers = unpack_params(model)
    grads = [None] * (2 * len(layers))
    for i in range(len(layers) - 1, -1, -1):
        w, _ = layers[i]
        grads[2 * i] = (delta.T @ acts[i]).ravel()
        grads[2 * i + 1] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ w) * _activate_grad(pre[i - 1], model.activation)
    return np.concatenate(grads)


def sgd_step(model: Model, grad: np.ndarray, learning_rate: float) -> Model:
    grad = np.asarray(grad, dtype=float)
    if grad.shape != model.params.shape:
        raise ShapeError(f"grad shape {grad.shape} != params shape {model.params.shape}")
    return replace(model, params=model.params - learning_rate * grad)
