"""A from-scratch MLP ranking head: forward, BCE loss, backprop, SGD momentum.

Architecture: affine + ReLU hidden layers, affine + logistic sigmoid output
(final width must be 1).  Parameters and math are float64 in memory; the
"RKML" checkpoint stores float32 and excludes optimizer state:

    magic    4 bytes  b"RKML"
    version  u32      1
    n_dims   u32      len(layer_dims)
    dims     n_dims u32
    per affine layer: weights (out*in float32, row-major), then biases (out)

The SGD update per parameter tensor p with gradient g is

    v <- momentum * v + g + weight_decay * p
    p <- p - learning_rate * v
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._binio import Reader, Writer
from .errors import FormatError, InvalidArgumentError, TrainingDivergedError

MAGIC = b"RKML"
VERSION = 1

_PROB_EPS = 1e-12


@dataclass
class MlpConfig:
    layer_dims: tuple[int, ...]
    learning_rate: float = 0.0005
    momentum: float = 0.9
    weight_decay: float = 1e-6
    seed: int = 0
    clip_norm: float | None = None

    def __post_init__(self):
        self.layer_dims = tuple(int(d) for d in self.layer_dims)
        if len(self.layer_dims) < 2:
            raise InvalidArgumentError("need at least an input and an output layer")
        if any(d < 1 for d in self.layer_dims):
            raise InvalidArgumentError("layer dims must be >= 1")
        if self.layer_dims[-1] != 1:
            raise InvalidArgumentError("output layer must have width 1")
        if self.learning_rate <= 0:
            raise InvalidArgumentError("learning_rate must be > 0")


@dataclass
class MlpModel:
    config: MlpConfig
    weights: list[np.ndarray] = field(repr=False)    # per layer, (out, in)
    biases: list[np.ndarray] = field(repr=False)     # per layer, (out,)
    velocity_w: list[np.ndarray] = field(repr=False)
    velocity_b: list[np.ndarray] = field(repr=False)

    @property
    def input_dim(self) -> int:
        return self.config.layer_dims[0]


def init_mlp(config: MlpConfig) -> MlpModel:
    """Weights uniform in +-sqrt(6 / fan_in), biases and velocity zero."""
    rng = np.random.default_rng(config.seed)
    weights, biases, vel_w, vel_b = [], [], [], []
    for fan_in, fan_out in zip(config.layer_dims[:-1], config.layer_dims[1:]):
        bound = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
        vel_w.append(np.zeros((fan_out, fan_in)))
        vel_b.append(np.zeros(fan_out))
    return MlpModel(config, weights, biases, vel_w, vel_b)


def clone_mlp(model: MlpModel, **config_overrides) -> MlpModel:
    """Copy parameters into a fresh model with zeroed optimizer state."""
    cfg_kwargs = {
        "layer_dims": model.config.layer_dims,
        "learning_rate": model.config.learning_rate,
        "momentum": model.config.momentum,
        "weight_decay": model.config.weight_decay,
        "seed": model.config.seed,
        "clip_norm": model.config.clip_norm,
    }
    cfg_kwargs.update(config_overrides)
    config = MlpConfig(**cfg_kwargs)
    return MlpModel(
        config,
        [w.copy() for w in model.weights],
        [b.copy() for b in model.biases],
        [np.zeros_like(w) for w in model.weights],
        [np.zeros_like(b) for b in model.biases],
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # Split by sign so exp never overflows.
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward_cached(model: MlpModel, batch: np.ndarray):
    """Returns (probs, pre_activations, activations); raises on explosion."""
    activations = [batch]
    pre = []
    a = batch
    with np.errstate(over="ignore", invalid="ignore"):
        for idx, (w, b) in enumerate(zip(model.weights, model.biases)):
            z = a @ w.T + b
            if not np.all(np.isfinite(z)):
                raise TrainingDivergedError(idx, "non-finite pre-activations")
            pre.append(z)
            if idx < len(model.weights) - 1:
                a = np.maximum(z, 0.0)
                activations.append(a)
    probs = np.clip(_sigmoid(pre[-1][:, 0]), _PROB_EPS, 1.0 - _PROB_EPS)
    return probs, pre, activations


def _check_batch(model: MlpModel, batch) -> np.ndarray:
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != model.input_dim:
        raise InvalidArgumentError(
            f"batch must be (n, {model.input_dim}), got {batch.shape}"
        )
    if not np.all(np.isfinite(batch)):
        raise InvalidArgumentError("batch contains non-finite values")
    return batch


def forward(model: MlpModel, batch) -> np.ndarray:
    """Probability per row, strictly inside (0, 1)."""
    batch = _check_batch(model, batch)
    probs, _, _ = _forward_cached(model, batch)
    return probs


def bce_loss(probs, labels) -> float:
    """Mean binary cross-entropy; probabilities clamped to [1e-12, 1 - 1e-12]."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if probs.shape != labels.shape or probs.ndim != 1 or probs.size == 0:
        raise InvalidArgumentError("probs and labels must be equal-length 1-D")
    if not np.all((labels == 0.0) | (labels == 1.0)):
        raise InvalidArgumentError("labels must be 0 or 1")
    p = np.clip(probs, _PROB_EPS, 1.0 - _PROB_EPS)
    return float(-np.mean(labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p)))


def loss_gradients(model: MlpModel, batch, labels):
    """Backprop; returns (loss, weight grads, bias grads).

    Uses the composite sigmoid+BCE gradient (p - y) / n at the output, ReLU
    masks on the hidden layers.  Raises TrainingDivergedError (with the
    offending affine layer index) if anything non-finite appears.
    """
    batch = _check_batch(model, batch)
    labels = np.asarray(labels, dtype=np.float64)
    probs, pre, activations = _forward_cached(model, batch)
    loss = bce_loss(probs, labels)
    n = batch.shape[0]
    delta = ((probs - labels) / n)[:, None]
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.weights)
    for idx in range(len(model.weights) - 1, -1, -1):
        grads_w[idx] = delta.T @ activations[idx]
        grads_b[idx] = delta.sum(axis=0)
        if not (
            np.all(np.isfinite(grads_w[idx])) and np.all(np.isfinite(grads_b[idx]))
        ):
            raise TrainingDivergedError(idx, "non-finite gradients")
        if idx > 0:
            delta = (delta @ model.weights[idx]) * (pre[idx - 1] > 0.0)
    return loss, grads_w, grads_b


def train_step(model: MlpModel, batch, labels) -> float:
    """One SGD-momentum update in place; returns the pre-update loss."""
    loss, grads_w, grads_b = loss_gradients(model, batch, labels)
    cfg = model.config
    if cfg.clip_norm is not None:
        total = np.sqrt(
            sum(float(np.sum(g * g)) for g in grads_w)
            + sum(float(np.sum(g * g)) for g in grads_b)
        )
        if total > cfg.clip_norm:
            scale = cfg.clip_norm / total
            grads_w = [g * scale for g in grads_w]
            grads_b = [g * scale for g in grads_b]
    for idx in range(len(model.weights)):
        vw = model.velocity_w[idx]
        vw *= cfg.momentum
        vw += grads_w[idx] + cfg.weight_decay * model.weights[idx]
        model.weights[idx] -= cfg.learning_rate * vw
        vb = model.velocity_b[idx]
        vb *= cfg.momentum
        vb += grads_b[idx] + cfg.weight_decay * model.biases[idx]
        model.biases[idx] -= cfg.learning_rate * vb
        if not (
            np.all(np.isfinite(model.weights[idx]))
            and np.all(np.isfinite(model.biases[idx]))
        ):
            raise TrainingDivergedError(idx, "non-finite parameters after update")
    return loss


def param_count(model_or_dims) -> int:
    """Total learnable parameters: sum over layers of in*out + out."""
    if isinstance(model_or_dims, MlpModel):
        return sum(w.size + b.size for w, b in zip(model_or_dims.weights,
                                                   model_or_dims.biases))
    dims = tuple(int(d) for d in model_or_dims)
    if len(dims) < 2:
        raise InvalidArgumentError("need at least two layer dims")
    return sum(i * o + o for i, o in zip(dims[:-1], dims[1:]))


def save_mlp(model: MlpModel, path) -> None:
    writer = Writer(MAGIC)
    writer.u32(VERSION)
    writer.u32(len(model.config.layer_dims))
    for d in model.config.layer_dims:
        writer.u32(d)
    for w, b in zip(model.weights, model.biases):
        writer.f32_array(w)
        writer.f32_array(b)
    writer.to_file(path)


def load_mlp(path, **config_overrides) -> MlpModel:
    """Load a checkpoint; optimizer state starts at zero.

    Hyperparameters are not stored in the file; pass config overrides
    (learning_rate etc.) if the defaults are not wanted.
    """
    reader = Reader.from_file(path)
    reader.magic(MAGIC)
    reader.version(VERSION)
    n_dims = reader.u32()
    if n_dims < 2:
        raise FormatError("n_dims", "need at least two layer dims")
    dims = tuple(reader.u32() for _ in range(n_dims))
    if any(d == 0 for d in dims):
        raise FormatError("dims", "layer dims must be >= 1")
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(reader.f32_array(fan_out * fan_in).reshape(fan_out, fan_in))
        biases.append(reader.f32_array(fan_out))
    reader.done()
    config = MlpConfig(layer_dims=dims, **config_overrides)
    return MlpModel(
        config,
        weights,
        biases,
        [np.zeros_like(w) for w in weights],
        [np.zeros_like(b) for b in biases],
    )
