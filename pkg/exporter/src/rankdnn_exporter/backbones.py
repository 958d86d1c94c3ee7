"""Frozen convolutional backbones evaluated in numpy.

All backbones share one architecture: three 3x3 same-padding conv layers
with ReLU, 2x max pooling after the first two, and a global average pool,
so the feature dim equals the last layer's channel count.  Inference only;
there is no training code here.

Two weight sources exist:

  seeded       weights drawn once from a fixed, named RNG seed.  These are
               random-projection backbones: deterministic, self-contained,
               useful for plumbing and desk-scale experiments.
  file-backed  weights loaded from an .npz checkpoint (keys w1, b1, w2,
               b2, w3, b3) found in the weights directory, which is
               $RANKDNN_EXPORTER_WEIGHTS when set, else
               ~/.cache/rankdnn-exporter.

Every backbone uses the same published eval preprocessing: bilinear resize
to the working resolution, RGB scaled to [0, 1], then (x - 0.5) / 0.5 per
channel.  Exports record these constants in the sidecar.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import (InvalidArgumentError, MissingWeightsError,
                     WeightsFormatError)

_MEAN = (0.5, 0.5, 0.5)
_STD = (0.5, 0.5, 0.5)
_IN_CHANNELS = 3

# name -> (channel widths, weight source); the feature dim is the last width
_SEEDED = {
    "tiny64": ((16, 32, 64), 2301),
    "tiny640": ((16, 32, 640), 2302),
}
_FILE_BACKED = {
    "conv4-640": ((16, 32, 640), "conv4-640.npz"),
}
BACKBONE_NAMES = tuple(sorted(_SEEDED) + sorted(_FILE_BACKED))

_WEIGHT_KEYS = ("w1", "b1", "w2", "b2", "w3", "b3")


def weights_dir() -> Path:
    """Directory searched for file-backed checkpoints."""
    override = os.environ.get("RANKDNN_EXPORTER_WEIGHTS")
    if override:
        return Path(override)
    return Path("~/.cache/rankdnn-exporter").expanduser()


def init_cnn_weights(channels: tuple[int, int, int], seed: int) -> dict:
    """He-scaled float32 weights for the shared architecture.

    This is both the seeded-backbone generator and the documented .npz
    schema for file-backed checkpoints: w<k> has shape (3, 3, c_in, c_out)
    and b<k> has shape (c_out,)."""
    rng = np.random.default_rng(seed)
    weights = {}
    c_in = _IN_CHANNELS
    for layer, c_out in enumerate(channels, start=1):
        fan_in = 3 * 3 * c_in
        scale = np.sqrt(2.0 / fan_in)
        weights[f"w{layer}"] = (scale * rng.standard_normal(
            (3, 3, c_in, c_out))).astype(np.float32)
        weights[f"b{layer}"] = np.zeros(c_out, dtype=np.float32)
        c_in = c_out
    return weights


def _load_checkpoint(name: str, channels: tuple[int, int, int]) -> dict:
    filename = dict(_FILE_BACKED)[name][1]
    path = weights_dir() / filename
    if not path.is_file():
        raise MissingWeightsError(
            f"backbone {name!r} needs pretrained weights but {path} does "
            f"not exist. Download {filename} from your checkpoint store "
            f"(an .npz with keys {', '.join(_WEIGHT_KEYS)}; see README "
            f"section 'Pretrained weights') and place it there, or point "
            f"RANKDNN_EXPORTER_WEIGHTS at the directory holding it.")
    with np.load(path) as data:
        missing = [k for k in _WEIGHT_KEYS if k not in data.files]
        if missing:
            raise WeightsFormatError(
                f"{path} is missing arrays {missing}; expected keys "
                f"{_WEIGHT_KEYS}")
        weights = {k: np.asarray(data[k], dtype=np.float32)
                   for k in _WEIGHT_KEYS}
    c_in = _IN_CHANNELS
    for layer, c_out in enumerate(channels, start=1):
        w, b = weights[f"w{layer}"], weights[f"b{layer}"]
        if w.shape != (3, 3, c_in, c_out) or b.shape != (c_out,):
            raise WeightsFormatError(
                f"{path}: layer {layer} has shapes {w.shape}/{b.shape}, "
                f"expected {(3, 3, c_in, c_out)}/{(c_out,)}")
        c_in = c_out
    return weights


def _conv3(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """3x3 same-padding convolution on NHWC float32."""
    padded = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    windows = sliding_window_view(padded, (3, 3), axis=(1, 2))
    # windows: (batch, h, w, c_in, 3, 3); weights: (3, 3, c_in, c_out)
    out = np.einsum("bhwcij,ijco->bhwo", windows, w, optimize=True)
    return (out + b).astype(np.float32)


def _maxpool2(x: np.ndarray) -> np.ndarray:
    b, h, w, c = x.shape
    return x.reshape(b, h // 2, 2, w // 2, 2, c).max(axis=(2, 4))


@dataclass(frozen=True)
class Backbone:
    """A frozen feature extractor: name, dim, and eval preprocessing."""

    name: str
    dim: int
    default_resolution: int
    weights: dict = field(repr=False)
    mean: tuple = _MEAN
    std: tuple = _STD

    def preprocess(self, batch: np.ndarray) -> np.ndarray:
        """Normalize a float32 NHWC batch already scaled to [0, 1]."""
        mean = np.asarray(self.mean, dtype=np.float32)
        std = np.asarray(self.std, dtype=np.float32)
        return (batch - mean) / std

    def forward(self, batch: np.ndarray) -> np.ndarray:
        """Features for an unnormalized [0, 1] NHWC batch; (n, dim) f32."""
        x = self.preprocess(np.ascontiguousarray(batch, dtype=np.float32))
        w = self.weights
        x = _maxpool2(np.maximum(_conv3(x, w["w1"], w["b1"]), 0.0))
        x = _maxpool2(np.maximum(_conv3(x, w["w2"], w["b2"]), 0.0))
        x = np.maximum(_conv3(x, w["w3"], w["b3"]), 0.0)
        return x.mean(axis=(1, 2), dtype=np.float32)


def validate_resolution(resolution: int) -> None:
    """Two 2x pools need a multiple of 4; tiny inputs lose all geometry."""
    if resolution < 8 or resolution % 4 != 0:
        raise InvalidArgumentError(
            f"resolution must be a multiple of 4 and >= 8, got {resolution}")


def get_backbone(name: str) -> Backbone:
    """Resolve a backbone by name; file-backed names load their weights."""
    if name in _SEEDED:
        channels, seed = _SEEDED[name]
        weights = init_cnn_weights(channels, seed)
    elif name in _FILE_BACKED:
        channels = _FILE_BACKED[name][0]
        weights = _load_checkpoint(name, channels)
    else:
        raise InvalidArgumentError(
            f"unknown backbone {name!r}; available: {BACKBONE_NAMES}")
    return Backbone(name=name, dim=channels[-1], default_resolution=32,
                    weights=weights)
