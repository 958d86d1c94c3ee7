"""Linear RankSVM baseline trained by stochastic subgradient descent.

Minimizes 0.5*||w||^2 + C * sum_i hinge(1 - y_i * w . z_i) over encoded
triplets z with labels y in {+1, -1}.  Training follows the standard
stochastic scheme for the equivalent scaled objective: with lambda = 1/(C*n)
the step at visit t is 1/(lambda*t), and the returned weight vector is the
average of the iterates.  Decisions are sign(w . z) with 0 mapped to -1.

The "RKSV" file layout: magic, version u32, dim u32, then w as dim float32.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._binio import Reader, Writer
from .encoding import EncodingScheme, encode_triplet_batch
from .errors import FormatError, InvalidArgumentError
from .sampler import LabeledTriplet, triplets_to_arrays

MAGIC = b"RKSV"
VERSION = 1


@dataclass
class SvmModel:
    w: np.ndarray

    @property
    def dim(self) -> int:
        return self.w.shape[0]


def svm_objective(w: np.ndarray, encoded: np.ndarray, labels: np.ndarray,
                  c: float) -> float:
    """0.5*||w||^2 + C * sum of hinge losses."""
    margins = labels * (encoded @ w)
    return float(0.5 * w @ w + c * np.sum(np.maximum(0.0, 1.0 - margins)))


def train_ranksvm(
    triplets: list[LabeledTriplet] | tuple,
    scheme: EncodingScheme,
    c: float = 1.0,
    epochs: int = 10,
    seed: int = 0,
) -> SvmModel:
    """Fit w on encoded triplets; accepts a triplet list or prebuilt arrays.

    Deterministic given seed: one shuffled pass over the data per epoch.
    """
    if c <= 0 or epochs < 1:
        raise InvalidArgumentError("c must be > 0 and epochs >= 1")
    if isinstance(triplets, (list,)):
        q, si, sj, labels = triplets_to_arrays(triplets)
        encoded = encode_triplet_batch(scheme, q, si, sj)
    else:
        encoded, labels = triplets
        encoded = np.asarray(encoded, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.float64)
    labels = labels.astype(np.float64)
    if not np.all(np.abs(labels) == 1.0):
        raise InvalidArgumentError("labels must be +1 or -1")
    n = encoded.shape[0]
    lam = 1.0 / (c * n)
    rng = np.random.default_rng(seed)
    w = np.zeros(encoded.shape[1])
    w_sum = np.zeros_like(w)
    t = 0
    for _ in range(epochs):
        for idx in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            active = labels[idx] * (encoded[idx] @ w) < 1.0
            w *= 1.0 - eta * lam  # equals (1 - 1/t)
            if active:
                w += (eta * labels[idx]) * encoded[idx]
            w_sum += w
    return SvmModel(w_sum / t)


def svm_decide(model: SvmModel, encoded: np.ndarray) -> np.ndarray:
    """Signed decision per row; a score of exactly 0 counts as -1."""
    encoded = np.asarray(encoded, dtype=np.float64)
    single = encoded.ndim == 1
    if single:
        encoded = encoded[None, :]
    if encoded.shape[1] != model.dim:
        raise InvalidArgumentError(f"expected dim {model.dim}, got {encoded.shape[1]}")
    decisions = np.where(encoded @ model.w > 0.0, 1, -1).astype(np.int64)
    return decisions[0] if single else decisions


def save_svm(model: SvmModel, path) -> None:
    writer = Writer(MAGIC)
    writer.u32(VERSION)
    writer.u32(model.dim)
    writer.f32_array(model.w)
    writer.to_file(path)


def load_svm(path) -> SvmModel:
    reader = Reader.from_file(path)
    reader.magic(MAGIC)
    reader.version(VERSION)
    dim = reader.u32()
    if dim == 0:
        raise FormatError("dim", "must be >= 1")
    w = reader.f32_array(dim)
    reader.done()
    return SvmModel(w)
