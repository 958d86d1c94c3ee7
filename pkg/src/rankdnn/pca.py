"""PCA dimensionality reduction with a frozen fit and binary model files.

Fit once on the training split, then treat the model as frozen: transform
never refits.  The "RKPC" file layout (little-endian, no padding):

    magic    4 bytes  b"RKPC"
    version  u32      1
    in_dim   u32
    out_dim  u32
    mean     in_dim float32
    comps    out_dim*in_dim float32, row-major (one component per row)
    var      out_dim float32 (explained variance, non-increasing)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._binio import Reader, Writer
from .errors import DegenerateDataError, FormatError, InvalidArgumentError

MAGIC = b"RKPC"
VERSION = 1

_VARIANCE_FLOOR = 1e-24


@dataclass
class PcaModel:
    mean: np.ndarray                # (input_dim,)
    components: np.ndarray          # (output_dim, input_dim), orthonormal rows
    explained_variance: np.ndarray  # (output_dim,), non-negative, non-increasing

    @property
    def input_dim(self) -> int:
        return self.components.shape[1]

    @property
    def output_dim(self) -> int:
        return self.components.shape[0]


def fit_pca(vectors: np.ndarray, output_dim: int) -> PcaModel:
    """Eigendecompose the sample covariance and keep the top components.

    Components are rows, ordered by decreasing explained variance; each is
    sign-fixed so its largest-magnitude entry is positive.  Requires
    1 <= output_dim <= min(dim, n - 1).
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2:
        raise InvalidArgumentError("vectors must be a 2-D matrix")
    n, dim = vectors.shape
    if n < 2:
        raise InvalidArgumentError("need at least 2 vectors to fit")
    if not 1 <= output_dim <= min(dim, n - 1):
        raise InvalidArgumentError(
            f"output_dim must be in [1, {min(dim, n - 1)}], got {output_dim}"
        )
    mean = vectors.mean(axis=0)
    centered = vectors - mean
    cov = centered.T @ centered / (n - 1)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.clip(eigenvalues[order], 0.0, None)
    if eigenvalues.sum() <= _VARIANCE_FLOOR:
        raise DegenerateDataError("data has no variance to decompose")
    components = eigenvectors[:, order].T[:output_dim].copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return PcaModel(mean, components, eigenvalues[:output_dim])


def pca_transform(model: PcaModel, vectors: np.ndarray) -> np.ndarray:
    """Project onto the fitted components; accepts one vector or a matrix."""
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.shape[-1] != model.input_dim:
        raise InvalidArgumentError(
            f"expected dim {model.input_dim}, got {vectors.shape[-1]}"
        )
    return (vectors - model.mean) @ model.components.T


def l2_normalize(vectors: np.ndarray) -> np.ndarray:
    """Scale rows to unit L2 norm; zero rows are left unchanged."""
    vectors = np.asarray(vectors, dtype=np.float64)
    norms = np.linalg.norm(vectors, axis=-1, keepdims=True)
    return vectors / np.where(norms == 0.0, 1.0, norms)


def save_pca(model: PcaModel, path) -> None:
    writer = Writer(MAGIC)
    writer.u32(VERSION)
    writer.u32(model.input_dim)
    writer.u32(model.output_dim)
    writer.f32_array(model.mean)
    writer.f32_array(model.components)
    writer.f32_array(model.explained_variance)
    writer.to_file(path)


def load_pca(path) -> PcaModel:
    reader = Reader.from_file(path)
    reader.magic(MAGIC)
    reader.version(VERSION)
    input_dim = reader.u32()
    output_dim = reader.u32()
    if input_dim == 0:
        raise FormatError("in_dim", "must be >= 1")
    if output_dim == 0 or output_dim > input_dim:
        raise FormatError("out_dim", f"must be in [1, {input_dim}]")
    mean = reader.f32_array(input_dim)
    components = reader.f32_array(output_dim * input_dim).reshape(output_dim, input_dim)
    explained = reader.f32_array(output_dim)
    reader.done()
    return PcaModel(mean, components, explained)
