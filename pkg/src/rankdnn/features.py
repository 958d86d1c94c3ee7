"""Labeled feature-vector sets: synthesis, class splits, and binary file I/O.

The on-disk format ("RKDN") is a flat little-endian layout:

    magic    4 bytes  b"RKDN"
    version  u32      1
    count    u32      number of vectors
    dim      u32      entries per vector
    labeled  u32      1 if a label block follows the vectors, else 0
    vectors  count*dim float32, row-major
    labels   count u32, only when labeled == 1

Vectors are stored as float32 and widened to float64 in memory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._binio import Reader, Writer
from .errors import FormatError, InvalidArgumentError

MAGIC = b"RKDN"
VERSION = 1


def _as_float32_exact(vectors: np.ndarray) -> np.ndarray:
    # Files hold float32; snapping here keeps write -> read an exact identity.
    return vectors.astype(np.float32).astype(np.float64)


class FeatureSet:
    """An (n, dim) float64 matrix of feature vectors with integer class labels."""

    def __init__(self, vectors, labels):
        vectors = np.asarray(vectors, dtype=np.float64)
        labels = np.asarray(labels)
        if vectors.ndim != 2 or vectors.shape[1] < 1:
            raise InvalidArgumentError("vectors must be a non-empty 2-D matrix")
        if not np.all(np.isfinite(vectors)):
            raise InvalidArgumentError("vectors must be finite")
        if labels.ndim != 1 or labels.shape[0] != vectors.shape[0]:
            raise InvalidArgumentError("labels must be 1-D and match vector count")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            raise InvalidArgumentError("labels must be integers")
        labels = labels.astype(np.int64)
        if labels.size and labels.min() < 0:
            raise InvalidArgumentError("labels must be non-negative")
        self.vectors = vectors
        self.labels = labels
        self.class_index = {
            int(c): np.flatnonzero(labels == c) for c in np.unique(labels)
        }

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def classes(self) -> list[int]:
        return sorted(self.class_index)

    def subset(self, rows) -> "FeatureSet":
        rows = np.asarray(rows)
        return FeatureSet(self.vectors[rows], self.labels[rows])


@dataclass
class SyntheticSpec:
    """Parameters for the Gaussian class-cluster generators."""

    num_classes: int
    per_class: int
    dim: int
    center_scale: float
    noise_sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.num_classes < 1 or self.per_class < 1 or self.dim < 1:
            raise InvalidArgumentError("num_classes, per_class, dim must be >= 1")
        if self.center_scale <= 0 or self.noise_sigma <= 0:
            raise InvalidArgumentError("center_scale and noise_sigma must be > 0")


def generate_synthetic(spec: SyntheticSpec) -> FeatureSet:
    """Draw isotropic Gaussian class clusters.

    Class centers come from a standard normal scaled by center_scale (drawn
    once), samples add isotropic noise scaled by noise_sigma.  Deterministic
    given spec.seed; labels are dense 0..num_classes-1, class-major order.
    """
    rng = np.random.default_rng(spec.seed)
    centers = rng.standard_normal((spec.num_classes, spec.dim)) * spec.center_scale
    noise = rng.standard_normal((spec.num_classes * spec.per_class, spec.dim))
    vectors = np.repeat(centers, spec.per_class, axis=0) + noise * spec.noise_sigma
    labels = np.repeat(np.arange(spec.num_classes), spec.per_class)
    return FeatureSet(_as_float32_exact(vectors), labels)


def generate_mirrored(
    spec: SyntheticSpec,
    *,
    flip_scale: float = 0.4,
    flip_prob: float = 0.5,
    radius_lo: float = 1.0,
    radius_hi: float = 1.0,
    active_coords: int = 0,
    scale_ladder: float = 1.0,
) -> FeatureSet:
    """Draw a deliberately nonlinear task: mirrored-scale class rays.

    Each class is a fixed direction; every sample sits on its class ray at a
    signed scale kappa, -flip_scale with probability flip_prob and +1
    otherwise, times a uniform radius from [radius_lo, radius_hi].  In-ray
    noise (noise_sigma, relative to the center norm) is added before scaling,
    so samples stay on the scaled-cluster model exactly.

    Same-class dot products then interleave in sign and magnitude: (+,+)
    pairs land near +1, (-,-) pairs near +flip_scale^2, and mixed pairs near
    -flip_scale (relative units).  At the default fair coin a zero-threshold
    linear scorer over products nets exactly half of clean comparisons -- the
    sign alone carries no match information -- while the magnitude ladder
    stays separable by carving intervals, so learners that can express band
    thresholds solve the task.  Per-coordinate comparators see the same
    cancellation plus radius jitter on top.

    flip_prob = 1/(1+flip_scale) zeroes the mean of kappa instead, which
    removes the residual same-class correlation E[kappa kappa'] > 0 that the
    fair coin leaves behind; second-moment statistics of any fixed linear
    probe are then identical for matched and mismatched pairs.

    active_coords > 0 makes centers sign patterns (+-1/sqrt(a)) on that many
    coordinates instead of dense Gaussian directions; centers have norm
    center_scale either way, up to chi spread in the dense case.  With
    active_coords == dim every coordinate magnitude is identical across
    classes, so class identity sits in the signs alone and per-coordinate
    magnitude templates carry nothing.

    scale_ladder > 1 multiplies coordinate t by a deterministic factor
    rising linearly from 1 to scale_ladder.  The distinct per-coordinate
    variances pin the PCA rotation to the coordinate axes, so properties
    arranged per-coordinate (such as the flat magnitude template above)
    survive the reduction instead of leaking through an arbitrary basis.
    """
    if not 0.0 < flip_scale < 1.0:
        raise InvalidArgumentError("flip_scale must be in (0, 1)")
    if not 0.0 < flip_prob < 1.0:
        raise InvalidArgumentError("flip_prob must be in (0, 1)")
    if not 0.0 < radius_lo <= radius_hi:
        raise InvalidArgumentError("need 0 < radius_lo <= radius_hi")
    if active_coords < 0 or active_coords > spec.dim:
        raise InvalidArgumentError("active_coords must be in [0, dim]")
    if scale_ladder < 1.0:
        raise InvalidArgumentError("scale_ladder must be >= 1")
    rng = np.random.default_rng(spec.seed)
    if active_coords:
        centers = np.zeros((spec.num_classes, spec.dim))
        for c in range(spec.num_classes):
            idx = rng.choice(spec.dim, active_coords, replace=False)
            centers[c, idx] = rng.choice(
                [-1.0, 1.0], active_coords
            ) / np.sqrt(active_coords)
        centers *= spec.center_scale
    else:
        centers = rng.standard_normal(
            (spec.num_classes, spec.dim)
        ) * spec.center_scale / np.sqrt(spec.dim)
    n = spec.num_classes * spec.per_class
    labels = np.repeat(np.arange(spec.num_classes), spec.per_class)
    if flip_prob == 0.5:
        # integer draw kept on the default path so existing seeds reproduce
        flips = rng.integers(0, 2, size=n)
    else:
        flips = rng.random(n) < flip_prob
    kappa = np.where(flips == 0, 1.0, -flip_scale)
    radius = rng.uniform(radius_lo, radius_hi, size=n)
    noise = rng.standard_normal((n, spec.dim)) * (
        spec.center_scale * spec.noise_sigma / np.sqrt(spec.dim)
    )
    vectors = (kappa * radius)[:, None] * (centers[labels] + noise)
    if scale_ladder > 1.0:
        vectors *= np.linspace(1.0, scale_ladder, spec.dim)
    return FeatureSet(_as_float32_exact(vectors), labels)


def split_by_class(feature_set: FeatureSet, *parts) -> tuple[FeatureSet, ...]:
    """Split into disjoint FeatureSets by class.

    Each part is either an explicit sequence of class ids or an int; ints
    consume that many classes from the remaining ones in ascending order.
    Parts must not overlap and must leave nothing over-committed.
    """
    remaining = list(feature_set.classes)
    resolved: list[list[int]] = []
    taken: set[int] = set()
    for part in parts:
        if isinstance(part, (int, np.integer)):
            if part < 0 or part > len(remaining):
                raise InvalidArgumentError(
                    f"cannot take {part} classes, {len(remaining)} remain"
                )
            chosen = remaining[: int(part)]
        else:
            chosen = [int(c) for c in part]
            missing = [c for c in chosen if c not in feature_set.class_index]
            if missing:
                raise InvalidArgumentError(f"unknown classes: {missing}")
            if any(c in taken for c in chosen):
                raise InvalidArgumentError("class parts overlap")
        taken.update(chosen)
        remaining = [c for c in remaining if c not in taken]
        resolved.append(chosen)
    out = []
    for chosen in resolved:
        rows = np.concatenate(
            [feature_set.class_index[c] for c in chosen]
        ) if chosen else np.empty(0, dtype=np.int64)
        out.append(feature_set.subset(rows))
    return tuple(out)


def write_feature_set(feature_set: FeatureSet, path) -> None:
    writer = Writer(MAGIC)
    writer.u32(VERSION)
    writer.u32(feature_set.count)
    writer.u32(feature_set.dim)
    writer.u32(1)
    writer.f32_array(feature_set.vectors)
    writer.u32_array(feature_set.labels)
    writer.to_file(path)


def read_feature_set(path) -> FeatureSet:
    reader = Reader.from_file(path)
    reader.magic(MAGIC)
    reader.version(VERSION)
    count = reader.u32()
    dim = reader.u32()
    labeled = reader.u32()
    if dim == 0:
        raise FormatError("dim", "must be >= 1")
    if labeled not in (0, 1):
        raise FormatError("labeled", f"must be 0 or 1, found {labeled}")
    vectors = reader.f32_array(count * dim).reshape(count, dim)
    if labeled:
        labels = reader.u32_array(count)
    else:
        labels = np.zeros(count, dtype=np.int64)
    reader.done()
    return FeatureSet(vectors, labels)
