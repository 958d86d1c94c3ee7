"""Writer for the FVEC v1 feature-file format.

Implemented against the published byte layout rather than by importing the
consumer library; the file format is the contract between the two packages.

    b"RKDN" | u32 version=1 | u32 count | u32 dim | u32 labeled
            | count*dim float32 rows (row-major) | count u32 labels

All integers and floats are little-endian, no padding anywhere.  The
exporter always knows the class of every row, so it always writes the
labeled variant.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"RKDN"
VERSION = 1

_U32 = struct.Struct("<I")


def write_fvec(path, vectors: np.ndarray, labels: np.ndarray) -> None:
    """Write one labeled FVEC v1 file; overwrites path."""
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    labels = np.ascontiguousarray(labels, dtype="<u4")
    if vectors.ndim != 2:
        raise ValueError(f"vectors must be 2-d, got shape {vectors.shape}")
    if labels.shape != (vectors.shape[0],):
        raise ValueError("need exactly one label per row")
    count, dim = vectors.shape
    parts = [
        MAGIC,
        _U32.pack(VERSION),
        _U32.pack(count),
        _U32.pack(dim),
        _U32.pack(1),
        vectors.tobytes(),
        labels.tobytes(),
    ]
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))
