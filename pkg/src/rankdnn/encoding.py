"""Pair and triplet encodings for relevance ranking.

A triplet (query q, support i, support j) asks "is i more relevant to q than
j?".  Difference schemes encode the two (query, support) pairs and subtract,
so they are antisymmetric in (i, j) by construction:

    kronecker             flat(outer(q, i)) - flat(outer(q, j))
    hadamard              q*i - q*j
    disparity             |q - i| - |q - j|
    combined              [kronecker ; hadamard] pair blocks, subtracted
    pairwise_concat_diff  [q ; i] - [q ; j]   (degenerate: query cancels)
    triple_concat         [q ; i ; j]         (not a difference; known-divergent)

Kronecker flattening is row-major with the query index major: entry a*d + b
holds q[a] * s[b].
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import InvalidArgumentError, UnsupportedSchemeError


class EncodingScheme(str, Enum):
    KRONECKER = "kronecker"
    HADAMARD = "hadamard"
    DISPARITY = "disparity"
    COMBINED = "combined"
    TRIPLE_CONCAT = "triple_concat"
    PAIRWISE_CONCAT_DIFF = "pairwise_concat_diff"


#: Schemes that encode a single (query, support) pair.
PAIR_SCHEMES = (
    EncodingScheme.KRONECKER,
    EncodingScheme.HADAMARD,
    EncodingScheme.COMBINED,
)


def scheme_from_name(name: str) -> EncodingScheme:
    """Accepts both dashed CLI spellings and underscored values."""
    try:
        return EncodingScheme(name.replace("-", "_").lower())
    except ValueError:
        valid = ", ".join(s.value.replace("_", "-") for s in EncodingScheme)
        raise InvalidArgumentError(f"unknown scheme '{name}' (one of: {valid})")


def encoded_dim(scheme: EncodingScheme, feature_dim: int) -> int:
    """Width of the encoded vector for feature dimension d."""
    if feature_dim < 1:
        raise InvalidArgumentError("feature_dim must be >= 1")
    d = feature_dim
    return {
        EncodingScheme.KRONECKER: d * d,
        EncodingScheme.HADAMARD: d,
        EncodingScheme.DISPARITY: d,
        EncodingScheme.COMBINED: d * d + d,
        EncodingScheme.TRIPLE_CONCAT: 3 * d,
        EncodingScheme.PAIRWISE_CONCAT_DIFF: 2 * d,
    }[scheme]


def _check_vectors(*vectors) -> int:
    dim = None
    for v in vectors:
        if v.ndim != 1:
            raise InvalidArgumentError("expected 1-D feature vectors")
        if dim is None:
            dim = v.shape[0]
        elif v.shape[0] != dim:
            raise InvalidArgumentError("feature vectors must share one dim")
    return dim


def encode_pair(scheme: EncodingScheme, query, support) -> np.ndarray:
    """Encode one (query, support) pair; triplet-native schemes reject this."""
    query = np.asarray(query, dtype=np.float64)
    support = np.asarray(support, dtype=np.float64)
    _check_vectors(query, support)
    if scheme is EncodingScheme.KRONECKER:
        return np.outer(query, support).ravel()
    if scheme is EncodingScheme.HADAMARD:
        return query * support
    if scheme is EncodingScheme.COMBINED:
        return np.concatenate([np.outer(query, support).ravel(), query * support])
    raise UnsupportedSchemeError(
        f"{scheme.value} is triplet-native and cannot encode a pair"
    )


def encode_triplet(scheme: EncodingScheme, query, support_i, support_j) -> np.ndarray:
    query = np.asarray(query, dtype=np.float64)
    support_i = np.asarray(support_i, dtype=np.float64)
    support_j = np.asarray(support_j, dtype=np.float64)
    _check_vectors(query, support_i, support_j)
    if scheme in PAIR_SCHEMES:
        return encode_pair(scheme, query, support_i) - encode_pair(
            scheme, query, support_j
        )
    if scheme is EncodingScheme.DISPARITY:
        return np.abs(query - support_i) - np.abs(query - support_j)
    if scheme is EncodingScheme.TRIPLE_CONCAT:
        return np.concatenate([query, support_i, support_j])
    if scheme is EncodingScheme.PAIRWISE_CONCAT_DIFF:
        return np.concatenate([query, support_i]) - np.concatenate([query, support_j])
    raise UnsupportedSchemeError(f"unknown scheme {scheme!r}")


def encode_triplet_batch(scheme, queries, supports_i, supports_j) -> np.ndarray:
    """Row-wise encode_triplet over (n, d) matrices; same arithmetic, batched."""
    q = np.asarray(queries, dtype=np.float64)
    i = np.asarray(supports_i, dtype=np.float64)
    j = np.asarray(supports_j, dtype=np.float64)
    if q.ndim != 2 or q.shape != i.shape or q.shape != j.shape:
        raise InvalidArgumentError("batch inputs must be equal-shape 2-D matrices")
    n, d = q.shape
    if scheme is EncodingScheme.KRONECKER:
        return (q[:, :, None] * i[:, None, :] - q[:, :, None] * j[:, None, :]).reshape(
            n, d * d
        )
    if scheme is EncodingScheme.HADAMARD:
        return q * i - q * j
    if scheme is EncodingScheme.COMBINED:
        kron = (q[:, :, None] * i[:, None, :] - q[:, :, None] * j[:, None, :]).reshape(
            n, d * d
        )
        return np.concatenate([kron, q * i - q * j], axis=1)
    if scheme is EncodingScheme.DISPARITY:
        return np.abs(q - i) - np.abs(q - j)
    if scheme is EncodingScheme.TRIPLE_CONCAT:
        return np.concatenate([q, i, j], axis=1)
    if scheme is EncodingScheme.PAIRWISE_CONCAT_DIFF:
        out = np.zeros((n, 2 * d))
        out[:, d:] = i - j
        return out
    raise UnsupportedSchemeError(f"unknown scheme {scheme!r}")
