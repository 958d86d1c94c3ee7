"""PCA fit/transform properties against brute-force linear-algebra oracles."""

import numpy as np
import pytest

from rankdnn import (
    DegenerateDataError,
    FormatError,
    InvalidArgumentError,
    TruncationError,
    fit_pca,
    l2_normalize,
    load_pca,
    pca_transform,
    save_pca,
)

SQRT_HALF = 0.7071067811865475  # frozen: 1/sqrt(2)


def loop_covariance(vectors):
    """Oracle: covariance from explicit loops, ddof=1."""
    n, d = vectors.shape
    mean = vectors.mean(axis=0)
    cov = np.zeros((d, d))
    for a in range(d):
        for b in range(d):
            acc = 0.0
            for i in range(n):
                acc += (vectors[i, a] - mean[a]) * (vectors[i, b] - mean[b])
            cov[a, b] = acc / (n - 1)
    return cov


def test_line_through_origin_hand_case():
    points = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
    model = fit_pca(points, output_dim=1)
    assert np.allclose(model.mean, [1.0, 1.0])
    assert np.allclose(model.components[0], [SQRT_HALF, SQRT_HALF], atol=1e-12)
    assert np.allclose(model.explained_variance, [2.0], atol=1e-12)
    projected = pca_transform(model, np.array([2.0, 2.0]))
    assert np.allclose(projected, [np.sqrt(2.0)], atol=1e-12)


def test_eigenvalues_match_general_eigensolver_oracle():
    rng = np.random.default_rng(42)
    vectors = rng.standard_normal((50, 10)) @ rng.standard_normal((10, 10))
    model = fit_pca(vectors, output_dim=3)
    # Independent route: loop-built covariance through the general (non
    # symmetric-specialized) eigensolver.
    eigenvalues = np.linalg.eig(loop_covariance(vectors))[0]
    expected = np.sort(eigenvalues.real)[::-1][:3]
    assert np.max(np.abs(model.explained_variance - expected)) < 1e-8


def test_components_orthonormal():
    rng = np.random.default_rng(7)
    for trial in range(5):
        vectors = rng.standard_normal((40, 12)) * rng.uniform(0.5, 3.0)
        model = fit_pca(vectors, output_dim=6)
        gram = model.components @ model.components.T
        assert np.max(np.abs(gram - np.eye(6))) < 1e-8


def test_transformed_variance_equals_explained_variance():
    rng = np.random.default_rng(13)
    vectors = rng.standard_normal((60, 9)) @ rng.standard_normal((9, 9))
    model = fit_pca(vectors, output_dim=5)
    projected = pca_transform(model, vectors)
    per_coord = projected.var(axis=0, ddof=1)
    assert np.max(np.abs(per_coord - model.explained_variance)) < 1e-8
    assert np.max(np.abs(projected.mean(axis=0))) < 1e-10


def test_explained_variance_sorted_non_negative():
    rng = np.random.default_rng(99)
    vectors = rng.standard_normal((30, 8))
    model = fit_pca(vectors, output_dim=8)
    ev = model.explained_variance
    assert np.all(ev >= 0.0)
    assert np.all(np.diff(ev) <= 1e-12)


def test_full_rank_reconstruction_exact():
    rng = np.random.default_rng(3)
    vectors = rng.standard_normal((30, 8))
    model = fit_pca(vectors, output_dim=8)
    projected = pca_transform(model, vectors)
    rebuilt = model.mean + projected @ model.components
    assert np.max(np.abs(rebuilt - vectors)) < 1e-10


def test_sign_convention_largest_entry_positive():
    rng = np.random.default_rng(17)
    for trial in range(5):
        vectors = rng.standard_normal((25, 7))
        model = fit_pca(vectors, output_dim=4)
        for row in model.components:
            assert row[np.argmax(np.abs(row))] > 0.0


def test_fit_validation_and_degenerate_data():
    rng = np.random.default_rng(0)
    vectors = rng.standard_normal((10, 5))
    with pytest.raises(InvalidArgumentError):
        fit_pca(vectors, 0)
    with pytest.raises(InvalidArgumentError):
        fit_pca(vectors, 6)  # > dim
    with pytest.raises(InvalidArgumentError):
        fit_pca(vectors[:4], 4)  # > n - 1
    with pytest.raises(DegenerateDataError):
        fit_pca(np.ones((10, 5)), 2)
    with pytest.raises(InvalidArgumentError):
        pca_transform(fit_pca(vectors, 2), np.zeros(4))


def test_transform_is_frozen_matrix_map():
    rng = np.random.default_rng(5)
    vectors = rng.standard_normal((20, 6))
    model = fit_pca(vectors, 3)
    fresh = rng.standard_normal((4, 6))
    expected = (fresh - model.mean) @ model.components.T
    assert np.array_equal(pca_transform(model, fresh), expected)


def test_l2_normalize():
    rows = np.array([[3.0, 4.0], [0.0, 0.0]])
    out = l2_normalize(rows)
    assert np.allclose(out[0], [0.6, 0.8])
    assert np.array_equal(out[1], [0.0, 0.0])


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    model = fit_pca(rng.standard_normal((30, 6)), 4)
    path = tmp_path / "model.rkpc"
    save_pca(model, path)
    back = load_pca(path)
    assert back.input_dim == 6 and back.output_dim == 4
    # Files hold float32: loading equals snapping the originals.
    assert np.array_equal(back.mean, model.mean.astype(np.float32))
    assert np.array_equal(back.components,
                          model.components.astype(np.float32).astype(np.float64))
    assert np.array_equal(back.explained_variance,
                          model.explained_variance.astype(np.float32))


def test_file_errors(tmp_path):
    rng = np.random.default_rng(8)
    model = fit_pca(rng.standard_normal((30, 6)), 4)
    path = tmp_path / "model.rkpc"
    save_pca(model, path)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"XXXX"
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError) as err:
        load_pca(path)
    assert err.value.field == "magic"

    save_pca(model, path)
    path.write_bytes(path.read_bytes()[:30])
    with pytest.raises(TruncationError):
        load_pca(path)
