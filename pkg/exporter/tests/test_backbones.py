"""Backbone registry, determinism, and weights handling."""

import numpy as np
import pytest

from rankdnn_exporter import (
    InvalidArgumentError,
    MissingWeightsError,
    WeightsFormatError,
    get_backbone,
    init_cnn_weights,
)
from rankdnn_exporter.backbones import validate_resolution


def test_seeded_backbone_dims():
    assert get_backbone("tiny64").dim == 64
    assert get_backbone("tiny640").dim == 640


def test_seeded_backbone_weights_are_reproducible():
    first, second = get_backbone("tiny64"), get_backbone("tiny64")
    for key, value in first.weights.items():
        assert value.dtype == np.float32
        np.testing.assert_array_equal(value, second.weights[key])


def test_forward_is_deterministic_and_shaped():
    backbone = get_backbone("tiny64")
    rng = np.random.default_rng(5)
    batch = rng.random((7, 32, 32, 3), dtype=np.float32)
    a, b = backbone.forward(batch), backbone.forward(batch)
    assert a.shape == (7, 64) and a.dtype == np.float32
    np.testing.assert_array_equal(a, b)


def test_forward_batch_split_invariance():
    backbone = get_backbone("tiny64")
    rng = np.random.default_rng(6)
    batch = rng.random((6, 32, 32, 3), dtype=np.float32)
    whole = backbone.forward(batch)
    parts = np.concatenate([backbone.forward(batch[:2]),
                            backbone.forward(batch[2:])])
    np.testing.assert_allclose(whole, parts, atol=1e-5)


def test_unknown_backbone_lists_choices():
    with pytest.raises(InvalidArgumentError, match="tiny64"):
        get_backbone("resnet-900")


def test_missing_weights_error_is_actionable(tmp_path, monkeypatch):
    monkeypatch.setenv("RANKDNN_EXPORTER_WEIGHTS", str(tmp_path))
    with pytest.raises(MissingWeightsError) as excinfo:
        get_backbone("conv4-640")
    message = str(excinfo.value)
    assert str(tmp_path / "conv4-640.npz") in message
    assert "Download" in message
    assert "RANKDNN_EXPORTER_WEIGHTS" in message


def test_file_backed_backbone_loads_valid_checkpoint(tmp_path, monkeypatch):
    monkeypatch.setenv("RANKDNN_EXPORTER_WEIGHTS", str(tmp_path))
    np.savez(tmp_path / "conv4-640.npz",
             **init_cnn_weights((16, 32, 640), seed=9))
    backbone = get_backbone("conv4-640")
    assert backbone.dim == 640
    features = backbone.forward(np.zeros((2, 32, 32, 3), dtype=np.float32))
    assert features.shape == (2, 640)


def test_checkpoint_shape_mismatch_is_reported(tmp_path, monkeypatch):
    monkeypatch.setenv("RANKDNN_EXPORTER_WEIGHTS", str(tmp_path))
    bad = init_cnn_weights((16, 32, 640), seed=9)
    bad["w2"] = bad["w2"][:, :, :8]
    np.savez(tmp_path / "conv4-640.npz", **bad)
    with pytest.raises(WeightsFormatError, match="layer 2"):
        get_backbone("conv4-640")


def test_checkpoint_missing_key_is_reported(tmp_path, monkeypatch):
    monkeypatch.setenv("RANKDNN_EXPORTER_WEIGHTS", str(tmp_path))
    partial = init_cnn_weights((16, 32, 640), seed=9)
    del partial["b3"]
    np.savez(tmp_path / "conv4-640.npz", **partial)
    with pytest.raises(WeightsFormatError, match="b3"):
        get_backbone("conv4-640")


def test_resolution_validation():
    validate_resolution(32)
    for bad in (0, 4, 7, 30):
        with pytest.raises(InvalidArgumentError):
            validate_resolution(bad)
