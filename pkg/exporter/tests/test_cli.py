"""CLI behavior and the end-to-end integration with the consumer package."""

import json
import subprocess
import sys

import pytest

from rankdnn_exporter.cli import main


def test_export_command_writes_files(toy_dataset, tmp_path, capsys):
    out = tmp_path / "toy.fvec"
    rc = main(["export", "--data", str(toy_dataset), "--backbone", "tiny64",
               "--out", str(out)])
    captured = capsys.readouterr()
    assert rc == 0
    assert out.is_file() and (tmp_path / "toy.fvec.json").is_file()
    assert "wrote 20 rows of dim 64" in captured.out


def test_export_command_reports_missing_weights(toy_dataset, tmp_path,
                                                monkeypatch, capsys):
    monkeypatch.setenv("RANKDNN_EXPORTER_WEIGHTS", str(tmp_path / "none"))
    rc = main(["export", "--data", str(toy_dataset), "--backbone",
               "conv4-640", "--out", str(tmp_path / "toy.fvec")])
    captured = capsys.readouterr()
    assert rc == 1
    assert "error:" in captured.err and "conv4-640.npz" in captured.err


def test_backbones_command_lists_registry(capsys):
    rc = main(["backbones"])
    captured = capsys.readouterr()
    assert rc == 0
    for name in ("tiny64", "tiny640", "conv4-640"):
        assert name in captured.out


def test_resolution_flag_rejected_when_invalid(toy_dataset, tmp_path, capsys):
    rc = main(["export", "--data", str(toy_dataset), "--backbone", "tiny64",
               "--out", str(tmp_path / "toy.fvec"), "--resolution", "30"])
    assert rc == 1
    assert "multiple of 4" in capsys.readouterr().err


def test_exported_file_reads_back_through_consumer(toy_dataset, tmp_path):
    rankdnn = pytest.importorskip("rankdnn")
    out = tmp_path / "toy.fvec"
    assert main(["export", "--data", str(toy_dataset), "--backbone",
                 "tiny64", "--out", str(out)]) == 0
    features = rankdnn.read_feature_set(out)
    assert features.count == 20 and features.dim == 64
    assert sorted(set(features.labels.tolist())) == [0, 1]


EVAL_CONFIG = """\
seed = 0
pca_dim = 8
hidden_dims = [8, 4]
iterations = 80
batch_size = 64
train_n_way = 2
train_k_shot = 3
n_way = 2
k_shot = 1
n_queries = 3
episodes = 5
"""


def test_end_to_end_through_consumer_eval_cli(toy_dataset, tmp_path):
    pytest.importorskip("rankdnn")
    out = tmp_path / "toy.fvec"
    assert main(["export", "--data", str(toy_dataset), "--backbone",
                 "tiny64", "--out", str(out)]) == 0
    config = tmp_path / "eval.toml"
    config.write_text(EVAL_CONFIG)
    command = [
        sys.executable, "-m", "rankdnn.cli", "eval",
        "--config", str(config), "--quiet",
        "--train-data", str(out), "--test-data", str(out),
    ]
    proc = subprocess.run(command, capture_output=True, text=True,
                          timeout=300)
    assert proc.returncode == 0, proc.stderr
    payload = json.loads(proc.stdout.strip().splitlines()[-1])
    assert payload["episode_count"] == 5
    assert 0.0 <= payload["mean_accuracy"] <= 1.0
