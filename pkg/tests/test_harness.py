"""End-to-end harness behavior: determinism, CI scaling, ablation, persistence."""

import numpy as np
import pytest

from rankdnn import (
    BENCHMARK_NAMES,
    DataConfig,
    ExperimentConfig,
    InvalidArgumentError,
    ablate,
    benchmark_by_name,
    config_hash,
    cross_domain_eval,
    evaluate,
    fast_variant,
    generate_data,
    load_ranker,
    meta_train,
    resolve_data,
    run_experiment,
    save_ranker,
    split_by_class,
    train_svm,
)
from rankdnn.pca import pca_transform


def tiny_config(**overrides):
    base = dict(
        data=DataConfig(
            kind="gaussian", num_classes=14, per_class=18, dim=10,
            center_scale=5.0, noise_sigma=1.0, seed=0,
            train_classes=9, val_classes=0, test_classes=5,
        ),
        pca_dim=6,
        hidden_dims=(16, 8),
        learning_rate=0.01,
        batch_size=64,
        iterations=250,
        train_n_way=4,
        train_k_shot=5,
        n_way=4,
        k_shot=1,
        n_queries=5,
        episodes=40,
        seed=0,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_run_experiment_is_deterministic_and_seed_sensitive():
    _, first = run_experiment(tiny_config())
    _, second = run_experiment(tiny_config())
    assert np.array_equal(first.per_episode, second.per_episode)
    assert first.mean_accuracy == second.mean_accuracy
    assert first.ci95 == second.ci95
    assert first.config_hash == second.config_hash
    _, moved = run_experiment(tiny_config(seed=1))
    assert not np.array_equal(first.per_episode, moved.per_episode)


def test_zero_noise_five_classes_is_nearly_solved():
    # With zero noise the 1-shot prototypes are the exact class centers.
    # Train classes must outnumber pca_dim: zero-noise data has rank
    # train_classes - 1, and components beyond the rank never receive
    # gradient yet light up on unseen test classes.
    config = tiny_config(
        data=DataConfig(
            kind="gaussian", num_classes=17, per_class=12, dim=12,
            center_scale=5.0, noise_sigma=1e-9, seed=0,
            train_classes=11, val_classes=0, test_classes=5,
        ),
        pca_dim=10,
        l2_normalize=True,
        iterations=1500,
        train_n_way=4,
        n_way=5,
        episodes=200,
    )
    _, report = run_experiment(config)
    assert report.mean_accuracy >= 0.99


def test_report_aggregates_match_external_recomputation():
    _, report = run_experiment(tiny_config())
    assert abs(report.mean_accuracy - np.mean(report.per_episode)) < 1e-12
    stderr = np.std(report.per_episode, ddof=1) / np.sqrt(len(report.per_episode))
    assert abs(report.ci95 - 1.96 * stderr) < 1e-12
    assert report.episode_count == len(report.per_episode) == 40


def test_ci_shrinks_like_inverse_sqrt_episodes():
    config = tiny_config()
    ranker = meta_train(config)
    *_, test_set = resolve_data(config)
    from dataclasses import replace

    small = evaluate(ranker, replace(config, episodes=500), test_set=test_set)
    large = evaluate(ranker, replace(config, episodes=2000), test_set=test_set)
    ratio = small.ci95 / large.ci95
    # quadrupling episodes should halve the CI, within 20%
    assert 1.6 < ratio < 2.4


def test_worker_pool_matches_sequential_evaluation():
    config = tiny_config(episodes=100)
    ranker = meta_train(config)
    *_, test_set = resolve_data(config)
    from dataclasses import replace

    seq = evaluate(ranker, replace(config, workers=0), test_set=test_set)
    par = evaluate(ranker, replace(config, workers=3), test_set=test_set)
    assert np.array_equal(seq.per_episode, par.per_episode)


def test_ablate_emits_error_rows_and_continues():
    schemes = ("kronecker", "disparity", "triple_concat")
    exploding = tiny_config(learning_rate=1e8, iterations=60)
    rows = ablate(exploding, schemes)
    assert len(rows) == len(schemes)
    for row, name in zip(rows, schemes):
        assert row.scheme.value == name
        assert row.report is None
        assert "TrainingDivergedError" in row.error
    sane = ablate(tiny_config(episodes=15), ("kronecker", "pairwise_concat_diff"))
    assert all(row.report is not None for row in sane)
    assert sane[0].report.mean_accuracy > sane[1].report.mean_accuracy


def test_cross_domain_eval_transfers_when_separable():
    config = tiny_config(episodes=60)
    train_set, _, _ = resolve_data(config)
    other = DataConfig(
        kind="gaussian", num_classes=6, per_class=20, dim=10,
        center_scale=5.0, noise_sigma=1.0, seed=33,
        train_classes=1, val_classes=0, test_classes=5,
    )
    test_set = generate_data(other)
    ranker = meta_train(config, data=(train_set, None))

    # oracle first: the projected test classes must be centroid-separable
    projected = pca_transform(ranker.pca, test_set.vectors)
    correct = 0
    for c in test_set.classes:
        rows = test_set.class_index[c]
        centroid = projected[rows[:10]].mean(axis=0)
        for row in rows[10:]:
            dists = [
                np.linalg.norm(projected[row]
                               - projected[test_set.class_index[d][:10]].mean(axis=0))
                for d in test_set.classes
            ]
            correct += int(test_set.classes[int(np.argmin(dists))] == c)
        assert centroid.shape == (config.pca_dim,)
    oracle = correct / (len(test_set.classes) * 10)
    assert oracle > 0.9

    report = cross_domain_eval(train_set, test_set, config)
    assert report.mean_accuracy > 0.5  # chance is 0.25 at 4-way


def test_cross_domain_on_own_split_equals_run_experiment():
    config = tiny_config()
    train_set, _, test_set = resolve_data(config)
    direct = cross_domain_eval(train_set, test_set, config)
    _, standard = run_experiment(config)
    assert np.array_equal(direct.per_episode, standard.per_episode)


def test_cross_domain_rejects_dim_mismatch():
    config = tiny_config()
    train_set, _, _ = resolve_data(config)
    other = generate_data(DataConfig(
        kind="gaussian", num_classes=4, per_class=8, dim=12,
        center_scale=5.0, noise_sigma=1.0, seed=1,
        train_classes=1, val_classes=0, test_classes=3,
    ))
    with pytest.raises(InvalidArgumentError):
        cross_domain_eval(train_set, other, config)


def test_pca_is_centered_on_training_domain_only():
    config = tiny_config()
    train_set, _, test_set = resolve_data(config)
    ranker = meta_train(config, data=(train_set, None))
    train_proj = pca_transform(ranker.pca, train_set.vectors)
    test_proj = pca_transform(ranker.pca, test_set.vectors)
    assert np.abs(train_proj.mean(axis=0)).max() < 1e-9
    assert np.abs(test_proj.mean(axis=0)).max() > 1e-6


def test_save_load_ranker_round_trip(tmp_path):
    config = tiny_config()
    ranker = meta_train(config)
    prefix = str(tmp_path / "ranker")
    manifest = save_ranker(ranker, prefix)
    assert manifest["model_type"] == "mlp"
    assert manifest["scheme"] == "kronecker"
    assert manifest["config_hash"] == config_hash(config)
    back = load_ranker(prefix)
    *_, test_set = resolve_data(config)
    first = evaluate(ranker, config, test_set=test_set)
    second = evaluate(back, config, test_set=test_set)
    assert np.array_equal(first.per_episode, second.per_episode)


def test_save_load_svm_ranker_round_trip(tmp_path):
    config = tiny_config(svm_triplets=2000)
    ranker = train_svm(config)
    prefix = str(tmp_path / "svm")
    manifest = save_ranker(ranker, prefix)
    assert manifest["model_type"] == "svm"
    back = load_ranker(prefix)
    *_, test_set = resolve_data(config)
    first = evaluate(ranker, config, test_set=test_set)
    second = evaluate(back, config, test_set=test_set)
    assert np.array_equal(first.per_episode, second.per_episode)


def test_config_dict_round_trip_and_hash_sensitivity():
    config = tiny_config()
    clone = ExperimentConfig.from_dict(config.to_dict())
    assert config_hash(clone) == config_hash(config)
    assert clone.layer_dims[0] == 36  # kronecker at pca_dim 6
    moved = tiny_config(pca_dim=7)
    assert config_hash(moved) != config_hash(config)
    with pytest.raises(InvalidArgumentError):
        ExperimentConfig.from_dict({"no_such_field": 1})
    with pytest.raises(InvalidArgumentError):
        ExperimentConfig.from_dict({"data": {"no_such_field": 1}})


def test_data_config_validation():
    with pytest.raises(InvalidArgumentError):
        DataConfig(kind="nope")
    with pytest.raises(InvalidArgumentError):
        DataConfig(num_classes=5, train_classes=4, test_classes=2)


def test_benchmark_registry():
    for name in BENCHMARK_NAMES:
        config = benchmark_by_name(name)
        assert config.data is not None
        assert config.layer_dims[-1] == 1
    with pytest.raises(KeyError):
        benchmark_by_name("bogus")
    shrunk = fast_variant(benchmark_by_name("well_separated"), 10, 5)
    assert shrunk.iterations == 10 and shrunk.episodes == 5
