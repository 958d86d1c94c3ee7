"""End-to-end orchestration: meta-training, episodic evaluation, ablations.

The pipeline is: fit PCA on the training features and freeze it, meta-train
the ranking MLP on encoded triplets sampled from training episodes, then
evaluate by running many independent N-way K-shot episodes through the
ranking vote.  Reports carry per-episode accuracies, the 95% confidence
interval of the mean, wall-clock per episode, and a hash of the exact
configuration, so results are reproducible and externally checkable.

Seeding: every stage derives its generator from (config.seed, stage tag), so
training, evaluation, and the SVM corpus draw from independent streams and a
single seed pins the whole pipeline.  Evaluation episode seeds are generated
up front, which keeps results identical whether episodes run sequentially or
on a thread pool.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .encoding import EncodingScheme, encode_triplet_batch, encoded_dim, scheme_from_name
from .errors import InvalidArgumentError, RankError, TrainingDivergedError
from .features import (
    FeatureSet,
    SyntheticSpec,
    generate_mirrored,
    generate_synthetic,
    read_feature_set,
    split_by_class,
)
from .mlp import MlpConfig, MlpModel, clone_mlp, init_mlp, load_mlp, save_mlp, train_step
from .pca import PcaModel, fit_pca, l2_normalize, load_pca, pca_transform, save_pca
from .ranksvm import SvmModel, load_svm, save_svm, train_ranksvm
from .sampler import sample_episode, sample_triplet_batch
from .voting import FinetuneConfig, classify_episode

GENERATOR_KINDS = ("gaussian", "mirrored")

# Stage tags for deriving independent seed streams from one experiment seed.
_STREAM_TRAIN = 1
_STREAM_EVAL = 2
_STREAM_SVM = 3
_STREAM_VAL = 4


@dataclass
class DataConfig:
    """Synthetic data source plus its train/val/test class split."""

    kind: str = "gaussian"
    num_classes: int = 84
    per_class: int = 30
    dim: int = 64
    center_scale: float = 5.0
    noise_sigma: float = 1.0
    seed: int = 0
    train_classes: int = 64
    val_classes: int = 0
    test_classes: int = 20
    # mirrored-kind knobs; ignored by the gaussian generator.
    flip_scale: float = 0.4
    flip_prob: float = 0.5
    radius_lo: float = 1.0
    radius_hi: float = 1.0
    active_coords: int = 0
    scale_ladder: float = 1.0

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise InvalidArgumentError(
                f"kind must be one of {GENERATOR_KINDS}, got {self.kind!r}"
            )
        total = self.train_classes + self.val_classes + self.test_classes
        if self.train_classes < 1:
            raise InvalidArgumentError("train_classes must be >= 1")
        if self.val_classes < 0 or self.test_classes < 0:
            raise InvalidArgumentError("split sizes must be >= 0")
        if total > self.num_classes:
            raise InvalidArgumentError(
                f"split takes {total} classes but only {self.num_classes} exist"
            )


@dataclass
class ExperimentConfig:
    """Everything one experiment needs: data, extractor, model, protocol."""

    data: DataConfig | None = None
    train_path: str | None = None
    val_path: str | None = None
    test_path: str | None = None

    scheme: EncodingScheme = EncodingScheme.KRONECKER
    pca_dim: int = 80
    l2_normalize: bool = False
    hidden_dims: tuple[int, ...] = (1024, 512, 256)

    learning_rate: float = 0.0005
    momentum: float = 0.9
    weight_decay: float = 1e-6
    clip_norm: float | None = None
    batch_size: int = 128
    iterations: int = 30000
    val_interval: int = 500
    val_episodes: int = 20
    patience: int = 5

    train_n_way: int = 5
    train_k_shot: int = 5
    anchors: str = "support"

    n_way: int = 5
    k_shot: int = 5
    n_queries: int = 15
    episodes: int = 2000
    finetune: bool = False
    finetune_iterations: int = 100
    finetune_batch: int = 100
    finetune_lr: float = 0.01
    average: bool = True

    svm_c: float = 1.0
    svm_epochs: int = 10
    svm_triplets: int = 20000

    workers: int = 0
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.scheme, str):
            self.scheme = scheme_from_name(self.scheme)
        if isinstance(self.data, dict):
            self.data = DataConfig(**self.data)
        self.hidden_dims = tuple(int(h) for h in self.hidden_dims)
        if self.pca_dim < 1:
            raise InvalidArgumentError("pca_dim must be >= 1")
        for name in ("batch_size", "iterations", "episodes", "n_queries",
                     "val_interval", "val_episodes", "patience"):
            if getattr(self, name) < 1:
                raise InvalidArgumentError(f"{name} must be >= 1")
        if self.workers < 0:
            raise InvalidArgumentError("workers must be >= 0")

    @property
    def layer_dims(self) -> tuple[int, ...]:
        """Input width always equals encoded_dim(scheme, pca_dim)."""
        return (encoded_dim(self.scheme, self.pca_dim), *self.hidden_dims, 1)

    def mlp_config(self) -> MlpConfig:
        return MlpConfig(
            layer_dims=self.layer_dims,
            learning_rate=self.learning_rate,
            momentum=self.momentum,
            weight_decay=self.weight_decay,
            seed=self.seed,
            clip_norm=self.clip_norm,
        )

    def finetune_config(self, seed: int = 0) -> FinetuneConfig:
        return FinetuneConfig(
            iterations=self.finetune_iterations,
            batch_size=self.finetune_batch,
            learning_rate=self.finetune_lr,
            seed=seed,
        )

    def to_dict(self) -> dict:
        out = asdict(self)
        out["scheme"] = self.scheme.value
        return out

    @classmethod
    def from_dict(cls, values: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(values) - known)
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {unknown}")
        values = dict(values)
        if "data" in values and values["data"] is not None:
            data_known = set(DataConfig.__dataclass_fields__)
            data_unknown = sorted(set(values["data"]) - data_known)
            if data_unknown:
                raise InvalidArgumentError(f"unknown data keys: {data_unknown}")
            values["data"] = DataConfig(**values["data"])
        return cls(**values)


def config_hash(config: ExperimentConfig) -> str:
    """Stable 12-hex-digit digest of the full configuration."""
    canonical = json.dumps(config.to_dict(), sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


@dataclass
class Report:
    mean_accuracy: float
    ci95: float
    episode_count: int
    per_episode: np.ndarray
    seconds_per_episode: float
    config_hash: str

    def to_dict(self) -> dict:
        return {
            "mean_accuracy": self.mean_accuracy,
            "ci95": self.ci95,
            "episode_count": self.episode_count,
            "seconds_per_episode": self.seconds_per_episode,
            "config_hash": self.config_hash,
        }


@dataclass
class TrainedRanker:
    """Frozen extractor (PCA + optional L2) bundled with the trained scorer."""

    pca: PcaModel
    model: MlpModel | SvmModel
    scheme: EncodingScheme
    config: ExperimentConfig
    l2: bool = False
    history: list[dict] = field(default_factory=list)

    def transform(self, vectors: np.ndarray) -> np.ndarray:
        projected = pca_transform(self.pca, vectors)
        return l2_normalize(projected) if self.l2 else projected

    def transform_set(self, feature_set: FeatureSet) -> FeatureSet:
        return FeatureSet(self.transform(feature_set.vectors), feature_set.labels)


def generate_data(data: DataConfig) -> FeatureSet:
    spec = SyntheticSpec(
        num_classes=data.num_classes,
        per_class=data.per_class,
        dim=data.dim,
        center_scale=data.center_scale,
        noise_sigma=data.noise_sigma,
        seed=data.seed,
    )
    if data.kind == "gaussian":
        return generate_synthetic(spec)
    return generate_mirrored(
        spec,
        flip_scale=data.flip_scale,
        flip_prob=data.flip_prob,
        radius_lo=data.radius_lo,
        radius_hi=data.radius_hi,
        active_coords=data.active_coords,
        scale_ladder=data.scale_ladder,
    )


def _maybe(fs: FeatureSet) -> FeatureSet | None:
    return fs if fs.count else None


def resolve_data(config: ExperimentConfig):
    """Return (train, val, test) FeatureSets from the configured source."""
    if config.data is not None:
        full = generate_data(config.data)
        train, val, test = split_by_class(
            full,
            config.data.train_classes,
            config.data.val_classes,
            config.data.test_classes,
        )
        return train, _maybe(val), _maybe(test)
    if config.train_path is None:
        raise InvalidArgumentError("config needs either data or train_path")
    train = read_feature_set(config.train_path)
    val = read_feature_set(config.val_path) if config.val_path else None
    test = read_feature_set(config.test_path) if config.test_path else None
    return train, val, test


def _stream_rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, tag)))


def _episode_seeds(seed: int, tag: int, episodes: int) -> np.ndarray:
    """Pre-generated (episode, finetune) seed pairs, worker-order independent."""
    state = np.random.SeedSequence((seed, tag)).generate_state(2 * episodes)
    return state.reshape(episodes, 2)


def _validation_accuracy(model: MlpModel, config: ExperimentConfig,
                         val_set: FeatureSet, rng: np.random.Generator) -> float:
    accs = []
    for _ in range(config.val_episodes):
        episode = sample_episode(
            val_set, config.n_way, config.k_shot, config.n_queries, seed=rng,
        )
        _, acc = classify_episode(model, config.scheme, episode,
                                  average=config.average)
        accs.append(acc)
    return float(np.mean(accs))


def meta_train(config: ExperimentConfig, data=None) -> TrainedRanker:
    """Fit-and-freeze PCA, then train the ranking MLP on sampled triplets.

    Stops at the iteration budget, or earlier when the sliding-window
    validation accuracy has not improved for `patience` consecutive windows
    (validation runs when a validation split exists).  Returns the ranker
    whose model scored best on validation, or the final model without one.
    """
    if data is None:
        train_set, val_set, _ = resolve_data(config)
    else:
        train_set, val_set = data
    pca = fit_pca(train_set.vectors, config.pca_dim)
    ranker = TrainedRanker(
        pca=pca,
        model=init_mlp(config.mlp_config()),
        scheme=config.scheme,
        config=config,
        l2=config.l2_normalize,
    )
    train_t = ranker.transform_set(train_set)
    val_t = ranker.transform_set(val_set) if val_set is not None else None

    rng = _stream_rng(config.seed, _STREAM_TRAIN)
    val_rng = _stream_rng(config.seed, _STREAM_VAL)
    model = ranker.model
    # Query-anchored sampling needs queries inside the training episodes.
    train_queries = 0 if config.anchors == "support" else config.n_queries
    best_model = None
    best_val = -1.0
    windows_since_best = 0

    for iteration in range(config.iterations):
        episode = sample_episode(
            train_t, config.train_n_way, config.train_k_shot,
            train_queries, seed=rng,
        )
        q, si, sj, labels = sample_triplet_batch(
            episode, config.batch_size, rng, anchors=config.anchors,
        )
        encoded = encode_triplet_batch(config.scheme, q, si, sj)
        targets = (labels + 1) // 2  # ranking labels {-1,+1} -> BCE {0,1}
        try:
            loss = train_step(model, encoded, targets)
        except TrainingDivergedError as err:
            raise TrainingDivergedError(
                err.layer_index,
                f"iteration {iteration}, encoder {config.scheme.value}: {err.detail}",
            ) from err
        entry = {"iteration": iteration, "loss": loss}

        if val_t is not None and (iteration + 1) % config.val_interval == 0:
            val_acc = _validation_accuracy(model, config, val_t, val_rng)
            entry["val_accuracy"] = val_acc
            if val_acc > best_val:
                best_val = val_acc
                best_model = clone_mlp(model)
                windows_since_best = 0
            else:
                windows_since_best += 1
            ranker.history.append(entry)
            if windows_since_best >= config.patience:
                break
        else:
            ranker.history.append(entry)

    if best_model is not None:
        ranker.model = best_model
    return ranker


def train_svm(config: ExperimentConfig, data=None) -> TrainedRanker:
    """RankSVM baseline under the identical extractor and sampling pipeline.

    Builds a fixed corpus of `svm_triplets` encoded triplets from training
    episodes, then fits the linear ranker on it.
    """
    if data is None:
        train_set, _, _ = resolve_data(config)
    else:
        train_set = data[0] if isinstance(data, tuple) else data
    pca = fit_pca(train_set.vectors, config.pca_dim)
    vectors = pca_transform(pca, train_set.vectors)
    if config.l2_normalize:
        vectors = l2_normalize(vectors)
    train_t = FeatureSet(vectors, train_set.labels)
    rng = _stream_rng(config.seed, _STREAM_SVM)
    train_queries = 0 if config.anchors == "support" else config.n_queries

    blocks, label_blocks = [], []
    drawn = 0
    while drawn < config.svm_triplets:
        episode = sample_episode(
            train_t, config.train_n_way, config.train_k_shot,
            train_queries, seed=rng,
        )
        take = min(config.batch_size, config.svm_triplets - drawn)
        q, si, sj, labels = sample_triplet_batch(
            episode, take, rng, anchors=config.anchors,
        )
        blocks.append(encode_triplet_batch(config.scheme, q, si, sj))
        label_blocks.append(labels)
        drawn += take
    encoded = np.concatenate(blocks, axis=0)
    labels = np.concatenate(label_blocks)
    model = train_ranksvm(
        (encoded, labels), config.scheme, c=config.svm_c,
        epochs=config.svm_epochs, seed=config.seed,
    )
    return TrainedRanker(
        pca=pca, model=model, scheme=config.scheme, config=config,
        l2=config.l2_normalize,
    )


def evaluate(ranker: TrainedRanker, config: ExperimentConfig | None = None,
             test_set: FeatureSet | None = None) -> Report:
    """Run independent episodes through the ranking vote and aggregate."""
    if config is None:
        config = ranker.config
    if test_set is None:
        _, _, test_set = resolve_data(config)
        if test_set is None:
            raise InvalidArgumentError("no test split configured")
    test_t = ranker.transform_set(test_set)
    seeds = _episode_seeds(config.seed, _STREAM_EVAL, config.episodes)

    def run_episode(index: int) -> tuple[float, float]:
        episode = sample_episode(
            test_t, config.n_way, config.k_shot, config.n_queries,
            seed=int(seeds[index, 0]),
        )
        finetune = None
        if config.finetune:
            finetune = config.finetune_config(seed=int(seeds[index, 1]))
        start = time.perf_counter()
        _, accuracy = classify_episode(
            ranker.model, ranker.scheme, episode,
            finetune=finetune, average=config.average,
        )
        return accuracy, time.perf_counter() - start

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(run_episode, range(config.episodes)))
    else:
        results = [run_episode(i) for i in range(config.episodes)]

    per_episode = np.array([acc for acc, _ in results])
    seconds = float(np.mean([dt for _, dt in results]))
    mean = float(per_episode.mean())
    if config.episodes > 1:
        ci95 = float(1.96 * per_episode.std(ddof=1) / np.sqrt(config.episodes))
    else:
        ci95 = 0.0
    return Report(mean, ci95, config.episodes, per_episode, seconds,
                  config_hash(config))


def run_experiment(config: ExperimentConfig) -> tuple[TrainedRanker, Report]:
    """meta_train + evaluate on the configured splits."""
    train_set, val_set, test_set = resolve_data(config)
    ranker = meta_train(config, data=(train_set, val_set))
    return ranker, evaluate(ranker, config, test_set=test_set)


@dataclass
class AblationRow:
    scheme: EncodingScheme
    report: Report | None
    error: str | None = None


def ablate(config: ExperimentConfig, schemes) -> list[AblationRow]:
    """Train and evaluate one model per scheme under identical seeds/data.

    A scheme that fails (typically training divergence) contributes an error
    row; the sweep continues.
    """
    rows = []
    for scheme in schemes:
        if isinstance(scheme, str):
            scheme = scheme_from_name(scheme)
        scheme_config = replace(config, scheme=scheme)
        try:
            _, report = run_experiment(scheme_config)
            rows.append(AblationRow(scheme, report))
        except RankError as err:
            rows.append(AblationRow(scheme, None, f"{type(err).__name__}: {err}"))
    return rows


def cross_domain_eval(train_set: FeatureSet, test_set: FeatureSet,
                      config: ExperimentConfig) -> Report:
    """Meta-train on one domain, evaluate episodes drawn from another.

    PCA is fit on the training domain only; the test features pass through
    that frozen transform.
    """
    if train_set.dim != test_set.dim:
        raise InvalidArgumentError(
            f"domain dims differ: {train_set.dim} vs {test_set.dim}"
        )
    ranker = meta_train(config, data=(train_set, None))
    return evaluate(ranker, config, test_set=test_set)


def save_ranker(ranker: TrainedRanker, prefix: str) -> dict:
    """Write <prefix>.rkpc, <prefix>.rkml/.rksv, and a <prefix>.json manifest."""
    save_pca(ranker.pca, f"{prefix}.rkpc")
    if isinstance(ranker.model, MlpModel):
        model_type, model_path = "mlp", f"{prefix}.rkml"
        save_mlp(ranker.model, model_path)
    else:
        model_type, model_path = "svm", f"{prefix}.rksv"
        save_svm(ranker.model, model_path)
    manifest = {
        "model_type": model_type,
        "scheme": ranker.scheme.value,
        "l2_normalize": ranker.l2,
        "pca_file": f"{prefix}.rkpc",
        "model_file": model_path,
        "config": ranker.config.to_dict(),
        "config_hash": config_hash(ranker.config),
        "history": ranker.history,
    }
    with open(f"{prefix}.json", "w") as handle:
        json.dump(manifest, handle, indent=2)
    return manifest


def load_ranker(prefix: str) -> TrainedRanker:
    with open(f"{prefix}.json") as handle:
        manifest = json.load(handle)
    config = ExperimentConfig.from_dict(manifest["config"])
    pca = load_pca(manifest["pca_file"])
    if manifest["model_type"] == "mlp":
        model = load_mlp(manifest["model_file"])
    else:
        model = load_svm(manifest["model_file"])
    return TrainedRanker(
        pca=pca,
        model=model,
        scheme=scheme_from_name(manifest["scheme"]),
        config=config,
        l2=manifest["l2_normalize"],
        history=manifest.get("history", []),
    )
