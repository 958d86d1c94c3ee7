"""Few-shot classification by ranking.

Feature vectors are reduced with a frozen PCA, (query, support_i, support_j)
triplets are encoded (Kronecker products by default), a small MLP learns to
rank relevance with a binary cross-entropy loss, and queries are classified
by voting over ordered prototype pairs.  A linear RankSVM baseline, an
evaluation harness, and binary file formats for every artifact are included.
"""

from .encoding import (
    EncodingScheme,
    PAIR_SCHEMES,
    encode_pair,
    encode_triplet,
    encode_triplet_batch,
    encoded_dim,
    scheme_from_name,
)
from .benchmarks import (
    BENCHMARK_NAMES,
    benchmark_by_name,
    fast_variant,
    moderate,
    nonlinear,
    well_separated,
    xor,
)
from .errors import (
    DegenerateDataError,
    FormatError,
    InvalidArgumentError,
    RankError,
    TrainingDivergedError,
    TruncationError,
    UnsupportedSchemeError,
)
from .features import (
    FeatureSet,
    SyntheticSpec,
    generate_mirrored,
    generate_synthetic,
    read_feature_set,
    split_by_class,
    write_feature_set,
)
from .harness import (
    AblationRow,
    DataConfig,
    ExperimentConfig,
    Report,
    TrainedRanker,
    ablate,
    config_hash,
    cross_domain_eval,
    evaluate,
    generate_data,
    load_ranker,
    meta_train,
    resolve_data,
    run_experiment,
    save_ranker,
    train_svm,
)
from .mlp import (
    MlpConfig,
    MlpModel,
    bce_loss,
    clone_mlp,
    forward,
    init_mlp,
    load_mlp,
    loss_gradients,
    param_count,
    save_mlp,
    train_step,
)
from .pca import (
    PcaModel,
    fit_pca,
    l2_normalize,
    load_pca,
    pca_transform,
    save_pca,
)
from .ranksvm import (
    SvmModel,
    load_svm,
    save_svm,
    svm_decide,
    svm_objective,
    train_ranksvm,
)
from .sampler import (
    Episode,
    LabeledTriplet,
    build_finetune_triplets,
    build_training_triplets,
    dump_triplets,
    sample_episode,
    sample_triplet_batch,
    triplets_to_arrays,
)
from .voting import (
    FinetuneConfig,
    VoteResult,
    class_prototypes,
    classify_episode,
    finetune_episode,
    rank_vote,
)

__version__ = "0.1.0"
