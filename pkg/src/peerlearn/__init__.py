"""Robust classifier training under label noise via two peer networks that
split each batch by prediction agreement, exchange small-loss selections, and
cross-update — plus the baselines it is measured against, synthetic noisy
dataset generators, and embedding-distance deduplication."""

from .baselines import (
    StrategyConfig,
    co_teaching_step,
    decoupling_step,
    plain_step,
)
from .data import (
    Dataset,
    NoiseSpec,
    Sample,
    apply_imbalance,
    generate_gaussian_dataset,
    imbalance_ratio,
    inject_cross_category_noise,
    inject_cross_domain_noise,
    merge_datasets,
)
from .dedup import DedupConfig, DedupReport, EmbeddingSet, deduplicate, pairwise_min_distance
from .errors import (
    ConfigurationError,
    LabelError,
    MissingClassError,
    ParseError,
    PeerlearnError,
    ShapeError,
)
from .estimators import (
    CoTeachingClassifier,
    DecouplingClassifier,
    PeerLearningClassifier,
    PlainMLPClassifier,
)
from .nn import LossConfig, Model, OptimizerConfig, init_model, sgd_step
from .peer import (
    BatchSplit,
    DropSchedule,
    PeerTrainer,
    SelectionResult,
    drop_rate,
    keep_count,
    make_peer_trainer,
    peer_step,
    select_small_loss,
    split_batch,
    train,
)
from .records import RunRecord

__version__ = "0.1.0"

__all__ = [
    "BatchSplit", "CoTeachingClassifier", "ConfigurationError", "Dataset",
    "DecouplingClassifier", "DedupConfig", "DedupReport", "DropSchedule",
    "EmbeddingSet", "LabelError", "LossConfig", "MissingClassError", "Model",
    "NoiseSpec", "OptimizerConfig", "ParseError", "PeerLearningClassifier",
    "PeerTrainer", "PeerlearnError", "PlainMLPClassifier", "RunRecord",
    "Sample", "SelectionResult", "ShapeError", "StrategyConfig",
    "apply_imbalance", "co_teaching_step", "decoupling_step", "deduplicate",
    "drop_rate", "generate_gaussian_dataset", "imbalance_ratio", "init_model",
    "inject_cross_category_noise", "inject_cross_domain_noise", "keep_count",
    "make_peer_trainer", "merge_datasets", "pairwise_min_distance",
    "peer_step", "plain_step", "select_small_loss", "sgd_step", "split_batch",
    "train",
]
