"""Class-imbalanced semi-supervised node classification toolkit.

A from-scratch two-layer GCN, classical rebalancing baselines, dynamic
virtual-topology augmentation, balanced metrics, structural bias probes,
and a batch experiment harness, all on numpy/scipy.
"""
from .augmentation import (
    AugmentedGraph,
    CandidateSimilarity,
    RiskScores,
    augment,
    calibrate_risk,
    class_prototypes,
    compute_uncertainty,
    link_probabilities,
    prediction_similarity,
    sample_virtual_edges,
    topology_similarity,
)
from .baselines import (
    BaselineAugmentation,
    apply_augmentation,
    class_reweight,
    oversample,
    smote,
)
from .diagnostics import (
    BinStat,
    binned_accuracy,
    distance_to_same_class_supervision,
    heterophilic_ratio,
)
from .experiment import (
    ExperimentConfig,
    ResultRow,
    compare_granularity,
    load_config,
    run_experiment,
)
from .gcn import (
    ForwardCache,
    ModelParams,
    PredictionState,
    gcn_backward,
    gcn_forward,
    masked_cross_entropy,
)
from .graph import (
    Graph,
    GraphFormatError,
    load_dataset,
    load_graph,
    normalize_adjacency,
    save_graph,
)
from .metrics import (
    MetricsReport,
    balanced_accuracy,
    disparity,
    evaluate,
    macro_f1,
    per_class_accuracy,
)
from .optim import PlateauScheduler, adam_step
from .splits import (
    Split,
    make_natural_imbalance_split,
    make_step_imbalance_split,
    natural_train_counts,
    step_train_counts,
    subsample_step_imbalance,
)
from .synthetic import SbmParams, generate_sbm
from .training import EpochRecord, TrainConfig, TrainResult, predict, train

__version__ = "0.1.0"

__all__ = [
    "AugmentedGraph",
    "BaselineAugmentation",
    "BinStat",
    "CandidateSimilarity",
    "EpochRecord",
    "ExperimentConfig",
    "ForwardCache",
    "Graph",
    "GraphFormatError",
    "MetricsReport",
    "ModelParams",
    "PlateauScheduler",
    "PredictionState",
    "ResultRow",
    "RiskScores",
    "SbmParams",
    "Split",
    "TrainConfig",
    "TrainResult",
    "adam_step",
    "apply_augmentation",
    "augment",
    "balanced_accuracy",
    "binned_accuracy",
    "calibrate_risk",
    "class_prototypes",
    "class_reweight",
    "compare_granularity",
    "compute_uncertainty",
    "disparity",
    "distance_to_same_class_supervision",
    "evaluate",
    "gcn_backward",
    "gcn_forward",
    "generate_sbm",
    "heterophilic_ratio",
    "link_probabilities",
    "load_config",
    "load_dataset",
    "load_graph",
    "macro_f1",
    "make_natural_imbalance_split",
    "make_step_imbalance_split",
    "masked_cross_entropy",
    "natural_train_counts",
    "normalize_adjacency",
    "oversample",
    "per_class_accuracy",
    "predict",
    "prediction_similarity",
    "run_experiment",
    "sample_virtual_edges",
    "save_graph",
    "smote",
    "step_train_counts",
    "subsample_step_imbalance",
    "topology_similarity",
    "train",
]
