"""Training-free visual token pruning.

Scores every visual token with three priors (edge strength from the raw
image, instruction alignment from token/text features, temporal saliency
from second-order feature differences) and selects a retained subset through
an IoU-gated conservative/aggressive strategy with structural anchors.
"""

from .core import (
    BinaryMask,
    IndexSet,
    ScoreVector,
    TokenGrid,
    grid_reshape_roundtrip,
    mean_std,
    minmax_normalize,
)
from .errors import (
    ConfigError,
    DataError,
    FormatError,
    ShapeError,
    TokenPruneError,
)
from .geometry import (
    GradientPair,
    GrayImage,
    RgbImage,
    aggregate_patches,
    edge_magnitude,
    geometric_prior,
    sobel_gradients,
    to_grayscale,
)
from .motion import (
    MotionState,
    StructuringElement,
    gaussian_smooth,
    history_accumulate,
    morph_close,
    morph_dilate,
    morph_erode,
    motion_prior,
    second_order_diff,
)
from .pipeline import Pruner, PrunerConfig, PruneResult, new_pruner
from .selection import (
    BudgetPolicy,
    SelectionConfig,
    gather_final,
    priority_score,
    retention_ratio,
)
from .semantic import (
    FeatureMatrix,
    TextEmbedding,
    center_l2_normalize,
    cross_modal_softmax,
    semantic_prior,
    spatial_avg_pool,
)
from .simulate import (
    Episode,
    EpisodeSpec,
    Scenario,
    StepTruth,
    XorShift64Star,
    generate,
    target_recall,
)
from .strategy import (
    Mode,
    ModeDecision,
    StrategyConfig,
    binarize_adaptive,
    conservative_retention,
    core_semantic_mask,
    mask_iou,
    retention_set,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryMask",
    "BudgetPolicy",
    "ConfigError",
    "DataError",
    "Episode",
    "EpisodeSpec",
    "FeatureMatrix",
    "FormatError",
    "GradientPair",
    "GrayImage",
    "IndexSet",
    "Mode",
    "ModeDecision",
    "MotionState",
    "PruneResult",
    "Pruner",
    "PrunerConfig",
    "RgbImage",
    "Scenario",
    "ScoreVector",
    "SelectionConfig",
    "ShapeError",
    "StepTruth",
    "StrategyConfig",
    "StructuringElement",
    "TextEmbedding",
    "TokenGrid",
    "TokenPruneError",
    "XorShift64Star",
    "aggregate_patches",
    "binarize_adaptive",
    "center_l2_normalize",
    "conservative_retention",
    "core_semantic_mask",
    "cross_modal_softmax",
    "edge_magnitude",
    "gather_final",
    "gaussian_smooth",
    "generate",
    "geometric_prior",
    "grid_reshape_roundtrip",
    "history_accumulate",
    "mask_iou",
    "mean_std",
    "minmax_normalize",
    "morph_close",
    "morph_dilate",
    "morph_erode",
    "motion_prior",
    "new_pruner",
    "priority_score",
    "retention_ratio",
    "retention_set",
    "second_order_diff",
    "semantic_prior",
    "sobel_gradients",
    "spatial_avg_pool",
    "target_recall",
    "to_grayscale",
]
