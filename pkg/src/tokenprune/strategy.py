"""IoU-gated selection of the base retention set.

Both priors are binarized with adaptive mean + k*std thresholds. The overlap
(IoU) of the two masks gates between two regimes: while intent and motion
disagree, only tokens weak in BOTH priors are dropped; once they agree, only
the core of the semantic mask plus the motion mask survives.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import BinaryMask, IndexSet, ScoreVector, mean_std
from .errors import ConfigError, ShapeError


class Mode(enum.Enum):
    CONSERVATIVE = "conservative"
    AGGRESSIVE = "aggressive"


@dataclass(frozen=True)
class ModeDecision:
    """Selected regime together with the gating IoU value."""

    mode: Mode
    iou: float


@dataclass(frozen=True)
class StrategyConfig:
    """Knobs of the gated selection.

    sensitivity: threshold coefficient for both prior masks.
    background_sensitivity: negative coefficient of the double-weak exclusion.
    iou_threshold: overlap above which the aggressive regime activates.
    core_radius: grid-cell radius kept around the semantic peak.
    """

    sensitivity: float = 0.5
    background_sensitivity: float = -0.5
    iou_threshold: float = 0.05
    core_radius: float = 3.0

    def __post_init__(self):
        if self.background_sensitivity >= 0:
            raise ConfigError(
                f"background_sensitivity must be negative, got {self.background_sensitivity}"
            )
        if not 0.0 <= self.iou_threshold <= 1.0:
            raise ConfigError(
                f"iou_threshold must be in [0, 1], got {self.iou_threshold}"
            )
        if self.core_radius <= 0:
            raise ConfigError(f"core_radius must be positive, got {self.core_radius}")


def binarize_adaptive(scores: ScoreVector, coeff: float) -> BinaryMask:
    """Bits where score strictly exceeds mean + coeff * population std."""
    mean, std = mean_std(scores)
    return BinaryMask(scores.values > mean + coeff * std, scores.grid)


def mask_iou(a: BinaryMask, b: BinaryMask) -> float:
    """Intersection over union of two masks; 0 when both are empty."""
    if a.grid != b.grid:
        raise ShapeError(f"mask grids differ: {a.grid} vs {b.grid}")
    union = int(np.count_nonzero(a.bits | b.bits))
    if union == 0:
        return 0.0
    inter = int(np.count_nonzero(a.bits & b.bits))
    return inter / union


def conservative_retention(
    s_sem: ScoreVector, s_temp: ScoreVector, background_sensitivity: float
) -> IndexSet:
    """Keep every token that is not weak in both priors simultaneously."""
    if background_sensitivity >= 0:
        raise ConfigError(
            f"background_sensitivity must be negative, got {background_sensitivity}"
        )
    if s_sem.grid != s_temp.grid:
        raise ShapeError(f"prior grids differ: {s_sem.grid} vs {s_temp.grid}")
    mean_sem, std_sem = mean_std(s_sem)
    mean_temp, std_temp = mean_std(s_temp)
    weak_sem = s_sem.values < mean_sem + background_sensitivity * std_sem
    weak_temp = s_temp.values < mean_temp + background_sensitivity * std_temp
    background = weak_sem & weak_temp
    return IndexSet.from_mask(BinaryMask(~background, s_sem.grid))


def core_semantic_mask(
    s_sem: ScoreVector, b_sem: BinaryMask, radius: float
) -> BinaryMask:
    """Restrict the semantic mask to cells within radius of its peak.

    The peak is the argmax of the scores, lowest flat index on ties; distance
    is Euclidean in grid-cell coordinates.
    """
    peak = int(np.argmax(s_sem.values))
    grid = s_sem.grid
    peak_row, peak_col = grid.rc(peak)
    rows = np.arange(grid.total()) // grid.cols
    cols = np.arange(grid.total()) % grid.cols
    dist_sq = (rows - peak_row) ** 2 + (cols - peak_col) ** 2
    within = dist_sq.astype(np.float64) <= radius * radius
    return BinaryMask(b_sem.bits & within, grid)


def retention_set(
    s_sem: ScoreVector, s_temp: ScoreVector, cfg: StrategyConfig
) -> tuple[IndexSet, ModeDecision]:
    """Base retained set plus the mode decision that produced it."""
    if s_sem.grid != s_temp.grid:
        raise ShapeError(f"prior grids differ: {s_sem.grid} vs {s_temp.grid}")
    b_sem = binarize_adaptive(s_sem, cfg.sensitivity)
    b_temp = binarize_adaptive(s_temp, cfg.sensitivity)
    iou = mask_iou(b_sem, b_temp)
    if iou <= cfg.iou_threshold:
        kept = conservative_retention(s_sem, s_temp, cfg.background_sensitivity)
        return kept, ModeDecision(Mode.CONSERVATIVE, iou)
    core = core_semantic_mask(s_sem, b_sem, cfg.core_radius)
    kept = IndexSet.from_mask(core | b_temp)
    return kept, ModeDecision(Mode.AGGRESSIVE, iou)
