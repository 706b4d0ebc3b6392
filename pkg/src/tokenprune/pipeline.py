"""Per-episode orchestration: one call per timestep, full diagnostics out.

A Pruner owns the rolling motion state for one episode. Calls validate all
inputs before touching any state, so a failed step leaves the pruner exactly
as it was (safe to retry). One pruner per episode; step/reset need exclusive
access, distinct pruners are independent.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .core import IndexSet, ScoreVector, TokenGrid
from .errors import ConfigError, ShapeError
from .geometry import RgbImage, geometric_prior
from .motion import MotionState, motion_prior
from .selection import (
    BudgetPolicy,
    SelectionConfig,
    gather_final,
    priority_score,
    retention_ratio,
)
from .semantic import FeatureMatrix, TextEmbedding, semantic_prior
from .strategy import ModeDecision, StrategyConfig, retention_set

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrunerConfig:
    """All pipeline hyperparameters in one place.

    Defaults: temperature 0.01, pool window 3, history decay 0.7, smoothing
    sigma 1.0, mask sensitivity 0.5, background sensitivity -0.5, IoU
    threshold 0.05, core radius 3.0, edge weight 1.0, anchor threshold 1.5,
    no budget.
    """

    temperature: float = 0.01
    pool_window: int = 3
    history_decay: float = 0.7
    smooth_sigma: float = 1.0
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)

    def __post_init__(self):
        if self.temperature <= 0:
            raise ConfigError(f"temperature must be positive, got {self.temperature}")
        if (
            not isinstance(self.pool_window, int)
            or self.pool_window < 1
            or self.pool_window % 2 == 0
        ):
            raise ConfigError(
                f"pool_window must be an odd positive integer, got {self.pool_window!r}"
            )
        if not 0.0 <= self.history_decay < 1.0:
            raise ConfigError(
                f"history_decay must be in [0, 1), got {self.history_decay}"
            )
        if self.smooth_sigma <= 0:
            raise ConfigError(f"smooth_sigma must be positive, got {self.smooth_sigma}")


@dataclass(frozen=True)
class PruneResult:
    """Kept set plus every intermediate score, for tracing and analysis."""

    kept: IndexSet
    mode: ModeDecision
    semantic: ScoreVector
    motion: ScoreVector
    edge: ScoreVector
    priority: ScoreVector
    retention: float
    step: int


class Pruner:
    """Stateful per-episode pruner; see the module docstring for contracts."""

    def __init__(self, config: PrunerConfig, grid: TokenGrid):
        if not isinstance(config, PrunerConfig):
            raise ConfigError(f"config must be a PrunerConfig, got {type(config).__name__}")
        if not isinstance(grid, TokenGrid):
            raise ConfigError(f"grid must be a TokenGrid, got {type(grid).__name__}")
        sel = config.selection
        if sel.budget_policy is not BudgetPolicy.OFF and sel.budget > grid.total():
            raise ConfigError(
                f"budget {sel.budget} exceeds token count {grid.total()}"
            )
        self.config = config
        self.grid = grid
        self._state = MotionState()

    @property
    def steps_consumed(self) -> int:
        return self._state.step

    def step(
        self, img: RgbImage, feats: FeatureMatrix, text: TextEmbedding
    ) -> PruneResult:
        """Score, gate, and select for one observation; advances the state.

        Raises without touching state if any input shape disagrees with the
        bound grid.
        """
        grid = self.grid
        if img.height != grid.pixel_height or img.width != grid.pixel_width:
            raise ShapeError(
                f"image {img.height}x{img.width} does not cover grid "
                f"{grid.rows}x{grid.cols} with patch {grid.patch_size}"
            )
        if feats.grid != grid:
            raise ShapeError(f"features bound to {feats.grid}, pruner uses {grid}")
        if text.dim != feats.dim:
            raise ShapeError(
                f"text dimension {text.dim} does not match feature dimension {feats.dim}"
            )

        cfg = self.config
        edge = geometric_prior(img, grid)
        semantic = semantic_prior(feats, text, cfg.temperature, cfg.pool_window)
        motion = motion_prior(feats, self._state, cfg.history_decay, cfg.smooth_sigma)
        base, decision = retention_set(semantic, motion, cfg.strategy)
        priority = priority_score(semantic, motion, edge, cfg.selection.edge_weight)
        kept = gather_final(base, priority, cfg.selection)
        step_index = self._state.step - 1
        if not kept.indices:
            logger.warning("empty retention set at step %d", step_index)
        return PruneResult(
            kept=kept,
            mode=decision,
            semantic=semantic,
            motion=motion,
            edge=edge,
            priority=priority,
            retention=retention_ratio(kept, grid),
            step=step_index,
        )

    def reset(self) -> None:
        """Return to the freshly constructed state (cold start again)."""
        self._state = MotionState()


def new_pruner(config: PrunerConfig, grid: TokenGrid) -> Pruner:
    """Construct a pruner; alias of the Pruner constructor."""
    return Pruner(config, grid)
