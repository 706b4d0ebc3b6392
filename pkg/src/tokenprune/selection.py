"""Final token selection: score fusion, threshold anchors, optional budgets.

The fused priority score is the sum of the two normalized priors plus a
weighted edge term, deliberately NOT re-normalized: the anchor threshold is
calibrated against the raw [0, 2 + edge_weight] range.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import IndexSet, ScoreVector, TokenGrid
from .errors import ConfigError, ShapeError


class BudgetPolicy(enum.Enum):
    OFF = "off"
    CAP_ONLY = "cap"
    EXACT = "exact"


@dataclass(frozen=True)
class SelectionConfig:
    """edge_weight scales the edge term; score_threshold admits anchors;
    budget (with a policy other than OFF) bounds or fixes the kept count."""

    edge_weight: float = 1.0
    score_threshold: float = 1.5
    budget: int | None = None
    budget_policy: BudgetPolicy = BudgetPolicy.OFF

    def __post_init__(self):
        if self.edge_weight < 0:
            raise ConfigError(f"edge_weight must be non-negative, got {self.edge_weight}")
        if self.budget is not None and self.budget < 1:
            raise ConfigError(f"budget must be at least 1, got {self.budget}")
        if self.budget_policy is not BudgetPolicy.OFF and self.budget is None:
            raise ConfigError(
                f"budget_policy {self.budget_policy.value} requires a budget"
            )


def priority_score(
    s_sem: ScoreVector, s_temp: ScoreVector, e: ScoreVector, edge_weight: float
) -> ScoreVector:
    """Fused per-token priority: s_sem + s_temp + edge_weight * e."""
    if edge_weight < 0:
        raise ConfigError(f"edge_weight must be non-negative, got {edge_weight}")
    if s_sem.grid != s_temp.grid or s_sem.grid != e.grid:
        raise ShapeError("priority inputs are bound to different grids")
    return ScoreVector(
        s_sem.values + s_temp.values + edge_weight * e.values, s_sem.grid
    )


def _top_by_score(candidates: list[int], scores: np.ndarray, count: int) -> list[int]:
    # Highest score first, ties broken by lower index.
    ranked = sorted(candidates, key=lambda i: (-scores[i], i))
    return ranked[:count]


def gather_final(base: IndexSet, scores: ScoreVector, cfg: SelectionConfig) -> IndexSet:
    """Union of the base set with every token above the anchor threshold,
    then the configured budget policy."""
    if base.grid != scores.grid:
        raise ShapeError("base set and scores are bound to different grids")
    if cfg.budget_policy is not BudgetPolicy.OFF and cfg.budget is None:
        raise ConfigError(f"budget_policy {cfg.budget_policy.value} requires a budget")
    anchors = np.flatnonzero(scores.values > cfg.score_threshold)
    selected = sorted(base.to_set().union(int(i) for i in anchors))
    if cfg.budget_policy is BudgetPolicy.OFF:
        return IndexSet(tuple(selected), scores.grid)

    total = scores.grid.total()
    if cfg.budget > total:
        raise ConfigError(f"budget {cfg.budget} exceeds token count {total}")
    values = scores.values
    if len(selected) > cfg.budget:
        selected = _top_by_score(selected, values, cfg.budget)
    if cfg.budget_policy is BudgetPolicy.EXACT and len(selected) < cfg.budget:
        outside = [i for i in range(total) if i not in set(selected)]
        selected = selected + _top_by_score(outside, values, cfg.budget - len(selected))
    return IndexSet(tuple(sorted(selected)), scores.grid)


def retention_ratio(result: IndexSet, grid: TokenGrid) -> float:
    """Fraction of tokens kept."""
    return len(result) / grid.total()
