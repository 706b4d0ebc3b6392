"""Instruction-aligned saliency from visual token features and a text embedding.

Token features are spatially centered and row-normalized, matched against the
unit text vector via a temperature-scaled softmax, then spatially pooled and
min-max normalized. Pure and thread-safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ScoreVector, TokenGrid, minmax_array
from .errors import ConfigError, DataError, ShapeError


@dataclass(frozen=True)
class FeatureMatrix:
    """N x D visual token features bound to a grid."""

    tokens: np.ndarray
    grid: TokenGrid

    def __post_init__(self):
        tokens = np.asarray(self.tokens, dtype=np.float64)
        if tokens.ndim != 2:
            raise ShapeError(f"features must be 2-D (N, D), got {tokens.shape}")
        if tokens.shape[0] != self.grid.total():
            raise ShapeError(
                f"feature rows {tokens.shape[0]} do not match grid with "
                f"{self.grid.total()} tokens"
            )
        if tokens.shape[1] < 1:
            raise ShapeError("feature dimension must be at least 1")
        if not np.all(np.isfinite(tokens)):
            raise DataError("feature matrix contains non-finite values")
        tokens = tokens.copy()
        tokens.flags.writeable = False
        object.__setattr__(self, "tokens", tokens)

    @property
    def dim(self) -> int:
        return self.tokens.shape[1]


@dataclass(frozen=True)
class TextEmbedding:
    """Single D-dimensional instruction embedding."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] < 1:
            raise ShapeError(f"text embedding must be a non-empty vector, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError("text embedding contains non-finite values")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def _centered_unit_rows(tokens: np.ndarray) -> np.ndarray:
    # One temporary, in-place normalization; rows that center to zero stay zero.
    centered = tokens - tokens.mean(axis=0)
    norms = np.sqrt(np.einsum("ij,ij->i", centered, centered))
    norms[norms == 0.0] = 1.0
    centered /= norms[:, None]
    return centered


def center_l2_normalize(feats: FeatureMatrix) -> FeatureMatrix:
    """Subtract the per-dimension mean over tokens, then scale rows to unit norm.

    Rows that are zero after centering stay zero ("no signal") rather than
    being renormalized.
    """
    return FeatureMatrix(_centered_unit_rows(feats.tokens), feats.grid)


def _unit(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    return vec if norm == 0.0 else vec / norm


def cross_modal_softmax(feats: FeatureMatrix, text: TextEmbedding, tau: float) -> ScoreVector:
    """Temperature-scaled softmax over token-text dot products.

    Computed with max-subtraction; at the default temperature of 0.01 the raw
    logits reach magnitude ~100 and would overflow otherwise.
    """
    if tau <= 0:
        raise ConfigError(f"temperature must be positive, got {tau}")
    if text.dim != feats.dim:
        raise ShapeError(
            f"text dimension {text.dim} does not match feature dimension {feats.dim}"
        )
    dots = _centered_unit_rows(feats.tokens) @ _unit(text.values)
    logits = dots / tau
    shifted = logits - logits.max()
    weights = np.exp(shifted)
    return ScoreVector(weights / weights.sum(), feats.grid)


def spatial_avg_pool(scores: ScoreVector, window: int) -> ScoreVector:
    """Window x window mean on the 2-D grid, stride 1, replicate padding."""
    if not isinstance(window, int) or window < 1 or window % 2 == 0:
        raise ConfigError(f"pool window must be an odd positive integer, got {window!r}")
    if window == 1:
        return ScoreVector(scores.values, scores.grid)
    rows, cols = scores.grid.rows, scores.grid.cols
    radius = window // 2
    padded = np.pad(scores.values.reshape(rows, cols), radius, mode="edge")
    acc = np.zeros((rows, cols), dtype=np.float64)
    for dr in range(window):
        for dc in range(window):
            acc += padded[dr : dr + rows, dc : dc + cols]
    return ScoreVector(acc.reshape(-1) / (window * window), scores.grid)


def semantic_prior(
    feats: FeatureMatrix, text: TextEmbedding, tau: float, window: int
) -> ScoreVector:
    """Normalized instruction-alignment score in [0, 1] per token."""
    pooled = spatial_avg_pool(cross_modal_softmax(feats, text, tau), window)
    return ScoreVector(minmax_array(pooled.values), feats.grid)
