"""Temporal saliency from second-order feature differences.

The per-token second difference cancels constant and linearly drifting
features (camera pan, slow illumination change) and responds to jumps. The
response is accumulated over time with an exponential moving average, then
spatially regularized by a grayscale closing and a Gaussian blur.

A MotionState is single-writer: one episode's state must be mutated by at
most one thread at a time. All sub-operations are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ScoreVector, minmax_array
from .errors import ConfigError, ShapeError
from .semantic import FeatureMatrix


@dataclass(frozen=True)
class StructuringElement:
    """Neighborhood of the morphological operators: a 3x3 all-ones square."""

    size: int = 3

    def __post_init__(self):
        if self.size != 3:
            raise ConfigError("structuring element is fixed to 3x3")


SQUARE_3X3 = StructuringElement()


@dataclass
class MotionState:
    """Rolling per-episode state: two feature frames, the accumulated motion
    map, and the number of frames consumed so far."""

    prev1: FeatureMatrix | None = None
    prev2: FeatureMatrix | None = None
    history: np.ndarray | None = None
    step: int = field(default=0)


def second_order_diff(
    xt: FeatureMatrix, xt1: FeatureMatrix, xt2: FeatureMatrix
) -> ScoreVector:
    """Per-token L2 norm of (x_t - 2 x_{t-1} + x_{t-2}) over the feature dim."""
    if xt.tokens.shape != xt1.tokens.shape or xt.tokens.shape != xt2.tokens.shape:
        raise ShapeError(
            f"frame shapes differ: {xt.tokens.shape}, {xt1.tokens.shape}, "
            f"{xt2.tokens.shape}"
        )
    # single temporary: (x - y) - y + z
    delta = xt.tokens - xt1.tokens
    delta -= xt1.tokens
    delta += xt2.tokens
    return ScoreVector(np.sqrt(np.einsum("ij,ij->i", delta, delta)), xt.grid)


def history_accumulate(
    motion_grid: np.ndarray, state: MotionState, gamma: float
) -> np.ndarray:
    """Elementwise EMA update, written back into the state.

    The history starts as a zero grid when the state has none yet.
    """
    if not 0.0 <= gamma < 1.0:
        raise ConfigError(f"history decay must be in [0, 1), got {gamma}")
    motion_grid = np.asarray(motion_grid, dtype=np.float64)
    previous = state.history
    if previous is None:
        previous = np.zeros_like(motion_grid)
    elif previous.shape != motion_grid.shape:
        raise ShapeError(
            f"history shape {previous.shape} does not match motion grid "
            f"{motion_grid.shape}"
        )
    accumulated = (1.0 - gamma) * motion_grid + gamma * previous
    state.history = accumulated
    return accumulated


def _neighborhood_extreme(m: np.ndarray, take_max: bool) -> np.ndarray:
    h, w = m.shape
    padded = np.pad(m, 1, mode="edge")
    stacked = np.stack(
        [padded[dr : dr + h, dc : dc + w] for dr in range(3) for dc in range(3)]
    )
    return stacked.max(axis=0) if take_max else stacked.min(axis=0)


def morph_dilate(m: np.ndarray, se: StructuringElement = SQUARE_3X3) -> np.ndarray:
    """Grayscale dilation: 3x3 neighborhood max under replicate padding."""
    return _neighborhood_extreme(np.asarray(m, dtype=np.float64), take_max=True)


def morph_erode(m: np.ndarray, se: StructuringElement = SQUARE_3X3) -> np.ndarray:
    """Grayscale erosion: 3x3 neighborhood min under replicate padding."""
    return _neighborhood_extreme(np.asarray(m, dtype=np.float64), take_max=False)


def morph_close(m: np.ndarray, se: StructuringElement = SQUARE_3X3) -> np.ndarray:
    return morph_erode(morph_dilate(m, se), se)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 2-D Gaussian with standard deviation sigma, radius ceil(2*sigma)."""
    if sigma <= 0:
        raise ConfigError(f"smoothing sigma must be positive, got {sigma}")
    radius = math.ceil(2.0 * sigma)
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    sq = ax * ax
    kernel = np.exp(-(sq[:, None] + sq[None, :]) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def gaussian_smooth(m: np.ndarray, sigma: float) -> np.ndarray:
    """Blur with the normalized Gaussian kernel under replicate padding."""
    kernel = gaussian_kernel(sigma)
    m = np.asarray(m, dtype=np.float64)
    h, w = m.shape
    radius = kernel.shape[0] // 2
    padded = np.pad(m, radius, mode="edge")
    out = np.zeros((h, w), dtype=np.float64)
    for dr in range(kernel.shape[0]):
        for dc in range(kernel.shape[1]):
            out += kernel[dr, dc] * padded[dr : dr + h, dc : dc + w]
    return out


def motion_prior(
    xt: FeatureMatrix, state: MotionState, gamma: float, sigma: float
) -> ScoreVector:
    """Normalized temporal saliency in [0, 1]; advances the episode state.

    The first two frames of an episode have no second difference, so they
    return the all-zero vector and only record feature history (cold start).
    """
    if not 0.0 <= gamma < 1.0:
        raise ConfigError(f"history decay must be in [0, 1), got {gamma}")
    if sigma <= 0:
        raise ConfigError(f"smoothing sigma must be positive, got {sigma}")
    grid = xt.grid
    if state.step >= 2:
        diff = second_order_diff(xt, state.prev1, state.prev2)
        motion_grid = diff.values.reshape(grid.rows, grid.cols)
        accumulated = history_accumulate(motion_grid, state, gamma)
        smoothed = gaussian_smooth(morph_close(accumulated), sigma)
        scores = minmax_array(smoothed.reshape(-1))
    else:
        scores = np.zeros(grid.total(), dtype=np.float64)
    state.prev2 = state.prev1
    state.prev1 = xt
    state.step += 1
    return ScoreVector(scores, grid)
