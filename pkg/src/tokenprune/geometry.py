"""Edge-strength prior from the raw observation image.

Pipeline: grayscale -> 3x3 directional gradients -> magnitude -> per-patch
mean -> min-max normalize. Everything is pure and thread-safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ScoreVector, TokenGrid, minmax_array
from .errors import DataError, ShapeError

# Standard 3x3 horizontal-derivative kernel; the vertical one is its transpose.
# Applied as correlation (no flip); only the magnitude is consumed downstream.
GRADIENT_KERNEL_X = np.array(
    [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]]
)
GRADIENT_KERNEL_Y = GRADIENT_KERNEL_X.T.copy()

# ITU-R BT.601 luma weights.
_LUMA_R, _LUMA_G, _LUMA_B = 0.299, 0.587, 0.114


@dataclass(frozen=True)
class RgbImage:
    """8-bit RGB image, pixels shaped (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise ShapeError(f"RGB pixels must be (H, W, 3), got {pixels.shape}")
        if pixels.dtype != np.uint8:
            raise DataError(f"RGB pixels must be uint8, got {pixels.dtype}")
        pixels = pixels.copy()
        pixels.flags.writeable = False
        object.__setattr__(self, "pixels", pixels)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class GrayImage:
    """Single-channel image with finite real values, shaped (height, width).

    Holds both luminance maps (range [0, 255]) and derived maps such as
    gradient magnitudes, whose range can exceed 255.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ShapeError(f"gray values must be 2-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError("gray image contains non-finite values")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class GradientPair:
    """Horizontal and vertical derivative responses of a gray image."""

    gx: np.ndarray
    gy: np.ndarray

    def __post_init__(self):
        gx = np.asarray(self.gx, dtype=np.float64)
        gy = np.asarray(self.gy, dtype=np.float64)
        if gx.shape != gy.shape or gx.ndim != 2:
            raise ShapeError(f"gradient shapes differ: {gx.shape} vs {gy.shape}")
        object.__setattr__(self, "gx", gx)
        object.__setattr__(self, "gy", gy)


def to_grayscale(img: RgbImage) -> GrayImage:
    """BT.601 luminance in [0, 255]."""
    px = img.pixels.astype(np.float64)
    lum = _LUMA_R * px[..., 0] + _LUMA_G * px[..., 1] + _LUMA_B * px[..., 2]
    return GrayImage(lum)


def correlate3x3(values: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """3x3 correlation under replicate (clamp-to-edge) padding."""
    h, w = values.shape
    padded = np.pad(values, 1, mode="edge")
    out = np.zeros((h, w), dtype=np.float64)
    for dr in range(3):
        for dc in range(3):
            weight = kernel[dr, dc]
            if weight != 0.0:
                out += weight * padded[dr : dr + h, dc : dc + w]
    return out


def sobel_gradients(img: GrayImage) -> GradientPair:
    """Directional gradients; requires at least a 3x3 image."""
    if img.height < 3 or img.width < 3:
        raise DataError(
            f"gradient operator needs an image of at least 3x3, "
            f"got {img.height}x{img.width}"
        )
    gx = correlate3x3(img.values, GRADIENT_KERNEL_X)
    gy = correlate3x3(img.values, GRADIENT_KERNEL_Y)
    return GradientPair(gx, gy)


def edge_magnitude(g: GradientPair) -> GrayImage:
    return GrayImage(np.hypot(g.gx, g.gy))


def aggregate_patches(edges: GrayImage, grid: TokenGrid) -> ScoreVector:
    """Mean edge response over each patch's pixel block, one score per token."""
    p = grid.patch_size
    if edges.height != grid.rows * p or edges.width != grid.cols * p:
        raise ShapeError(
            f"edge map {edges.height}x{edges.width} does not cover a "
            f"{grid.rows}x{grid.cols} grid of {p}px patches"
        )
    blocks = edges.values.reshape(grid.rows, p, grid.cols, p)
    return ScoreVector(blocks.mean(axis=(1, 3)).reshape(-1), grid)


def geometric_prior(img: RgbImage, grid: TokenGrid) -> ScoreVector:
    """Normalized per-token edge strength in [0, 1]."""
    if img.height != grid.pixel_height or img.width != grid.pixel_width:
        raise ShapeError(
            f"image {img.height}x{img.width} is not bound to grid "
            f"{grid.rows}x{grid.cols} with patch {grid.patch_size}"
        )
    edges = edge_magnitude(sobel_gradients(to_grayscale(img)))
    raw = aggregate_patches(edges, grid)
    return ScoreVector(minmax_array(raw.values), grid)
