"""Grid geometry and the score/mask/index containers shared by every prior.

All containers are immutable once constructed and safe to share between
threads. Flat token indices map to grid cells row-major:
``index = row * cols + col``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConfigError, DataError, ShapeError


@dataclass(frozen=True)
class TokenGrid:
    """Dense rows x cols patch grid over an image with square patches."""

    rows: int
    cols: int
    patch_size: int

    def __post_init__(self):
        for name in ("rows", "cols", "patch_size"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")

    def total(self) -> int:
        return self.rows * self.cols

    def rc(self, index: int) -> tuple[int, int]:
        """Grid cell (row, col) of a flat token index."""
        return divmod(index, self.cols)

    @property
    def pixel_height(self) -> int:
        return self.rows * self.patch_size

    @property
    def pixel_width(self) -> int:
        return self.cols * self.patch_size


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ScoreVector:
    """Per-token real-valued scores bound to a grid.

    Values are always finite; vectors produced by a normalization step
    additionally lie in [0, 1].
    """

    values: np.ndarray
    grid: TokenGrid

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ShapeError(f"score vector must be 1-D, got shape {values.shape}")
        if values.shape[0] != self.grid.total():
            raise ShapeError(
                f"score vector length {values.shape[0]} does not match "
                f"grid with {self.grid.total()} tokens"
            )
        if not np.all(np.isfinite(values)):
            raise DataError("score vector contains non-finite values")
        object.__setattr__(self, "values", _frozen_array(values, np.float64))

    def __len__(self) -> int:
        return self.values.shape[0]

    def as_grid(self) -> np.ndarray:
        """Row-major 2-D view of the scores (a copy)."""
        return self.values.reshape(self.grid.rows, self.grid.cols).copy()


@dataclass(frozen=True)
class BinaryMask:
    """Per-token boolean mask bound to a grid."""

    bits: np.ndarray
    grid: TokenGrid

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 1 or bits.shape[0] != self.grid.total():
            raise ShapeError(
                f"mask shape {bits.shape} does not match grid with "
                f"{self.grid.total()} tokens"
            )
        object.__setattr__(self, "bits", _frozen_array(bits, bool))

    def count(self) -> int:
        return int(np.count_nonzero(self.bits))

    def __and__(self, other: "BinaryMask") -> "BinaryMask":
        _require_same_grid(self.grid, other.grid)
        return BinaryMask(self.bits & other.bits, self.grid)

    def __or__(self, other: "BinaryMask") -> "BinaryMask":
        _require_same_grid(self.grid, other.grid)
        return BinaryMask(self.bits | other.bits, self.grid)

    def __invert__(self) -> "BinaryMask":
        return BinaryMask(~self.bits, self.grid)


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing token indices in [0, grid.total())."""

    indices: tuple[int, ...]
    grid: TokenGrid

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        total = self.grid.total()
        for prev, cur in zip((-1,) + indices, indices):
            if cur <= prev:
                raise DataError(f"indices must be strictly increasing, got {indices}")
            if cur >= total:
                raise DataError(f"index {cur} out of range for {total} tokens")
        if indices and indices[0] < 0:
            raise DataError(f"negative index in {indices}")
        object.__setattr__(self, "indices", indices)

    @classmethod
    def from_mask(cls, mask: BinaryMask) -> "IndexSet":
        return cls(tuple(int(i) for i in np.flatnonzero(mask.bits)), mask.grid)

    @classmethod
    def from_iterable(cls, indices: Iterable[int], grid: TokenGrid) -> "IndexSet":
        return cls(tuple(sorted(set(int(i) for i in indices))), grid)

    def to_set(self) -> frozenset[int]:
        return frozenset(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, index: int) -> bool:
        return index in self.to_set()


def _require_same_grid(a: TokenGrid, b: TokenGrid) -> None:
    if a != b:
        raise ShapeError(f"grids differ: {a} vs {b}")


def minmax_array(values: np.ndarray) -> np.ndarray:
    """Min-max rescale to [0, 1]; a constant vector maps to all zeros."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise DataError("cannot normalize an empty vector")
    if not np.all(np.isfinite(values)):
        raise DataError("cannot normalize non-finite values")
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def minmax_normalize(v: ScoreVector) -> ScoreVector:
    return ScoreVector(minmax_array(v.values), v.grid)


def mean_std(v: ScoreVector | np.ndarray) -> tuple[float, float]:
    """Arithmetic mean and population standard deviation (divisor N)."""
    values = v.values if isinstance(v, ScoreVector) else np.asarray(v, dtype=np.float64)
    if values.size == 0:
        raise DataError("cannot take statistics of an empty vector")
    return float(values.mean()), float(values.std())


def grid_reshape_roundtrip(v: ScoreVector) -> ScoreVector:
    """Reshape to the 2-D grid and flatten back; exact identity, row-major."""
    reshaped = v.values.reshape(v.grid.rows, v.grid.cols)
    return ScoreVector(reshaped.reshape(-1), v.grid)
