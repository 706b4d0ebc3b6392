"""Deterministic synthetic episodes with known target/mover ground truth.

All randomness comes from a self-contained xorshift64* generator, so a given
spec produces a bit-identical episode on every platform. Generated feature
and text values are constrained to the 1/64 dyadic lattice (or explicitly
rounded to float32), which makes serialization through the 32-bit tensor
format lossless.

PRNG (xorshift64*):
    state' = x after x ^= x >> 12; x ^= (x << 25) mod 2^64; x ^= x >> 27
    output = (state' * 0x2545F4914F6CDD1D) mod 2^64
    seed 0 is replaced by 0x9E3779B97F4A7C15.
    next_float = (output >> 11) / 2^53, next_below(n) = output mod n.

Scenarios:
    STATIC     constant scene; optional per-step lattice noise on features.
    LINEAR_PAN per-token features follow base + t * drift exactly (the second
               difference is identically zero by construction); the image
               stripe pattern slides one pixel per step.
    APPROACH   a bright target block occupies fixed cells, a dark mover cell
               advances one column per step along the target's row until it
               parks adjacent to the block; the mover's cell gets a fixed
               feature jump; the text embedding is the centered, normalized
               target feature (or the distractor's when misaligned_text).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import TokenGrid
from .errors import ConfigError, DataError, FormatError
from .geometry import RgbImage
from .pipeline import PruneResult
from .semantic import FeatureMatrix, TextEmbedding

_MASK64 = (1 << 64) - 1
_SEED_FALLBACK = 0x9E3779B97F4A7C15
_MULTIPLIER = 0x2545F4914F6CDD1D

_BG_STATIC = (90, 90, 90)
_FG_STATIC = (210, 210, 210)
_PAN_DARK = (80, 80, 80)
_PAN_LIGHT = (180, 180, 180)
_BG_APPROACH = (96, 96, 96)
_TARGET_COLOR = (230, 230, 230)
_DISTRACTOR_COLOR = (140, 140, 140)
_MOVER_COLOR = (20, 20, 20)


class XorShift64Star:
    """Seeded 64-bit generator; see the module docstring for the exact rules."""

    def __init__(self, seed: int):
        if not 0 <= seed <= _MASK64:
            raise ConfigError(f"seed must fit in 64 bits, got {seed}")
        self._state = seed if seed != 0 else _SEED_FALLBACK

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self._state = x
        return (x * _MULTIPLIER) & _MASK64

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def next_below(self, n: int) -> int:
        return self.next_u64() % n


class Scenario(enum.Enum):
    STATIC = "static"
    LINEAR_PAN = "linearpan"
    APPROACH = "approach"


@dataclass(frozen=True)
class EpisodeSpec:
    seed: int
    steps: int
    grid: TokenGrid
    feat_dim: int
    scenario: Scenario
    noise_scale: float = 0.0
    misaligned_text: bool = False

    def __post_init__(self):
        if not 0 <= self.seed <= _MASK64:
            raise ConfigError(f"seed must fit in 64 bits, got {self.seed}")
        if self.steps < 4:
            raise ConfigError(f"steps must be at least 4, got {self.steps}")
        if self.feat_dim < 2:
            raise ConfigError(f"feat_dim must be at least 2, got {self.feat_dim}")
        if self.noise_scale < 0:
            raise ConfigError(f"noise_scale must be non-negative, got {self.noise_scale}")
        if self.scenario is Scenario.APPROACH:
            if self.grid.rows < 4 or self.grid.cols < 4:
                raise ConfigError("approach needs a grid of at least 4x4")
        if self.misaligned_text:
            if self.scenario is not Scenario.APPROACH:
                raise ConfigError("misaligned_text applies to the approach scenario only")
            if self.grid.rows < 6 or self.grid.cols < 6:
                raise ConfigError("misaligned_text needs a grid of at least 6x6")


@dataclass(frozen=True)
class StepTruth:
    """Flat indices of target cells and mover cells at one step."""

    target: tuple[int, ...]
    mover: tuple[int, ...]


@dataclass(frozen=True)
class Episode:
    images: tuple[RgbImage, ...]
    features: tuple[FeatureMatrix, ...]
    text: TextEmbedding
    truth: tuple[StepTruth, ...]


def _lattice(k: int) -> float:
    return k / 64.0


def _round_lattice(x: float) -> float:
    return math.floor(x * 64.0 + 0.5) / 64.0


def _draw_matrix(rng: XorShift64Star, n: int, d: int) -> np.ndarray:
    out = np.empty((n, d), dtype=np.float64)
    for i in range(n):
        for j in range(d):
            out[i, j] = _lattice(rng.next_below(256))
    return out


def _draw_noise(rng: XorShift64Star, n: int, d: int, scale: float) -> np.ndarray:
    out = np.zeros((n, d), dtype=np.float64)
    if scale == 0.0:
        return out
    for i in range(n):
        for j in range(d):
            out[i, j] = _round_lattice((2.0 * rng.next_float() - 1.0) * scale)
    return out


def _flat_image(grid: TokenGrid, rgb: tuple[int, int, int]) -> np.ndarray:
    pixels = np.empty((grid.pixel_height, grid.pixel_width, 3), dtype=np.uint8)
    pixels[...] = rgb
    return pixels


def _paint_cell(pixels: np.ndarray, grid: TokenGrid, row: int, col: int,
                rgb: tuple[int, int, int]) -> None:
    p = grid.patch_size
    pixels[row * p : (row + 1) * p, col * p : (col + 1) * p] = rgb


def _approach_layout(grid: TokenGrid) -> dict:
    rows, cols = grid.rows, grid.cols
    target_rows = (rows // 2 - 1, rows // 2)
    target_cols = (cols - 3, cols - 2)
    target = tuple(
        sorted(r * cols + c for r in target_rows for c in target_cols)
    )
    has_distractor = rows >= 6 and cols >= 6
    distractor = tuple(
        sorted(r * cols + c for r in (0, 1) for c in (0, 1))
    ) if has_distractor else ()
    return {
        "target": target,
        "distractor": distractor,
        "mover_row": rows // 2,
        "park_col": cols - 4,
    }


def _centered_unit(vec: np.ndarray, column_means: np.ndarray) -> np.ndarray:
    centered = vec - column_means
    norm = float(np.linalg.norm(centered))
    if norm == 0.0:
        raise DataError("degenerate text direction: vector equals the feature mean")
    return centered / norm


def _centered_unit_or_basis(vec: np.ndarray, column_means: np.ndarray) -> np.ndarray:
    # Static and panning scenes have no designated target; any deterministic
    # direction will do when the centered one collapses (e.g. 1x1 grids).
    centered = vec - column_means
    norm = float(np.linalg.norm(centered))
    if norm == 0.0:
        basis = np.zeros_like(vec)
        basis[0] = 1.0
        return basis
    return centered / norm


def generate(spec: EpisodeSpec) -> Episode:
    rng = XorShift64Star(spec.seed)
    grid = spec.grid
    n, d, steps = grid.total(), spec.feat_dim, spec.steps

    base = _draw_matrix(rng, n, d)

    if spec.scenario is Scenario.STATIC:
        center = ((grid.rows - 1) // 2, (grid.cols - 1) // 2)
        pixels = _flat_image(grid, _BG_STATIC)
        _paint_cell(pixels, grid, center[0], center[1], _FG_STATIC)
        image = RgbImage(pixels)
        images, features, truth = [], [], []
        for t in range(steps):
            noise = _draw_noise(rng, n, d, spec.noise_scale)
            images.append(image)
            features.append(FeatureMatrix(base + noise, grid))
            truth.append(StepTruth(target=(), mover=()))
        text = TextEmbedding(_quantize_f32(_centered_unit_or_basis(base[0], base.mean(axis=0))))
        return Episode(tuple(images), tuple(features), text, tuple(truth))

    if spec.scenario is Scenario.LINEAR_PAN:
        drift = np.empty((n, d), dtype=np.float64)
        for i in range(n):
            for j in range(d):
                drift[i, j] = _lattice(rng.next_below(129) - 64)
        images, features, truth = [], [], []
        for t in range(steps):
            noise = _draw_noise(rng, n, d, spec.noise_scale)
            images.append(RgbImage(_pan_stripes(grid, t)))
            features.append(FeatureMatrix(base + t * drift + noise, grid))
            truth.append(StepTruth(target=(), mover=()))
        text = TextEmbedding(_quantize_f32(_centered_unit_or_basis(base[0], base.mean(axis=0))))
        return Episode(tuple(images), tuple(features), text, tuple(truth))

    # APPROACH
    layout = _approach_layout(grid)
    target_vec = np.array([_lattice(rng.next_below(256)) for _ in range(d)])
    distractor_vec = np.array([_lattice(rng.next_below(256)) for _ in range(d)])
    jump_axis = rng.next_below(d)
    jump_value = _round_lattice(max(1.0, 10.0 * spec.noise_scale))

    scene = base.copy()
    for idx in layout["target"]:
        scene[idx] = target_vec
    for idx in layout["distractor"]:
        scene[idx] = distractor_vec

    images, features, truth = [], [], []
    frame0_means = None
    for t in range(steps):
        mover_col = min(t, layout["park_col"])
        mover_idx = layout["mover_row"] * grid.cols + mover_col
        feats = scene.copy()
        feats[mover_idx, jump_axis] += jump_value
        feats += _draw_noise(rng, n, d, spec.noise_scale)
        if t == 0:
            frame0_means = feats.mean(axis=0)
        pixels = _flat_image(grid, _BG_APPROACH)
        for idx in layout["distractor"]:
            _paint_cell(pixels, grid, *grid.rc(idx), _DISTRACTOR_COLOR)
        for idx in layout["target"]:
            _paint_cell(pixels, grid, *grid.rc(idx), _TARGET_COLOR)
        _paint_cell(pixels, grid, layout["mover_row"], mover_col, _MOVER_COLOR)
        images.append(RgbImage(pixels))
        features.append(FeatureMatrix(feats, grid))
        truth.append(StepTruth(target=layout["target"], mover=(mover_idx,)))

    anchor = distractor_vec if spec.misaligned_text else target_vec
    text = TextEmbedding(_quantize_f32(_centered_unit(anchor, frame0_means)))
    return Episode(tuple(images), tuple(features), text, tuple(truth))


def _pan_stripes(grid: TokenGrid, shift: int) -> np.ndarray:
    width = grid.pixel_width
    stripe = grid.patch_size
    pixels = np.empty((grid.pixel_height, width, 3), dtype=np.uint8)
    for x in range(width):
        lit = ((x + shift) // stripe) % 2 == 1
        pixels[:, x] = _PAN_LIGHT if lit else _PAN_DARK
    return pixels


def _quantize_f32(vec: np.ndarray) -> np.ndarray:
    return vec.astype(np.float32).astype(np.float64)


def target_recall(result: PruneResult, truth: StepTruth) -> float:
    """Fraction of target cells present in the kept set."""
    if not truth.target:
        raise DataError("truth has no target cells")
    kept = result.kept.to_set()
    hit = sum(1 for idx in truth.target if idx in kept)
    return hit / len(truth.target)


TRUTH_HEADER = "step,targets,movers"


def write_truth(path, truth: tuple[StepTruth, ...]) -> None:
    """Truth CSV: per step, space-separated flat indices (may be empty)."""
    lines = [TRUTH_HEADER]
    for t, entry in enumerate(truth):
        targets = " ".join(str(i) for i in entry.target)
        movers = " ".join(str(i) for i in entry.mover)
        lines.append(f"{t},{targets},{movers}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_truth(path) -> tuple[StepTruth, ...]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != TRUTH_HEADER:
        raise FormatError(f"{path}: expected header {TRUTH_HEADER!r}")
    truth = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise FormatError(f"{path}:{lineno}: expected 3 fields, got {len(parts)}")
        try:
            step = int(parts[0])
            target = tuple(int(i) for i in parts[1].split()) if parts[1] else ()
            mover = tuple(int(i) for i in parts[2].split()) if parts[2] else ()
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: bad field: {exc}") from exc
        if step != len(truth):
            raise FormatError(
                f"{path}:{lineno}: steps must increase contiguously from 0, got {step}"
            )
        truth.append(StepTruth(target=target, mover=mover))
    return tuple(truth)
