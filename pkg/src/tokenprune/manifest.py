"""Run manifests: line-oriented key=value files with bracketed sections.

Two sections are defined. [config] carries every pipeline hyperparameter;
[episode] carries the grid geometry, the step count, and the per-step input
paths. Paths are resolved relative to the manifest's directory and must
exist at load time. Unknown sections or keys are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .core import TokenGrid
from .errors import ConfigError, FormatError
from .pipeline import PrunerConfig
from .selection import BudgetPolicy, SelectionConfig
from .strategy import StrategyConfig

_CONFIG_KEYS = (
    "temperature",
    "pool_window",
    "history_decay",
    "smooth_sigma",
    "sensitivity",
    "background_sensitivity",
    "iou_threshold",
    "core_radius",
    "edge_weight",
    "score_threshold",
    "budget_policy",
)
_EPISODE_KEYS = ("rows", "cols", "patch_size", "steps", "text")


@dataclass(frozen=True)
class RunManifest:
    config: PrunerConfig
    grid: TokenGrid
    steps: int
    frames: tuple[Path, ...]
    features: tuple[Path, ...]
    text: Path
    truth: Path | None


def _parse_sections(lines: list[str], path) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current: dict[str, str] | None = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in ("config", "episode"):
                raise FormatError(f"{path}:{lineno}: unknown section [{name}]")
            if name in sections:
                raise FormatError(f"{path}:{lineno}: duplicate section [{name}]")
            current = {}
            sections[name] = current
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected key=value, got {line!r}")
        if current is None:
            raise FormatError(f"{path}:{lineno}: key outside any section")
        key, _, value = line.partition("=")
        key = key.strip()
        if key in current:
            raise FormatError(f"{path}:{lineno}: duplicate key {key!r}")
        current[key] = value.strip()
    return sections


def _pop_typed(section: dict[str, str], key: str, cast, path):
    if key not in section:
        raise FormatError(f"{path}: missing key {key!r}")
    raw = section.pop(key)
    try:
        return cast(raw)
    except ValueError as exc:
        raise FormatError(f"{path}: bad value for {key!r}: {raw!r}") from exc


def _resolve(base: Path, relative: str, path) -> Path:
    resolved = (base / relative).resolve()
    if not resolved.is_file():
        raise FormatError(f"{path}: referenced path does not exist: {relative}")
    return resolved


def load_manifest(path: str | Path) -> RunManifest:
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"manifest not found: {path}")
    sections = _parse_sections(path.read_text().splitlines(), path)
    for required in ("config", "episode"):
        if required not in sections:
            raise FormatError(f"{path}: missing section [{required}]")

    cfg = sections["config"]
    temperature = _pop_typed(cfg, "temperature", float, path)
    pool_window = _pop_typed(cfg, "pool_window", int, path)
    history_decay = _pop_typed(cfg, "history_decay", float, path)
    smooth_sigma = _pop_typed(cfg, "smooth_sigma", float, path)
    sensitivity = _pop_typed(cfg, "sensitivity", float, path)
    background_sensitivity = _pop_typed(cfg, "background_sensitivity", float, path)
    iou_threshold = _pop_typed(cfg, "iou_threshold", float, path)
    core_radius = _pop_typed(cfg, "core_radius", float, path)
    edge_weight = _pop_typed(cfg, "edge_weight", float, path)
    score_threshold = _pop_typed(cfg, "score_threshold", float, path)
    policy_name = _pop_typed(cfg, "budget_policy", str, path)
    try:
        policy = BudgetPolicy(policy_name)
    except ValueError:
        raise FormatError(f"{path}: unknown budget_policy {policy_name!r}")
    budget = None
    if "budget" in cfg:
        budget = _pop_typed(cfg, "budget", int, path)
    if cfg:
        raise FormatError(f"{path}: unknown config key {sorted(cfg)[0]!r}")

    episode = sections["episode"]
    rows = _pop_typed(episode, "rows", int, path)
    cols = _pop_typed(episode, "cols", int, path)
    patch_size = _pop_typed(episode, "patch_size", int, path)
    steps = _pop_typed(episode, "steps", int, path)
    if steps < 1:
        raise FormatError(f"{path}: steps must be at least 1, got {steps}")
    base = path.parent
    text = _resolve(base, _pop_typed(episode, "text", str, path), path)
    truth = None
    if "truth" in episode:
        truth = _resolve(base, episode.pop("truth"), path)
    frames, features = [], []
    for t in range(steps):
        frames.append(_resolve(base, _pop_typed(episode, f"frame_{t}", str, path), path))
        features.append(_resolve(base, _pop_typed(episode, f"feature_{t}", str, path), path))
    if episode:
        raise FormatError(f"{path}: unknown episode key {sorted(episode)[0]!r}")

    try:
        grid = TokenGrid(rows, cols, patch_size)
        config = PrunerConfig(
            temperature=temperature,
            pool_window=pool_window,
            history_decay=history_decay,
            smooth_sigma=smooth_sigma,
            strategy=StrategyConfig(
                sensitivity=sensitivity,
                background_sensitivity=background_sensitivity,
                iou_threshold=iou_threshold,
                core_radius=core_radius,
            ),
            selection=SelectionConfig(
                edge_weight=edge_weight,
                score_threshold=score_threshold,
                budget=budget,
                budget_policy=policy,
            ),
        )
    except ConfigError:
        raise
    return RunManifest(
        config=config,
        grid=grid,
        steps=steps,
        frames=tuple(frames),
        features=tuple(features),
        text=text,
        truth=truth,
    )


def save_manifest(
    path: str | Path,
    config: PrunerConfig,
    grid: TokenGrid,
    steps: int,
    frames: list[str],
    features: list[str],
    text: str,
    truth: str | None = None,
) -> None:
    """Write a manifest with paths relative to the manifest location."""
    lines = ["[config]"]
    lines.append(f"temperature={config.temperature!r}")
    lines.append(f"pool_window={config.pool_window}")
    lines.append(f"history_decay={config.history_decay!r}")
    lines.append(f"smooth_sigma={config.smooth_sigma!r}")
    lines.append(f"sensitivity={config.strategy.sensitivity!r}")
    lines.append(f"background_sensitivity={config.strategy.background_sensitivity!r}")
    lines.append(f"iou_threshold={config.strategy.iou_threshold!r}")
    lines.append(f"core_radius={config.strategy.core_radius!r}")
    lines.append(f"edge_weight={config.selection.edge_weight!r}")
    lines.append(f"score_threshold={config.selection.score_threshold!r}")
    lines.append(f"budget_policy={config.selection.budget_policy.value}")
    if config.selection.budget is not None:
        lines.append(f"budget={config.selection.budget}")
    lines.append("")
    lines.append("[episode]")
    lines.append(f"rows={grid.rows}")
    lines.append(f"cols={grid.cols}")
    lines.append(f"patch_size={grid.patch_size}")
    lines.append(f"steps={steps}")
    lines.append(f"text={text}")
    if truth is not None:
        lines.append(f"truth={truth}")
    for t in range(steps):
        lines.append(f"frame_{t}={frames[t]}")
        lines.append(f"feature_{t}={features[t]}")
    Path(path).write_text("\n".join(lines) + "\n")
