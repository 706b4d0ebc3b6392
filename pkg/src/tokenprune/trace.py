"""Per-step trace CSV: `step,iou,mode,retention,target_recall`.

Rows are strictly increasing in step starting at 0 with no gaps. Floats are
written with 12 significant digits; target_recall is -1 when no ground truth
is available for the step.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import FormatError
from .strategy import Mode

TRACE_HEADER = "step,iou,mode,retention,target_recall"


@dataclass(frozen=True)
class TraceRow:
    step: int
    iou: float
    mode: Mode
    retention: float
    target_recall: float


def format_trace(rows: list[TraceRow]) -> str:
    lines = [TRACE_HEADER]
    for row in rows:
        lines.append(
            f"{row.step},{row.iou:.12g},{row.mode.value},"
            f"{row.retention:.12g},{row.target_recall:.12g}"
        )
    return "\n".join(lines) + "\n"


def write_trace(path: str | Path, rows: list[TraceRow]) -> None:
    Path(path).write_text(format_trace(rows))


def read_trace(path: str | Path) -> list[TraceRow]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise FormatError(f"{path}: expected header {TRACE_HEADER!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise FormatError(f"{path}:{lineno}: expected 5 fields, got {len(parts)}")
        try:
            step = int(parts[0])
            iou = float(parts[1])
            mode = Mode(parts[2])
            retention = float(parts[3])
            recall = float(parts[4])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: bad field: {exc}") from exc
        if step != len(rows):
            raise FormatError(
                f"{path}:{lineno}: steps must increase contiguously from 0, got {step}"
            )
        rows.append(TraceRow(step, iou, mode, retention, recall))
    if not rows:
        raise FormatError(f"{path}: trace has no rows")
    return rows


@dataclass(frozen=True)
class TraceStats:
    transition_step: int  # first aggressive step, -1 when never reached
    conservative_steps: int
    aggressive_steps: int
    conservative_mean_retention: float
    aggressive_mean_retention: float
    iou_min: float
    iou_mean: float
    iou_max: float


def compute_stats(rows: list[TraceRow]) -> TraceStats:
    aggressive = [r for r in rows if r.mode is Mode.AGGRESSIVE]
    conservative = [r for r in rows if r.mode is Mode.CONSERVATIVE]
    ious = [r.iou for r in rows]

    def _mean(values: list[float]) -> float:
        return sum(values) / len(values) if values else float("nan")

    return TraceStats(
        transition_step=aggressive[0].step if aggressive else -1,
        conservative_steps=len(conservative),
        aggressive_steps=len(aggressive),
        conservative_mean_retention=_mean([r.retention for r in conservative]),
        aggressive_mean_retention=_mean([r.retention for r in aggressive]),
        iou_min=min(ious),
        iou_mean=_mean(ious),
        iou_max=max(ious),
    )
