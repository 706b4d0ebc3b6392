"""Figure rendering for trace CSVs.

Writes two PNG figures plus a delimited summary next to each other:
    iou_trace.png   IoU per step with the mode shown as background shading
    retention.png   retention ratio and target recall per step
    summary.csv     the same aggregate numbers `stats` prints, as CSV
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .strategy import Mode
from .trace import TraceRow, compute_stats

_AGGRESSIVE_SHADE = "#f6d5c3"


def _shade_modes(ax, rows: list[TraceRow]) -> None:
    for row in rows:
        if row.mode is Mode.AGGRESSIVE:
            ax.axvspan(row.step - 0.5, row.step + 0.5,
                       color=_AGGRESSIVE_SHADE, lw=0, zorder=0)


def render_report(rows: list[TraceRow], out_dir: Path) -> list[Path]:
    """Render figures and the summary; returns the paths written."""
    out_dir.mkdir(parents=True, exist_ok=True)
    steps = [r.step for r in rows]
    written = []

    fig, ax = plt.subplots(figsize=(7, 3.2), constrained_layout=True)
    _shade_modes(ax, rows)
    ax.plot(steps, [r.iou for r in rows], marker="o", ms=3, color="#2a4d8f")
    ax.set_xlabel("step")
    ax.set_ylabel("mask IoU")
    ax.set_title("semantic-motion alignment (shaded: aggressive mode)")
    iou_path = out_dir / "iou_trace.png"
    fig.savefig(iou_path, dpi=120)
    plt.close(fig)
    written.append(iou_path)

    fig, ax = plt.subplots(figsize=(7, 3.2), constrained_layout=True)
    _shade_modes(ax, rows)
    ax.plot(steps, [r.retention for r in rows], marker="o", ms=3,
            color="#1f7a4d", label="retention")
    recall = [(r.step, r.target_recall) for r in rows if r.target_recall >= 0]
    if recall:
        ax.plot([s for s, _ in recall], [v for _, v in recall], marker="s",
                ms=3, color="#8f2a2a", label="target recall")
    ax.set_xlabel("step")
    ax.set_ylabel("fraction")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(loc="lower left")
    ax.set_title("token retention per step")
    retention_path = out_dir / "retention.png"
    fig.savefig(retention_path, dpi=120)
    plt.close(fig)
    written.append(retention_path)

    stats = compute_stats(rows)
    summary_path = out_dir / "summary.csv"
    summary_path.write_text(
        "metric,value\n"
        f"transition_step,{stats.transition_step}\n"
        f"conservative_steps,{stats.conservative_steps}\n"
        f"aggressive_steps,{stats.aggressive_steps}\n"
        f"conservative_mean_retention,{stats.conservative_mean_retention:.6g}\n"
        f"aggressive_mean_retention,{stats.aggressive_mean_retention:.6g}\n"
        f"iou_min,{stats.iou_min:.6g}\n"
        f"iou_mean,{stats.iou_mean:.6g}\n"
        f"iou_max,{stats.iou_max:.6g}\n"
    )
    written.append(summary_path)
    return written
