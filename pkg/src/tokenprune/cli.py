"""Command-line harness.

Subcommands:
    gen      write a synthetic episode (frames, features, text, truth, manifest)
    prune    run the pipeline over a manifest, write kept indices + trace CSV
    stats    summarize a trace CSV
    overlay  darken pruned patches of a frame to 25% brightness
    report   render figures and a delimited summary from a trace CSV

Exit codes: 0 success, 1 usage error, 2 I/O or format error, 3 shape or
config error. Every failure prints a one-line diagnostic to stderr. All
emitted artifacts are pure functions of the inputs (no timestamps).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .core import BinaryMask, TokenGrid
from .errors import ConfigError, DataError, FormatError, ShapeError
from .formats import read_image, read_mask, read_tensor, write_image, write_mask, write_tensor
from .geometry import GrayImage, RgbImage
from .manifest import load_manifest, save_manifest
from .pipeline import Pruner, PrunerConfig
from .semantic import FeatureMatrix, TextEmbedding
from .simulate import EpisodeSpec, Scenario, generate, target_recall, write_truth, read_truth
from .trace import TraceRow, compute_stats, read_trace, write_trace


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="tokenprune", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic episode")
    gen.add_argument("--scenario", required=True, choices=[s.value for s in Scenario])
    gen.add_argument("--seed", required=True, type=int)
    gen.add_argument("--grid", required=True, help="RxC, e.g. 8x8")
    gen.add_argument("--patch", required=True, type=int)
    gen.add_argument("--dim", required=True, type=int)
    gen.add_argument("--steps", required=True, type=int)
    gen.add_argument("--out", required=True)
    gen.add_argument("--noise", type=float, default=0.0)
    gen.add_argument("--misaligned", action="store_true",
                     help="aim the text embedding at the distractor block")

    prune = sub.add_parser("prune", help="run the pruning pipeline over files")
    prune.add_argument("--manifest", required=True)
    prune.add_argument("--out", required=True)
    prune.add_argument("--masks", action="store_true",
                       help="also write per-step kept-token masks as PGM")

    stats = sub.add_parser("stats", help="summarize a trace CSV")
    stats.add_argument("--trace", required=True)

    overlay = sub.add_parser("overlay", help="visualize a kept-token mask on a frame")
    overlay.add_argument("--frame", required=True)
    overlay.add_argument("--mask", required=True)
    overlay.add_argument("--out", required=True)

    report = sub.add_parser("report", help="render figures and a summary from a trace")
    report.add_argument("--trace", required=True)
    report.add_argument("--out", required=True)
    return parser


def _parse_grid(value: str) -> tuple[int, int]:
    parts = value.lower().split("x")
    if len(parts) != 2:
        raise _UsageError(f"--grid must look like RxC, got {value!r}")
    try:
        rows, cols = int(parts[0]), int(parts[1])
    except ValueError:
        raise _UsageError(f"--grid must look like RxC, got {value!r}")
    return rows, cols


def _cmd_gen(args) -> int:
    rows, cols = _parse_grid(args.grid)
    spec = EpisodeSpec(
        seed=args.seed,
        steps=args.steps,
        grid=TokenGrid(rows, cols, args.patch),
        feat_dim=args.dim,
        scenario=Scenario(args.scenario),
        noise_scale=args.noise,
        misaligned_text=args.misaligned,
    )
    episode = generate(spec)
    out = Path(args.out)
    (out / "frames").mkdir(parents=True, exist_ok=True)
    (out / "feats").mkdir(parents=True, exist_ok=True)
    frames, features = [], []
    for t in range(spec.steps):
        frame_rel = f"frames/frame_{t:05d}.ppm"
        feat_rel = f"feats/feat_{t:05d}.iapt"
        write_image(out / frame_rel, episode.images[t])
        write_tensor(out / feat_rel, episode.features[t].tokens)
        frames.append(frame_rel)
        features.append(feat_rel)
    write_tensor(out / "text.iapt", episode.text.values)
    write_truth(out / "truth.csv", episode.truth)
    save_manifest(
        out / "manifest.txt",
        PrunerConfig(),
        spec.grid,
        spec.steps,
        frames,
        features,
        "text.iapt",
        "truth.csv",
    )
    print(f"wrote {spec.steps}-step {spec.scenario.value} episode to {out}")
    return 0


def _load_episode_inputs(manifest):
    grid = manifest.grid
    images, features = [], []
    for frame_path, feat_path in zip(manifest.frames, manifest.features):
        image = read_image(frame_path)
        if not isinstance(image, RgbImage):
            raise FormatError(f"frame {frame_path} must be a P6 color image")
        images.append(image)
        tokens = read_tensor(feat_path)
        if tokens.ndim != 2:
            raise FormatError(f"features {feat_path} must be a 2-D tensor")
        features.append(FeatureMatrix(tokens.astype(np.float64), grid))
    text_values = read_tensor(manifest.text)
    if text_values.ndim != 1:
        raise FormatError(f"text {manifest.text} must be a 1-D tensor")
    text = TextEmbedding(text_values.astype(np.float64))
    truth = read_truth(manifest.truth) if manifest.truth is not None else None
    return images, features, text, truth


def _cmd_prune(args) -> int:
    manifest = load_manifest(args.manifest)
    images, features, text, truth = _load_episode_inputs(manifest)
    pruner = Pruner(manifest.config, manifest.grid)

    results = []
    rows = []
    for t in range(manifest.steps):
        result = pruner.step(images[t], features[t], text)
        recall = -1.0
        if truth is not None and t < len(truth) and truth[t].target:
            recall = target_recall(result, truth[t])
        rows.append(
            TraceRow(
                step=t,
                iou=result.mode.iou,
                mode=result.mode.mode,
                retention=result.retention,
                target_recall=recall,
            )
        )
        results.append(result)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_trace(out / "trace.csv", rows)
    for t, result in enumerate(results):
        kept_lines = "\n".join(str(i) for i in result.kept.indices)
        (out / f"kept_{t:05d}.txt").write_text(kept_lines + "\n" if kept_lines else "")
    if args.masks:
        (out / "masks").mkdir(exist_ok=True)
        total = manifest.grid.total()
        for t, result in enumerate(results):
            bits = np.zeros(total, dtype=bool)
            bits[list(result.kept.indices)] = True
            write_mask(out / "masks" / f"mask_{t:05d}.pgm", BinaryMask(bits, manifest.grid))
    print(f"pruned {manifest.steps} steps into {out}")
    return 0


def _cmd_stats(args) -> int:
    stats = compute_stats(read_trace(args.trace))
    print(f"transition_step={stats.transition_step}")
    print(f"conservative_steps={stats.conservative_steps}")
    print(f"aggressive_steps={stats.aggressive_steps}")
    print(f"conservative_mean_retention={stats.conservative_mean_retention:.6g}")
    print(f"aggressive_mean_retention={stats.aggressive_mean_retention:.6g}")
    print(f"iou_min={stats.iou_min:.6g}")
    print(f"iou_mean={stats.iou_mean:.6g}")
    print(f"iou_max={stats.iou_max:.6g}")
    return 0


def _cmd_overlay(args) -> int:
    frame = read_image(args.frame)
    if not isinstance(frame, RgbImage):
        raise FormatError(f"frame {args.frame} must be a P6 color image")
    mask_img = read_image(args.mask)
    if not isinstance(mask_img, GrayImage):
        raise FormatError(f"mask {args.mask} must be a P5 grayscale image")
    if frame.width % mask_img.width or frame.height % mask_img.height:
        raise ShapeError(
            f"frame {frame.width}x{frame.height} is not an integer multiple of "
            f"mask {mask_img.width}x{mask_img.height}"
        )
    patch_w = frame.width // mask_img.width
    patch_h = frame.height // mask_img.height
    if patch_w != patch_h:
        raise ShapeError(f"non-square patches: {patch_w}x{patch_h}")
    grid = TokenGrid(mask_img.height, mask_img.width, patch_w)
    mask = read_mask(args.mask, grid)

    pixels = frame.pixels.copy()
    bits = mask.bits.reshape(grid.rows, grid.cols)
    kept_pixels = np.repeat(np.repeat(bits, patch_h, axis=0), patch_w, axis=1)
    pixels[~kept_pixels] //= 4
    write_image(args.out, RgbImage(pixels))
    print(f"wrote overlay to {args.out}")
    return 0


def _cmd_report(args) -> int:
    from .report import render_report

    rows = read_trace(args.trace)
    written = render_report(rows, Path(args.out))
    for path in written:
        print(f"wrote {path}")
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "prune": _cmd_prune,
    "stats": _cmd_stats,
    "overlay": _cmd_overlay,
    "report": _cmd_report,
}


def cli_run(argv: list[str] | None = None) -> int:
    """Parse and run; returns the process exit code instead of exiting."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    except (ShapeError, ConfigError, DataError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(cli_run())


if __name__ == "__main__":
    main()
