"""``dort eval``: score saved runs, or sweep modes and strides end to end."""

from __future__ import annotations

import argparse
from pathlib import Path
from typing import Any

import pandas as pd

from ..analysis.cost import effective_fps, total_ms
from ..analysis.metrics import box_map, tracklet_map_from_boxes
from ..analysis.sweep import SWEEP_MODES, run_sweep
from ..analysis.visualization import plot_pareto
from ..config import ExperimentConfig
from ..errors import CheckpointError, DortError, MissingIds, ParseError
from ..geometry import BoundingBox
from ..scheduler.checkpoint import load_checkpoint
from ..synthdata.io import (
    GT_FILE,
    list_result_sequences,
    list_sequences,
    load_boxes,
    load_decisions,
    read_sequence,
)
from ..types import Action
from ..utils.logger import get_logger
from .common import (
    EXIT_EVAL,
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_USAGE,
    error,
    fit_frame_size,
    load_config,
    parse_int_list,
)
from .manifest import MANIFEST_NAME, RunManifest, load_manifest
from .run import DECISIONS_FILE, RESULTS_FILE

logger = get_logger(__name__)

EVAL_COLUMNS = [
    "sequence",
    "box_map",
    "tracklet_map",
    "fps",
    "n_detect",
    "n_track",
]
CONFUSION_SIGMAS = (1, 10)
POOLED = "ALL"


def _tracker_mode(pred: Path) -> str:
    """Tracker variant recorded in the run's manifest (``roi`` if unknown)."""
    try:
        manifest = load_manifest(pred / MANIFEST_NAME)
    except (FileNotFoundError, ValueError):
        return "roi"
    cfg = manifest.experiment_config()
    return cfg.tracker.mode if cfg is not None else "roi"


def score_runs(pred: Path, gt: Path) -> pd.DataFrame:
    """One row per sequence plus a pooled ``ALL`` row.

    Raises:
        ValueError: The two directories hold different sequence sets.
        ParseError: A results or ground-truth table is malformed.
        MissingIds: Predictions carry unassociated boxes.
    """
    pred_names = list_result_sequences(pred)
    gt_names = [n for n in list_sequences(gt) if (gt / n / GT_FILE).exists()]
    if not pred_names or set(pred_names) != set(gt_names):
        only_pred = sorted(set(pred_names) - set(gt_names))
        only_gt = sorted(set(gt_names) - set(pred_names))
        raise ValueError(
            f"sequence sets differ: only in predictions {only_pred}, "
            f"only in ground truth {only_gt}"
        )

    tracker_mode = _tracker_mode(pred)
    preds: dict[str, list[BoundingBox]] = {}
    gts: dict[str, list[BoundingBox]] = {}
    rows: list[dict[str, Any]] = []
    frames = 0
    total_ms_sum = 0.0
    for name in pred_names:
        preds[name] = load_boxes(pred / name / RESULTS_FILE)
        gts[name] = load_boxes(gt / name / GT_FILE)
        row: dict[str, Any] = {
            "sequence": name,
            "box_map": box_map(preds[name], gts[name]).mean_ap,
            "tracklet_map": tracklet_map_from_boxes(preds[name], gts[name]).mean_ap,
            "fps": float("nan"),
            "n_detect": None,
            "n_track": None,
        }
        decisions_path = pred / name / DECISIONS_FILE
        if decisions_path.exists():
            decisions = load_decisions(decisions_path)
            fps = effective_fps(decisions, tracker_mode=tracker_mode)
            n_detect = 1 + sum(1 for d in decisions if d.action == Action.DETECT)
            n_track = len(decisions) + 1 - n_detect
            row.update(fps=fps, n_detect=n_detect, n_track=n_track)
            frames += len(decisions) + 1
            total_ms_sum += total_ms(decisions, tracker_mode=tracker_mode)
        rows.append(row)

    detects = [r["n_detect"] for r in rows if r["n_detect"] is not None]
    tracks = [r["n_track"] for r in rows if r["n_track"] is not None]
    rows.append(
        {
            "sequence": POOLED,
            "box_map": box_map(preds, gts).mean_ap,
            "tracklet_map": tracklet_map_from_boxes(preds, gts).mean_ap,
            "fps": 1000.0 * frames / total_ms_sum if total_ms_sum else float("nan"),
            "n_detect": sum(detects) if detects else None,
            "n_track": sum(tracks) if tracks else None,
        }
    )
    return pd.DataFrame(rows, columns=EVAL_COLUMNS)


def _score(
    args: argparse.Namespace,
    out: Path,
    manifest: RunManifest,
    manifest_path: Path,
) -> int:
    try:
        table = score_runs(Path(args.pred), Path(args.gt))
    except (ParseError, MissingIds, ValueError, FileNotFoundError) as e:
        return error(f"Cannot evaluate: {e}", EXIT_EVAL)

    metrics_path = out / "metrics.csv"
    table.to_csv(metrics_path, index=False, float_format="%.6f")
    print(table.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    manifest.finish(manifest_path, [metrics_path])
    return EXIT_OK


def _sweep(
    args: argparse.Namespace,
    cfg: ExperimentConfig,
    out: Path,
    manifest: RunManifest,
    manifest_path: Path,
) -> int:
    try:
        sigmas = parse_int_list(args.sweep)
        modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    except argparse.ArgumentTypeError as e:
        return error(str(e), EXIT_USAGE)
    unknown = [m for m in modes if m not in SWEEP_MODES]
    if unknown:
        return error(
            f"unknown sweep modes {unknown}; choose from {SWEEP_MODES}", EXIT_USAGE
        )
    if "dort" in modes and not args.model:
        return error("sweeping dort mode needs --model <checkpoint>", EXIT_USAGE)

    gt = Path(args.gt)
    names = [n for n in list_sequences(gt) if (gt / n / GT_FILE).exists()]
    if not names:
        return error(f"No sequences with ground truth in {gt}", EXIT_EVAL)
    try:
        sequences = [read_sequence(gt / name) for name in names]
    except (FileNotFoundError, ParseError) as e:
        return error(f"Cannot read ground truth: {e}", EXIT_EVAL)

    scheduler = None
    if "dort" in modes:
        try:
            scheduler = load_checkpoint(args.model)
        except CheckpointError as e:
            return error(f"Cannot load scheduler: {e}", EXIT_RUNTIME)

    fit_frame_size(cfg, sequences[0].frames[0])
    try:
        result = run_sweep(sequences, sigmas, modes, cfg, scheduler=scheduler)
    except DortError as e:
        return error(f"Sweep failed: {e}", EXIT_RUNTIME)

    results_path = result.to_csv(out / "results.csv")
    artifacts: list[Path] = [results_path]
    svg = plot_pareto(result.table, out / "pareto.svg")
    if svg is not None:
        artifacts.append(svg)

    print(result.table.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    for (mode, sigma), matrix in sorted(result.confusions.items()):
        if sigma not in CONFUSION_SIGMAS:
            continue
        print(
            f"\nScheduler confusion, {mode} sigma={sigma} "
            "(rows predicted, columns label):"
        )
        print(pd.DataFrame(matrix.as_rows()).to_string(index=False))
        print(
            f"accuracy={matrix.accuracy:.4f} "
            f"false-positive rate={matrix.fp_rate:.4f}"
        )
    for sigma in result.violations:
        print(f"Warning: oracle tracklet mAP below fixed at sigma={sigma}")
    manifest.finish(manifest_path, artifacts)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    """Score ``--pred`` against ``--gt``, or run a sweep over ``--gt``."""
    if args.sweep is None and not args.pred:
        return error("--pred is required unless --sweep is given", EXIT_USAGE)
    try:
        cfg = load_config(args)
    except (FileNotFoundError, KeyError, ValueError) as e:
        return error(str(e), EXIT_USAGE)

    out = Path(args.out)
    seeds = {"noise": cfg.noise.seed}
    manifest = RunManifest.start("eval", args.argv, cfg, seeds=seeds)
    manifest_path = manifest.write(out / MANIFEST_NAME)
    if args.sweep is not None:
        return _sweep(args, cfg, out, manifest, manifest_path)
    return _score(args, out, manifest, manifest_path)


__all__ = ["cmd_eval", "score_runs", "EVAL_COLUMNS"]
