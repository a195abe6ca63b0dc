"""``dort run``: the detect-or-track loop over every sequence of a dataset."""

from __future__ import annotations

import argparse
from dataclasses import replace
from pathlib import Path
from typing import Any

import pandas as pd

from ..analysis.cost import effective_fps
from ..analysis.sweep import SEQUENCE_COLUMNS, sequence_row
from ..config import PIPELINE_MODES, TRACKER_MODES, ExperimentConfig
from ..core.featmap import FeatureExtractor
from ..core.pipeline import DetectOrTrackPipeline
from ..core.tracker import CorrelationTracker
from ..errors import CheckpointError, DortError, MissingGroundtruth
from ..scheduler.checkpoint import load_checkpoint
from ..scheduler.network import SchedulerNetwork
from ..synthdata.detector import CachedDetector, detector_for_sequence
from ..synthdata.io import (
    GT_FILE,
    detections_file,
    list_sequences,
    load_boxes,
    read_sequence,
    save_boxes,
    save_decisions,
)
from ..synthdata.scene import SyntheticSequence
from ..types import Detector
from ..utils.logger import get_logger
from .common import (
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_USAGE,
    error,
    fit_frame_size,
    load_config,
)
from .manifest import MANIFEST_NAME, RunManifest

logger = get_logger(__name__)

RESULTS_FILE = "results.csv"
DECISIONS_FILE = "decisions.csv"
METRICS_FILE = "metrics.csv"


def make_run_detector(
    seq_dir: Path,
    seq: SyntheticSequence,
    index: int,
    has_gt: bool,
    cfg: ExperimentConfig,
) -> Detector:
    """Cached detections for the run's noise seed, else simulate from ground truth.

    Raises:
        MissingGroundtruth: Neither a cache nor ground truth exists.
    """
    cache = seq_dir / detections_file(cfg.noise.seed)
    if cache.exists():
        logger.debug(f"{seq.name}: using cached detections {cache.name}")
        return CachedDetector(load_boxes(cache))
    if not has_gt:
        raise MissingGroundtruth(
            f"{seq.name} has neither {cache.name} nor ground truth "
            "to simulate detections"
        )
    height, width = seq.frames[0].shape[:2]
    return detector_for_sequence(
        seq.boxes_by_frame(), index, cfg.noise, height, width, cfg.suite.num_classes
    )


def _apply_overrides(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    pipeline: dict[str, Any] = {"mode": args.mode}
    if args.sigma is not None:
        pipeline["sigma"] = args.sigma
    if args.delta is not None:
        pipeline["delta"] = args.delta
    if args.seed is not None:
        pipeline["seed"] = args.seed
        cfg.noise = replace(cfg.noise, seed=args.seed)
    cfg.pipeline = replace(cfg.pipeline, **pipeline)
    if args.tracker:
        cfg.tracker = replace(cfg.tracker, mode=args.tracker)


def cmd_run(args: argparse.Namespace) -> int:
    """Run one ``(mode, sigma)`` configuration and write per-sequence logs."""
    try:
        cfg = load_config(args)
        _apply_overrides(cfg, args)
    except (FileNotFoundError, KeyError, ValueError) as e:
        return error(str(e), EXIT_USAGE)
    if cfg.pipeline.mode == "dort" and not args.model:
        return error("--mode dort needs --model <checkpoint>", EXIT_USAGE)

    data = Path(args.data)
    names = list_sequences(data)
    if not names:
        return error(f"No sequences found in data directory: {data}", EXIT_RUNTIME)

    scheduler: SchedulerNetwork | None = None
    if cfg.pipeline.mode == "dort":
        try:
            scheduler = load_checkpoint(args.model)
        except CheckpointError as e:
            return error(f"Cannot load scheduler: {e}", EXIT_RUNTIME)

    out = Path(args.out)
    manifest = RunManifest.start(
        "run",
        args.argv,
        cfg,
        seeds={"noise": cfg.noise.seed, "pipeline": cfg.pipeline.seed},
    )
    manifest_path = manifest.write(out / MANIFEST_NAME)

    artifacts: list[Path] = []
    rows: list[dict[str, Any]] = []
    try:
        pipeline: DetectOrTrackPipeline | None = None
        for index, name in enumerate(names):
            seq_dir = data / name
            has_gt = (seq_dir / GT_FILE).exists()
            seq = read_sequence(seq_dir, require_gt=False)
            if pipeline is None:
                fit_frame_size(cfg, seq.frames[0])
                extractor = FeatureExtractor.from_config(cfg.features)
                tracker = CorrelationTracker(extractor, cfg.tracker)
                pipeline = DetectOrTrackPipeline(
                    cfg.pipeline, None, extractor, tracker, scheduler
                )
            pipeline.detector = make_run_detector(seq_dir, seq, index, has_gt, cfg)
            result = pipeline.run_sequence(
                seq.frames, seq.groundtruth if has_gt else None, name=name
            )

            seq_out = out / name
            artifacts.append(save_boxes(seq_out / RESULTS_FILE, result.boxes))
            artifacts.append(save_decisions(seq_out / DECISIONS_FILE, result.decisions))
            fps = effective_fps(result.decisions, tracker_mode=cfg.tracker.mode)
            print(
                f"{name}: {result.n_detect} detect / {result.n_track} track, "
                f"modelled {fps:.2f} fps"
            )
            if has_gt:
                row = sequence_row(
                    seq, result, cfg.pipeline.mode, tracker_mode=cfg.tracker.mode
                )
                rows.append(row)
    except MissingGroundtruth as e:
        return error(str(e), EXIT_RUNTIME)
    except (FileNotFoundError, DortError) as e:
        return error(f"Run failed: {e}", EXIT_RUNTIME)

    if rows:
        metrics_path = out / METRICS_FILE
        pd.DataFrame(rows, columns=SEQUENCE_COLUMNS).to_csv(
            metrics_path, index=False, float_format="%.6f"
        )
        artifacts.append(metrics_path)
    manifest.finish(manifest_path, artifacts)
    print(f"Wrote results for {len(names)} sequences to {out}")
    return EXIT_OK


__all__ = ["cmd_run", "make_run_detector", "RESULTS_FILE", "DECISIONS_FILE"]
