"""Speed/accuracy sweep over decision modes and strides.

Every ``(mode, sigma)`` configuration runs the full pipeline on every
sequence and is summarised as one row of modelled fps, box mAP, tracklet
mAP and detect/track counts. Configurations are independent and run on a
thread pool; each sequence's detector seed depends only on the sequence
index, so all configurations see the same detections.
"""

from __future__ import annotations

import os
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import pandas as pd

from ..config import ExperimentConfig, PipelineConfig, TrackerConfig
from ..core.featmap import FeatureExtractor
from ..core.pipeline import DetectOrTrackPipeline, SequenceResult
from ..core.tracker import CorrelationTracker
from ..scheduler.network import SchedulerNetwork
from ..synthdata.detector import SimulatedDetector, detector_for_sequence
from ..synthdata.scene import SyntheticSequence
from ..types import DecisionSource
from ..utils.logger import get_logger
from .confusion import ConfusionResult, combine, confusion
from .cost import CostModel, effective_fps, total_ms
from .metrics import box_map, tracklet_map_from_boxes

logger = get_logger(__name__)

SWEEP_MODES = ("fixed", "oracle", "dort", "fixed-crop")
RESULT_COLUMNS = [
    "mode",
    "sigma",
    "fps",
    "box_map",
    "tracklet_map",
    "n_detect",
    "n_track",
]
SEQUENCE_COLUMNS = ["sequence", *RESULT_COLUMNS]
THREADS_ENV = "DORT_THREADS"


def worker_count(requested: int | None = None) -> int:
    """Worker cap: ``requested``, else ``DORT_THREADS``, else the CPU count."""
    if requested is not None:
        return max(1, requested)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning(f"Ignoring non-integer {THREADS_ENV}={env!r}")
    return os.cpu_count() or 1


def split_mode(mode: str) -> tuple[str, str]:
    """Sweep mode name to ``(pipeline mode, tracker mode)``."""
    if mode not in SWEEP_MODES:
        raise ValueError(f"sweep mode must be one of {SWEEP_MODES}, got {mode!r}")
    if mode == "fixed-crop":
        return "fixed", "crop"
    return mode, "roi"


def make_detector(
    seq: SyntheticSequence, index: int, cfg: ExperimentConfig
) -> SimulatedDetector:
    """Simulated detector for the ``index``-th sequence of a run."""
    height, width = seq.frames[0].shape[:2]
    return detector_for_sequence(
        seq.boxes_by_frame(), index, cfg.noise, height, width, cfg.suite.num_classes
    )


def build_pipeline(
    cfg: ExperimentConfig,
    extractor: FeatureExtractor,
    mode: str,
    sigma: int,
    scheduler: SchedulerNetwork | None = None,
    detector: Any = None,
) -> DetectOrTrackPipeline:
    pipeline_mode, tracker_mode = split_mode(mode)
    tracker = CorrelationTracker(extractor, replace(cfg.tracker, mode=tracker_mode))
    pcfg = replace(cfg.pipeline, mode=pipeline_mode, sigma=sigma)
    return DetectOrTrackPipeline(pcfg, detector, extractor, tracker, scheduler)


def run_configuration(
    sequences: Sequence[SyntheticSequence],
    mode: str,
    sigma: int,
    cfg: ExperimentConfig,
    extractor: FeatureExtractor,
    scheduler: SchedulerNetwork | None = None,
) -> list[SequenceResult]:
    """Run one ``(mode, sigma)`` configuration over all sequences."""
    pipeline = build_pipeline(cfg, extractor, mode, sigma, scheduler)
    results = []
    for index, seq in enumerate(sequences):
        pipeline.detector = make_detector(seq, index, cfg)
        result = pipeline.run_sequence(seq.frames, seq.groundtruth, name=seq.name)
        results.append(result)
    return results


def sequence_row(
    seq: SyntheticSequence,
    result: SequenceResult,
    mode: str,
    cost_model: CostModel | None = None,
    tracker_mode: str | None = None,
) -> dict[str, Any]:
    """Per-sequence metrics (one row of ``metrics.csv``).

    ``tracker_mode`` defaults to the one implied by the sweep mode name.
    """
    if tracker_mode is None:
        _, tracker_mode = split_mode(mode)
    return {
        "sequence": seq.name,
        "mode": mode,
        "sigma": result.sigma,
        "fps": effective_fps(result.decisions, cost_model, tracker_mode),
        "box_map": box_map(result.boxes, seq.groundtruth).mean_ap,
        "tracklet_map": tracklet_map_from_boxes(result.boxes, seq.groundtruth).mean_ap,
        "n_detect": result.n_detect,
        "n_track": result.n_track,
    }


def summarize(
    sequences: Sequence[SyntheticSequence],
    results: Sequence[SequenceResult],
    mode: str,
    sigma: int,
    cost_model: CostModel | None = None,
) -> dict[str, Any]:
    """Pooled row: fps over all frames, mAPs over all sequences at once."""
    _, tracker_mode = split_mode(mode)
    frames = sum(r.num_frames for r in results)
    total = sum(total_ms(r.decisions, cost_model, tracker_mode) for r in results)
    preds = {r.name: r.boxes for r in results}
    gts = {s.name: s.groundtruth for s in sequences}
    return {
        "mode": mode,
        "sigma": sigma,
        "fps": 1000.0 * frames / total if total else float("inf"),
        "box_map": box_map(preds, gts).mean_ap,
        "tracklet_map": tracklet_map_from_boxes(preds, gts).mean_ap,
        "n_detect": sum(r.n_detect for r in results),
        "n_track": sum(r.n_track for r in results),
    }


@dataclass
class SweepResult:
    """Sweep table plus the raw runs behind it."""

    table: pd.DataFrame
    runs: dict[tuple[str, int], list[SequenceResult]] = field(default_factory=dict)
    confusions: dict[tuple[str, int], ConfusionResult] = field(default_factory=dict)
    violations: list[int] = field(default_factory=list)

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.table.to_csv(path, index=False, float_format="%.6f")
        return path


def oracle_violations(table: pd.DataFrame) -> list[int]:
    """Sigmas where oracle tracklet mAP falls below fixed."""
    if table.empty:
        return []
    by_mode = {
        m: rows.set_index("sigma")["tracklet_map"] for m, rows in table.groupby("mode")
    }
    if "oracle" not in by_mode or "fixed" not in by_mode:
        return []
    oracle, fixed = by_mode["oracle"], by_mode["fixed"]
    shared = oracle.index.intersection(fixed.index)
    return sorted(int(s) for s in shared if oracle[s] < fixed[s])


def run_sweep(
    sequences: Sequence[SyntheticSequence],
    sigmas: Sequence[int],
    modes: Sequence[str],
    cfg: ExperimentConfig,
    scheduler: SchedulerNetwork | None = None,
    cost_model: CostModel | None = None,
    max_workers: int | None = None,
) -> SweepResult:
    """Run every ``(mode, sigma)`` pair and collect the table.

    Rows come out ordered by mode (as given) then sigma (as given). An
    empty ``sigmas`` or ``modes`` gives an empty table.
    """
    for mode in modes:
        split_mode(mode)
    if "dort" in modes and scheduler is None:
        raise ValueError("sweeping dort mode needs a trained scheduler")

    extractor = FeatureExtractor.from_config(cfg.features)
    configs = [(mode, int(sigma)) for mode in modes for sigma in sigmas]
    if not configs:
        return SweepResult(table=pd.DataFrame(columns=RESULT_COLUMNS))

    workers = min(worker_count(max_workers), len(configs))
    logger.info(
        f"Sweeping {len(configs)} configurations on {len(sequences)} sequences "
        f"with {workers} workers"
    )

    def run_one(config: tuple[str, int]) -> list[SequenceResult]:
        mode, sigma = config
        return run_configuration(sequences, mode, sigma, cfg, extractor, scheduler)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        all_results = list(pool.map(run_one, configs))

    rows = []
    runs: dict[tuple[str, int], list[SequenceResult]] = {}
    confusions: dict[tuple[str, int], ConfusionResult] = {}
    for (mode, sigma), results in zip(configs, all_results, strict=True):
        runs[(mode, sigma)] = results
        row = summarize(sequences, results, mode, sigma, cost_model)
        rows.append(row)
        logger.info(
            f"mode={mode} sigma={sigma}: fps={row['fps']:.2f} "
            f"box_map={row['box_map']:.4f} "
            f"tracklet_map={row['tracklet_map']:.4f} "
            f"detect={row['n_detect']} track={row['n_track']}"
        )
        if mode == "dort":
            confusions[(mode, sigma)] = combine(
                confusion(r.decisions, sources=(DecisionSource.SCHEDULER,))
                for r in results
            )

    table = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    violations = oracle_violations(table)
    for sigma in violations:
        logger.warning(f"Oracle tracklet mAP below fixed at sigma={sigma}")
    return SweepResult(
        table=table, runs=runs, confusions=confusions, violations=violations
    )


__all__ = [
    "SWEEP_MODES",
    "RESULT_COLUMNS",
    "SEQUENCE_COLUMNS",
    "SweepResult",
    "build_pipeline",
    "make_detector",
    "oracle_violations",
    "run_configuration",
    "run_sweep",
    "sequence_row",
    "summarize",
    "worker_count",
]
