"""Metrics, throughput model, sweeps and plots."""

from .confusion import ConfusionResult, combine, confusion
from .cost import CostModel, effective_fps, total_ms
from .metrics import (
    MapResult,
    Tracklet,
    average_precision,
    box_map,
    build_tracklets,
    pool_sequences,
    temporal_iou,
    tracklet_map,
    tracklet_map_from_boxes,
)
from .sweep import SweepResult, run_sweep
from .visualization import plot_pareto

__all__ = [
    "ConfusionResult",
    "combine",
    "confusion",
    "CostModel",
    "effective_fps",
    "total_ms",
    "MapResult",
    "Tracklet",
    "average_precision",
    "box_map",
    "build_tracklets",
    "pool_sequences",
    "temporal_iou",
    "tracklet_map",
    "tracklet_map_from_boxes",
    "SweepResult",
    "run_sweep",
    "plot_pareto",
]
