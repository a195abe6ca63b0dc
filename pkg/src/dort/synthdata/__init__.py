"""Synthetic video generation, dataset I/O and the simulated detector."""

from .dataset import build_scheduler_dataset
from .detector import (
    CachedDetector,
    SimulatedDetector,
    detect_all,
    detector_for_sequence,
    sequence_seed,
    simulate_detector,
)
from .io import (
    list_sequences,
    load_boxes,
    load_decisions,
    load_frames,
    read_sequence,
    save_boxes,
    save_decisions,
    save_frames,
    write_sequence,
)
from .scene import (
    ObjectSpec,
    SceneSpec,
    SyntheticSequence,
    generate,
    split_suite,
    standard_suite,
)

__all__ = [
    "build_scheduler_dataset",
    "CachedDetector",
    "SimulatedDetector",
    "detect_all",
    "detector_for_sequence",
    "sequence_seed",
    "simulate_detector",
    "list_sequences",
    "load_boxes",
    "load_decisions",
    "load_frames",
    "read_sequence",
    "save_boxes",
    "save_decisions",
    "save_frames",
    "write_sequence",
    "ObjectSpec",
    "SceneSpec",
    "SyntheticSequence",
    "generate",
    "split_suite",
    "standard_suite",
]
