"""DorT: Detect or Track
----------------------
Low-latency video object detection and tracking that runs a detector only on
frames a scheduler network flags, and propagates boxes with a correlation
tracker everywhere else.
"""

import logging

from .config import (
    DEFAULT,
    FULL,
    PRESETS,
    QUICK_TEST,
    ExperimentConfig,
    get_preset,
)
from .errors import DortError
from .geometry import BoundingBox, Rect, iou
from .types import Action, DecisionRecord, DecisionSource
from .utils.logger import get_logger, setup_logging

__version__ = "0.4.0"

logging.getLogger(__name__).addHandler(logging.NullHandler())

# Lazy import mappings - torch and scipy backed components load on first access
_LAZY_IMPORTS = {
    # Core
    "DetectOrTrackPipeline": ".core.pipeline",
    "SequenceResult": ".core.pipeline",
    "FeatureExtractor": ".core.featmap",
    "CorrelationTracker": ".core.tracker",
    "associate": ".core.association",
    "hungarian": ".core.association",
    # Scheduler
    "SchedulerNetwork": ".scheduler.network",
    "correlation_layer": ".scheduler.correlation",
    "label_pair": ".scheduler.labeling",
    "train": ".scheduler.training",
    "load_checkpoint": ".scheduler.checkpoint",
    "save_checkpoint": ".scheduler.checkpoint",
    # Synthetic data
    "SceneSpec": ".synthdata.scene",
    "generate": ".synthdata.scene",
    "standard_suite": ".synthdata.scene",
    "SimulatedDetector": ".synthdata.detector",
    "build_scheduler_dataset": ".synthdata.dataset",
    # Analysis
    "box_map": ".analysis.metrics",
    "tracklet_map": ".analysis.metrics",
    "CostModel": ".analysis.cost",
    "effective_fps": ".analysis.cost",
    "confusion": ".analysis.confusion",
    "run_sweep": ".analysis.sweep",
    "plot_pareto": ".analysis.visualization",
}


def __getattr__(name: str):
    """Lazy-load heavy components only when accessed."""
    if name in _LAZY_IMPORTS:
        module_path = _LAZY_IMPORTS[name]
        try:
            from importlib import import_module

            module = import_module(module_path, package=__package__)
            attr = getattr(module, name)
            globals()[name] = attr
            return attr
        except ImportError as e:
            import warnings

            warnings.warn(
                f"Could not import {name} from {module_path}: {e}",
                ImportWarning,
            )
            raise AttributeError(
                f"Module {__name__} has no attribute {name} "
                f"(failed to lazy-load from {module_path})"
            ) from e

    raise AttributeError(f"Module {__name__} has no attribute {name}")


__all__ = [
    "__version__",
    # Configuration
    "ExperimentConfig",
    "get_preset",
    "PRESETS",
    "QUICK_TEST",
    "DEFAULT",
    "FULL",
    # Types
    "Action",
    "BoundingBox",
    "DecisionRecord",
    "DecisionSource",
    "DortError",
    "Rect",
    "iou",
    # Logging
    "get_logger",
    "setup_logging",
    *_LAZY_IMPORTS,
]
