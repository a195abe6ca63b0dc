"""Logging and metrics helpers shared across DorT."""

from .logger import get_logger, log_event, setup_logging
from .metrics import PipelineMetrics, get_metrics, reset_metrics

__all__ = [
    "get_logger",
    "log_event",
    "setup_logging",
    "PipelineMetrics",
    "get_metrics",
    "reset_metrics",
]
