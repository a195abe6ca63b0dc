"""
Prometheus instrumentation for the detect-or-track pipeline.

prometheus-client lives in the optional ``monitoring`` group. Without it every
recording method is a no-op, so library code can call the metrics object
unconditionally.
"""

import logging
from collections.abc import Callable
from functools import wraps
from typing import Any, Optional

try:
    from prometheus_client import (
        CONTENT_TYPE_LATEST,
        CollectorRegistry,
        Counter,
        Gauge,
        Histogram,
        generate_latest,
    )

    HAS_PROMETHEUS = True
except ImportError:
    HAS_PROMETHEUS = False

    class Counter:
        def __init__(self, *args, **kwargs):
            pass

        def inc(self, *args, **kwargs):
            pass

        def labels(self, *args, **kwargs):
            return self

    class Gauge:
        def __init__(self, *args, **kwargs):
            pass

        def set(self, *args, **kwargs):
            pass

        def labels(self, *args, **kwargs):
            return self

    class Histogram:
        def __init__(self, *args, **kwargs):
            pass

        def observe(self, *args, **kwargs):
            pass

    CollectorRegistry = None
    CONTENT_TYPE_LATEST = "text/plain"

    def generate_latest(registry):
        return b""


logger = logging.getLogger(__name__)


def _require_enabled(func: Callable) -> Callable:
    """Skip the wrapped method when metrics are disabled."""

    @wraps(func)
    def wrapper(self: "PipelineMetrics", *args: Any, **kwargs: Any) -> Any:
        if not self.enabled:
            return None
        return func(self, *args, **kwargs)

    return wrapper


class PipelineMetrics:
    """Counters, gauges and histograms for DorT runs and scheduler training."""

    def __init__(self, registry: Optional["CollectorRegistry"] = None):
        """Create the metric families.

        Args:
            registry: Registry to attach to. A private registry is created
                when None, so several instances can coexist in one process.
        """
        if not HAS_PROMETHEUS:
            logger.debug(
                "prometheus-client not installed; pipeline metrics disabled. "
                "Install with: pip install prometheus-client"
            )
            self.enabled = False
            return

        self.enabled = True
        self.registry = registry if registry is not None else CollectorRegistry()

        self.frames_total = Counter(
            "dort_frames_total",
            "Frames processed, by action taken",
            ["action"],
            registry=self.registry,
        )
        self.scheduler_consultations_total = Counter(
            "dort_scheduler_consultations_total",
            "Number of times a decision source was consulted",
            ["source"],
            registry=self.registry,
        )
        self.track_probability = Histogram(
            "dort_track_probability",
            "Scheduler track probability per consultation",
            buckets=[0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.97, 0.99, 1.0],
            registry=self.registry,
        )
        self.frame_latency = Histogram(
            "dort_frame_latency_seconds",
            "Wall-clock time to finalize one frame",
            ["action"],
            buckets=[0.001, 0.005, 0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 1.0],
            registry=self.registry,
        )
        self.active_tracks = Gauge(
            "dort_active_tracks",
            "Boxes emitted for the latest frame",
            registry=self.registry,
        )
        self.frozen_boxes_total = Counter(
            "dort_frozen_boxes_total",
            "Boxes frozen because their search window left the frame",
            registry=self.registry,
        )
        self.sequences_total = Counter(
            "dort_sequences_total",
            "Sequences processed, by pipeline mode",
            ["mode"],
            registry=self.registry,
        )
        self.training_epoch_loss = Gauge(
            "dort_training_epoch_loss",
            "Mean cross-entropy of the latest scheduler training epoch",
            registry=self.registry,
        )
        self.errors_total = Counter(
            "dort_errors_total",
            "Errors raised inside the pipeline, by type",
            ["error_type"],
            registry=self.registry,
        )

    @_require_enabled
    def record_frame(self, action: str, latency: float, n_boxes: int) -> None:
        """Record one finalized frame.

        Args:
            action: ``detect`` or ``track``
            latency: Wall-clock seconds spent on the frame
            n_boxes: Boxes emitted for the frame
        """
        self.frames_total.labels(action=action).inc()
        self.frame_latency.labels(action=action).observe(latency)
        self.active_tracks.set(n_boxes)

    @_require_enabled
    def record_consultation(self, source: str, p_track: float | None = None) -> None:
        """Record a decision-source consultation and its track probability."""
        self.scheduler_consultations_total.labels(source=source).inc()
        if p_track is not None:
            self.track_probability.observe(p_track)

    @_require_enabled
    def record_frozen_box(self) -> None:
        self.frozen_boxes_total.inc()

    @_require_enabled
    def record_sequence(self, mode: str) -> None:
        self.sequences_total.labels(mode=mode).inc()

    @_require_enabled
    def record_epoch_loss(self, loss: float) -> None:
        self.training_epoch_loss.set(loss)

    @_require_enabled
    def record_error(self, error_type: str) -> None:
        self.errors_total.labels(error_type=error_type).inc()

    def get_metrics(self) -> bytes:
        """Current metrics in Prometheus exposition format."""
        if not self.enabled:
            return b""
        return generate_latest(self.registry)

    def get_content_type(self) -> str:
        if not self.enabled:
            return "text/plain"
        return CONTENT_TYPE_LATEST


_global_metrics: PipelineMetrics | None = None


def get_metrics() -> PipelineMetrics:
    """Get or create the process-wide metrics instance."""
    global _global_metrics
    if _global_metrics is None:
        _global_metrics = PipelineMetrics()
    return _global_metrics


def reset_metrics() -> None:
    """Drop the process-wide instance (tests use this between cases)."""
    global _global_metrics
    _global_metrics = None
