"""Throughput under a per-stage cost model.

Wall-clock time on a desk machine says little about the real system, so
throughput is computed from fixed per-stage costs in milliseconds. Frame 1
is a detect event. Detect frames pay the detector plus association; tracked
frames pay the tracker (the shared-feature RoI tracker once per frame, the
crop tracker once per box); frames where the scheduler network ran also
pay the scheduler head.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import asdict, dataclass, fields
from typing import Any

from ..types import Action, DecisionRecord, DecisionSource


@dataclass(frozen=True)
class CostModel:
    detect_ms: float = 1000.0 / 8.33
    track_ms: float = 10.0
    scheduler_ms: float = 10.0
    hungarian_ms: float = 1.5
    crop_track_ms_per_box: float = 1000.0 / 86.0

    def __post_init__(self) -> None:
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be >= 0")

    def scaled(self, factor: float) -> CostModel:
        return CostModel(
            **{f.name: getattr(self, f.name) * factor for f in fields(self)}
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def frame_cost_ms(
    record: DecisionRecord, model: CostModel, tracker_mode: str = "roi"
) -> float:
    if record.action == Action.DETECT:
        cost = model.detect_ms + model.hungarian_ms
    elif tracker_mode == "crop":
        cost = model.crop_track_ms_per_box * record.n_boxes
    else:
        cost = model.track_ms
    if record.source == DecisionSource.SCHEDULER:
        cost += model.scheduler_ms
    return cost


def total_ms(
    decisions: Sequence[DecisionRecord],
    model: CostModel | None = None,
    tracker_mode: str = "roi",
) -> float:
    """Modelled time for a sequence: frame 1 plus every logged frame."""
    model = model or CostModel()
    first = model.detect_ms + model.hungarian_ms
    return first + sum(frame_cost_ms(d, model, tracker_mode) for d in decisions)


def effective_fps(
    decisions: Sequence[DecisionRecord],
    model: CostModel | None = None,
    tracker_mode: str = "roi",
) -> float:
    """``1000 * N / total_ms`` with ``N = len(decisions) + 1`` frames."""
    total = total_ms(decisions, model, tracker_mode)
    if total == 0:
        return float("inf")
    return 1000.0 * (len(decisions) + 1) / total


__all__ = ["CostModel", "frame_cost_ms", "total_ms", "effective_fps"]
