"""
Shared contracts for the detect-or-track pipeline.

Terminology:
- keyframe: the latest frame the detector ran on; tracking starts from it
- decision source: what produced the action for a frame (scheduler network,
  stride default between consultations, fixed schedule, or oracle labels)
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Any, Protocol, runtime_checkable

import numpy as np

from ..geometry import BoundingBox


class Action(IntEnum):
    """Per-frame action. Integer values double as class labels."""

    DETECT = 0
    TRACK = 1

    @classmethod
    def parse(cls, value: str | int) -> Action:
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError as e:
                raise ValueError(f"Unknown action: {value!r}") from e
        return cls(int(value))

    def flipped(self) -> Action:
        return Action.TRACK if self is Action.DETECT else Action.DETECT

    def __str__(self) -> str:
        return self.name.lower()


class DecisionSource(Enum):
    """Where a frame's action came from."""

    SCHEDULER = "scheduler"  # scheduler network consulted
    STRIDE = "stride"  # between consultations, default track
    FIXED = "fixed"  # fixed every-sigma schedule
    ORACLE = "oracle"  # ground-truth labeling protocol


@dataclass(frozen=True)
class DecisionRecord:
    """
    One row of the per-frame decision log.

    Attributes:
        frame_id: Frame the action applies to (>= 2)
        source: Decision source that produced ``action``
        action: Action taken
        p_track: Scheduler track probability, None when not consulted
        keyframe: Keyframe index after the action was applied
        n_boxes: Boxes emitted for the frame
        oracle_action: Ground-truth label recorded alongside a consultation
    """

    frame_id: int
    source: DecisionSource
    action: Action
    p_track: float | None = None
    keyframe: int = 1
    n_boxes: int = 0
    oracle_action: Action | None = None

    @property
    def consulted(self) -> bool:
        return self.source in (DecisionSource.SCHEDULER, DecisionSource.ORACLE)

    def to_row(self) -> dict[str, Any]:
        oracle = self.oracle_action
        return {
            "frame_id": self.frame_id,
            "source": self.source.value,
            "p_track": "" if self.p_track is None else repr(self.p_track),
            "action": str(self.action),
            "keyframe": self.keyframe,
            "n_boxes": self.n_boxes,
            "oracle_action": "" if oracle is None else str(oracle),
        }


@runtime_checkable
class Detector(Protocol):
    """Single-frame detector contract.

    Returns scored, class-labelled boxes with ``id=None`` for frame ``fid``.
    Implementations must be deterministic for a given seed.
    """

    def detect(self, frame: np.ndarray, fid: int) -> Sequence[BoundingBox]: ...


__all__ = ["Action", "DecisionSource", "DecisionRecord", "Detector"]
