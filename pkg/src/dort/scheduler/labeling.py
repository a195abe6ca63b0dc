"""Ground-truth detect/track labels for frame pairs.

A pair ``(t, t + tau)`` is labelled track iff the objects present are the
same in both frames and every ground-truth box at ``t + tau`` overlaps the
box tracked from ``t`` with IOU of at least ``iou_thresh``. Any object that
appears or disappears makes the pair a detect.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from ..core.featmap import Tensor3
from ..core.tracker import CorrelationTracker
from ..geometry import BoundingBox, iou
from ..types import Action
from .network import SchedulerState


def label_from_tracked(
    tracked: Sequence[BoundingBox],
    gt_next: Sequence[BoundingBox],
    iou_thresh: float = 0.8,
) -> Action:
    """Label given boxes already tracked from the earlier frame.

    Boxes are paired by ground-truth ID; the ID sets must be equal.
    """
    tracked_by_id = {b.id: b for b in tracked}
    next_by_id = {b.id: b for b in gt_next}
    if set(tracked_by_id) != set(next_by_id):
        return Action.DETECT
    for object_id, gt_box in next_by_id.items():
        if iou(tracked_by_id[object_id].rect, gt_box.rect) < iou_thresh:
            return Action.DETECT
    return Action.TRACK


def label_pair(
    gt_t: Sequence[BoundingBox],
    gt_next: Sequence[BoundingBox],
    tracker: CorrelationTracker,
    features: Sequence[Tensor3],
    iou_thresh: float = 0.8,
    frames: Sequence | None = None,
) -> Action:
    """Label the pair ``(t, t + tau)``.

    Args:
        gt_t: Ground truth at frame ``t`` (IDs set).
        gt_next: Ground truth at frame ``t + tau``.
        tracker: Tracker used to propagate ``gt_t``.
        features: Feature maps of frames ``t`` .. ``t + tau`` inclusive;
            tracking folds over ``features[1:]``.
        iou_thresh: Minimum tracked-vs-truth IOU for a track label.
        frames: Pixel frames aligned with ``features`` (crop tracker only).
    """
    if {b.id for b in gt_t} != {b.id for b in gt_next}:
        return Action.DETECT
    if not gt_t:
        return Action.TRACK
    start_fid = gt_t[0].fid
    keyframe_frame = frames[0] if frames is not None else None
    state = tracker.start(features[0], gt_t, start_fid, keyframe_frame=keyframe_frame)
    _, tracked = tracker.track_through(
        state, features[1:], frames[1:] if frames is not None else None, start_fid + 1
    )
    return label_from_tracked(tracked, gt_next, iou_thresh)


@dataclass(frozen=True, eq=False)
class LabeledState:
    """A scheduler state with its ground-truth action."""

    state: SchedulerState
    label: Action
    sequence: str = ""

    def reward(self, action: Action) -> int:
        return int(self.label == action)


__all__ = ["label_pair", "label_from_tracked", "LabeledState"]
