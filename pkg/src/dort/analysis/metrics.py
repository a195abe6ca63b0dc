"""Box-level and tracklet-level mean average precision.

Both metrics rank candidates by score, greedily match each one to the
unmatched same-class ground truth it overlaps most, and integrate the
resulting precision/recall curve with all-points interpolation. Thresholds
are inclusive. Matching never crosses sequences: boxes are keyed by
``(sequence, frame)`` and tracklets by ``(sequence, object_id)``.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from itertools import pairwise

import numpy as np

from ..errors import MissingIds
from ..geometry import BoundingBox, Rect, iou
from ..utils.logger import get_logger

logger = get_logger(__name__)

Boxes = Sequence[BoundingBox] | Mapping[str, Sequence[BoundingBox]]


def average_precision(recall: np.ndarray, precision: np.ndarray) -> float:
    """Area under the PR curve with the monotone precision envelope."""
    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(mpre.size - 1, 0, -1):
        mpre[i - 1] = max(mpre[i - 1], mpre[i])
    # points where recall changes
    i = np.where(mrec[1:] != mrec[:-1])[0]
    return float(np.sum((mrec[i + 1] - mrec[i]) * mpre[i + 1]))


def _ap_from_hits(hits: list[bool], n_gt: int) -> float:
    if not hits or n_gt == 0:
        return 0.0
    tp = np.cumsum(np.asarray(hits, dtype=np.float64))
    fp = np.cumsum(1.0 - np.asarray(hits, dtype=np.float64))
    return average_precision(tp / n_gt, tp / (tp + fp))


def _rank(scores: Sequence[float]) -> np.ndarray:
    """Descending score order, ties kept in input order."""
    return np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")


@dataclass
class MapResult:
    """Mean AP over classes that have ground truth, with the per-class APs."""

    mean_ap: float
    per_class: dict[int, float] = field(default_factory=dict)
    num_gt: dict[int, int] = field(default_factory=dict)


def _mean(per_class: dict[int, float]) -> float:
    return float(np.mean(list(per_class.values()))) if per_class else 0.0


def _keyed(boxes: Boxes) -> list[tuple[str, BoundingBox]]:
    if isinstance(boxes, Mapping):
        return [(name, b) for name in sorted(boxes) for b in boxes[name]]
    return [("", b) for b in boxes]


def box_map(
    predictions: Boxes, groundtruth: Boxes, iou_thresh: float = 0.5
) -> MapResult:
    """Detection mAP; object IDs are ignored.

    ``predictions`` and ``groundtruth`` are box lists, or mappings from
    sequence name to box list when several sequences are pooled.
    """
    preds = _keyed(predictions)
    gts = _keyed(groundtruth)
    classes = sorted({b.class_id for _, b in gts})
    per_class: dict[int, float] = {}
    num_gt: dict[int, int] = {}

    for c in classes:
        gt_by_frame: dict[tuple[str, int], list[Rect]] = defaultdict(list)
        for seq, b in gts:
            if b.class_id == c:
                gt_by_frame[(seq, b.fid)].append(b.rect)
        n_gt = sum(len(v) for v in gt_by_frame.values())
        matched = {key: [False] * len(v) for key, v in gt_by_frame.items()}

        cls_preds = [(seq, b) for seq, b in preds if b.class_id == c]
        hits: list[bool] = []
        for k in _rank([b.score for _, b in cls_preds]):
            seq, pred = cls_preds[k]
            key = (seq, pred.fid)
            best, best_iou = -1, -1.0
            for j, rect in enumerate(gt_by_frame.get(key, [])):
                if matched[key][j]:
                    continue
                overlap = iou(pred.rect, rect)
                if overlap > best_iou:
                    best, best_iou = j, overlap
            hit = best >= 0 and best_iou >= iou_thresh
            if hit:
                matched[key][best] = True
            hits.append(hit)

        per_class[c] = _ap_from_hits(hits, n_gt)
        num_gt[c] = n_gt

    return MapResult(mean_ap=_mean(per_class), per_class=per_class, num_gt=num_gt)


@dataclass(frozen=True)
class Tracklet:
    """All boxes of one object ID in one sequence, ordered by frame."""

    object_id: int
    class_id: int
    boxes: tuple[BoundingBox, ...]
    sequence: str = ""

    def __post_init__(self) -> None:
        fids = [b.fid for b in self.boxes]
        if not fids or any(a >= b for a, b in pairwise(fids)):
            raise ValueError(
                f"tracklet {self.object_id} needs strictly increasing frames, "
                f"got {fids}"
            )

    @property
    def score(self) -> float:
        return float(np.mean([b.score for b in self.boxes]))

    @property
    def frames(self) -> dict[int, Rect]:
        return {b.fid: b.rect for b in self.boxes}

    def __len__(self) -> int:
        return len(self.boxes)


def build_tracklets(boxes: Sequence[BoundingBox], sequence: str = "") -> list[Tracklet]:
    """Group boxes by object ID.

    Raises:
        MissingIds: A box has no object ID.
    """
    groups: dict[int, list[BoundingBox]] = defaultdict(list)
    for b in boxes:
        if b.id is None:
            where = sequence or "sequence"
            raise MissingIds(f"box in frame {b.fid} of {where} has no object id")
        groups[b.id].append(b)
    tracklets = []
    for object_id in sorted(groups):
        members = sorted(groups[object_id], key=lambda b: b.fid)
        tracklets.append(
            Tracklet(
                object_id=object_id,
                class_id=members[0].class_id,
                boxes=tuple(members),
                sequence=sequence,
            )
        )
    return tracklets


def pool_sequences(boxes: Mapping[str, Sequence[BoundingBox]]) -> list[Tracklet]:
    """Tracklets of several sequences, named by their sequence."""
    return [t for name in sorted(boxes) for t in build_tracklets(boxes[name], name)]


def _tracklets_of(boxes: Boxes) -> list[Tracklet]:
    if isinstance(boxes, Mapping):
        return pool_sequences(boxes)
    return build_tracklets(boxes)


def temporal_iou(a: Tracklet, b: Tracklet, box_iou: float = 0.5) -> float:
    """Frames where both exist with box IOU >= ``box_iou``, over the union of frames."""
    if a.sequence != b.sequence:
        return 0.0
    fa, fb = a.frames, b.frames
    union = len(fa.keys() | fb.keys())
    matched = sum(
        1 for fid in fa.keys() & fb.keys() if iou(fa[fid], fb[fid]) >= box_iou
    )
    return matched / union


def tracklet_map(
    predictions: Sequence[Tracklet],
    groundtruth: Sequence[Tracklet],
    box_iou: float = 0.5,
    tracklet_iou: float = 0.5,
) -> MapResult:
    """Tracklet mAP: tracklets ranked by mean box score."""
    classes = sorted({t.class_id for t in groundtruth})
    per_class: dict[int, float] = {}
    num_gt: dict[int, int] = {}

    for c in classes:
        cls_gt = [t for t in groundtruth if t.class_id == c]
        matched = [False] * len(cls_gt)
        cls_preds = [t for t in predictions if t.class_id == c]
        hits: list[bool] = []
        for k in _rank([t.score for t in cls_preds]):
            pred = cls_preds[k]
            best, best_iou = -1, -1.0
            for j, gt in enumerate(cls_gt):
                if matched[j]:
                    continue
                overlap = temporal_iou(pred, gt, box_iou)
                if overlap > best_iou:
                    best, best_iou = j, overlap
            hit = best >= 0 and best_iou >= tracklet_iou
            if hit:
                matched[best] = True
            hits.append(hit)
        per_class[c] = _ap_from_hits(hits, len(cls_gt))
        num_gt[c] = len(cls_gt)

    return MapResult(mean_ap=_mean(per_class), per_class=per_class, num_gt=num_gt)


def tracklet_map_from_boxes(
    predictions: Boxes,
    groundtruth: Boxes,
    box_iou: float = 0.5,
    tracklet_iou: float = 0.5,
) -> MapResult:
    """:func:`tracklet_map` on box lists (or per-sequence mappings of them)."""
    return tracklet_map(
        _tracklets_of(predictions), _tracklets_of(groundtruth), box_iou, tracklet_iou
    )


__all__ = [
    "MapResult",
    "Tracklet",
    "average_precision",
    "box_map",
    "build_tracklets",
    "pool_sequences",
    "temporal_iou",
    "tracklet_map",
    "tracklet_map_from_boxes",
]
