"""Axis-aligned box arithmetic.

Rectangles are ``(x, y, w, h)`` with real-valued pixel coordinates, ``(x, y)``
being the top-left corner. IOU is computed in continuous geometry.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np

from .errors import EmptyAfterClip


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle with positive width and height."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        values = (self.x, self.y, self.w, self.h)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"Rect coordinates must be finite, got {values}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"Rect needs w > 0 and h > 0, got w={self.w} h={self.h}")

    @classmethod
    def from_center(cls, cx: float, cy: float, w: float, h: float) -> Rect:
        return cls(cx - w / 2.0, cy - h / 2.0, w, h)

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    @property
    def area(self) -> float:
        return self.w * self.h

    def translate(self, dx: float, dy: float) -> Rect:
        return Rect(self.x + dx, self.y + dy, self.w, self.h)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


def iou(a: Rect, b: Rect) -> float:
    """Intersection over union of two rectangles, 0 when disjoint."""
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def iou_matrix(rows: Sequence[Rect], cols: Sequence[Rect]) -> np.ndarray:
    """Pairwise IOU, shape ``(len(rows), len(cols))``."""
    if not rows or not cols:
        return np.zeros((len(rows), len(cols)), dtype=np.float64)
    a = np.array([r.as_tuple() for r in rows], dtype=np.float64)
    b = np.array([r.as_tuple() for r in cols], dtype=np.float64)
    ax1, ay1 = a[:, 0:1], a[:, 1:2]
    ax2, ay2 = ax1 + a[:, 2:3], ay1 + a[:, 3:4]
    bx1, by1 = b[:, 0], b[:, 1]
    bx2, by2 = bx1 + b[:, 2], by1 + b[:, 3]
    iw = np.clip(np.minimum(ax2, bx2) - np.maximum(ax1, bx1), 0.0, None)
    ih = np.clip(np.minimum(ay2, by2) - np.maximum(ay1, by1), 0.0, None)
    inter = iw * ih
    union = (a[:, 2:3] * a[:, 3:4]) + (b[:, 2] * b[:, 3]) - inter
    return inter / union


def clip(r: Rect, bounds: Rect) -> Rect:
    """Intersect ``r`` with ``bounds``.

    Raises:
        EmptyAfterClip: The intersection has zero area.
    """
    x1 = max(r.x, bounds.x)
    y1 = max(r.y, bounds.y)
    x2 = min(r.x2, bounds.x2)
    y2 = min(r.y2, bounds.y2)
    if x2 <= x1 or y2 <= y1:
        raise EmptyAfterClip(f"{r} does not overlap {bounds}")
    return Rect(x1, y1, x2 - x1, y2 - y1)


def frame_bounds(height: int, width: int) -> Rect:
    return Rect(0.0, 0.0, float(width), float(height))


@dataclass(frozen=True)
class BoundingBox:
    """A box in one frame: geometry, frame index, confidence, identity, class.

    ``id`` is None for raw detections that have not been associated yet.
    """

    rect: Rect
    fid: int
    score: float = 1.0
    id: int | None = None
    class_id: int = 0

    def __post_init__(self) -> None:
        if self.fid < 1:
            raise ValueError(f"Frame ids start at 1, got {self.fid}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"Score must lie in [0, 1], got {self.score}")

    def with_id(self, object_id: int) -> BoundingBox:
        return replace(self, id=object_id)

    def moved_to(self, center: tuple[float, float], fid: int) -> BoundingBox:
        """Same size, score, id and class, centered at ``center`` in frame ``fid``."""
        rect = Rect.from_center(center[0], center[1], self.rect.w, self.rect.h)
        return replace(self, rect=rect, fid=fid)


__all__ = [
    "Rect",
    "BoundingBox",
    "iou",
    "iou_matrix",
    "clip",
    "frame_bounds",
]
