"""Correlation tracker for many boxes at once.

Two paths produce the same output contract:

- RoI path (default): the target RoI is cut from the keyframe feature map,
  the search RoI from the current frame's feature map, and the two are
  cross-correlated. Features are computed once per frame for all boxes.
- Crop path: every box gets its own pixel crops, and features are extracted
  per crop. This is the slow baseline the RoI path replaces.

Tracking is single-scale: boxes keep their keyframe width, height, score,
id and class; only the center moves. Search windows are centered on the
previous frame's result, so tracking from a keyframe to frame ``i`` is an
iterative fold over the frames in between.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np

from ..config import TrackerConfig
from ..errors import EmptySearchRegion, ShapeMismatch
from ..geometry import BoundingBox, Rect
from ..utils.logger import get_logger
from ..utils.metrics import get_metrics
from .featmap import FeatureExtractor, Tensor3, cross_correlate, extract_features

logger = get_logger(__name__)


@dataclass(frozen=True)
class GridRect:
    """Rectangle in feature-map cells: ``x``/``w`` are columns, ``y``/``h`` rows."""

    x: int
    y: int
    w: int
    h: int

    def crop(self, fmap: Tensor3) -> Tensor3:
        return fmap[self.y : self.y + self.h, self.x : self.x + self.w]

    def contains(self, other: GridRect) -> bool:
        return (
            self.x <= other.x
            and self.y <= other.y
            and other.x + other.w <= self.x + self.w
            and other.y + other.h <= self.y + self.h
        )


def _round_half_up(value: float) -> int:
    return math.floor(value + 0.5)


def to_grid(rect: Rect, total_stride: int, featdims: Sequence[int]) -> GridRect:
    """Map a pixel rectangle onto feature cells.

    Both edges are divided by ``total_stride`` and rounded half up. The
    result is at least one cell in each direction and is shifted (never
    shrunk below one cell) to lie inside the ``(H, W)`` feature extent.
    """
    rows, cols = int(featdims[0]), int(featdims[1])
    x0 = _round_half_up(rect.x / total_stride)
    y0 = _round_half_up(rect.y / total_stride)
    x1 = _round_half_up(rect.x2 / total_stride)
    y1 = _round_half_up(rect.y2 / total_stride)
    w = min(max(1, x1 - x0), cols)
    h = min(max(1, y1 - y0), rows)
    x0 = min(max(x0, 0), cols - w)
    y0 = min(max(y0, 0), rows - h)
    return GridRect(x0, y0, w, h)


@dataclass(frozen=True)
class RoiSpec:
    """Target and search RoIs for one box.

    ``anchor`` is the ``(row, col)`` of the response map that means zero
    displacement from the previous center.
    """

    target_cells: GridRect
    search_cells: GridRect
    anchor: tuple[int, int]
    search_scale: float


@dataclass(frozen=True)
class SingleTrackResult:
    center: tuple[float, float]
    peak: float
    displacement: tuple[float, float]
    offset: tuple[int, int]


def track_single(
    target_feat: Tensor3,
    search_feat: Tensor3,
    prev_center: tuple[float, float],
    total_stride: int,
    anchor: tuple[int, int] | None = None,
) -> SingleTrackResult:
    """Move one box to the peak of its response map.

    The argmax of ``cross_correlate(target_feat, search_feat)`` is converted
    to a pixel displacement through ``total_stride``. Ties resolve to the
    smallest row-major index. With no ``anchor`` the target is assumed to
    sit in the middle of the search region.
    """
    response = cross_correlate(target_feat, search_feat)[:, :, 0]
    if anchor is None:
        anchor = (
            (search_feat.shape[0] - target_feat.shape[0]) // 2,
            (search_feat.shape[1] - target_feat.shape[1]) // 2,
        )
    # np.argmax returns the first maximum in row-major order
    row, col = divmod(int(np.argmax(response)), response.shape[1])
    dx = float((col - anchor[1]) * total_stride)
    dy = float((row - anchor[0]) * total_stride)
    return SingleTrackResult(
        center=(prev_center[0] + dx, prev_center[1] + dy),
        peak=float(response[row, col]),
        displacement=(dx, dy),
        offset=(row, col),
    )


@dataclass(frozen=True, eq=False)
class TrackState:
    """Everything needed to propagate keyframe detections to later frames.

    ``templates`` caches the (optionally mean-centered) keyframe target
    features; they are constant until the next keyframe. ``frozen`` flags
    boxes whose search window left the feature map; they stay in place.
    """

    keyframe_feature: Tensor3
    boxes: tuple[BoundingBox, ...]
    current_centers: tuple[tuple[float, float], ...]
    frame_of_centers: int
    target_cells: tuple[GridRect, ...]
    templates: tuple[Tensor3, ...]
    frozen: tuple[bool, ...]
    keyframe_frame: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = len(self.boxes)
        if not (
            len(self.current_centers) == n
            and len(self.target_cells) == n
            and len(self.templates) == n
            and len(self.frozen) == n
        ):
            raise ShapeMismatch("track state fields disagree on the number of boxes")

    @property
    def keyframe_index(self) -> int:
        return self.boxes[0].fid if self.boxes else self.frame_of_centers

    def __len__(self) -> int:
        return len(self.boxes)


class CorrelationTracker:
    """Single-scale multi-box tracker on the shared feature maps."""

    def __init__(
        self,
        extractor: FeatureExtractor,
        cfg: TrackerConfig | None = None,
        frame_height: int | None = None,
        frame_width: int | None = None,
    ):
        self.extractor = extractor
        self.cfg = cfg or TrackerConfig()
        self.frame_height = frame_height or extractor.frame_height
        self.frame_width = frame_width or extractor.frame_width
        if self.frame_height is None or self.frame_width is None:
            raise ValueError("tracker needs the working frame size")
        self.featdims = extractor.output_shape(self.frame_height, self.frame_width)

    @property
    def total_stride(self) -> int:
        return self.extractor.total_stride

    @property
    def mode(self) -> str:
        return self.cfg.mode

    def _template(self, target: Tensor3) -> Tensor3:
        if self.cfg.center_template:
            return target - target.mean(axis=(0, 1), keepdims=True)
        return target

    def _crop_pixels(self, frame: np.ndarray, cells: GridRect) -> np.ndarray:
        s = self.total_stride
        y0, x0 = cells.y * s, cells.x * s
        h = self.extractor.pixels_for_cells(cells.h)
        w = self.extractor.pixels_for_cells(cells.w)
        return np.asarray(frame)[y0 : y0 + h, x0 : x0 + w]

    def _crop_features(self, frame: np.ndarray, cells: GridRect) -> Tensor3:
        feat = extract_features(self._crop_pixels(frame, cells), self.extractor)
        if feat.shape[:2] != (cells.h, cells.w):
            raise ShapeMismatch(
                f"crop features {feat.shape[:2]} do not cover {cells.h}x{cells.w} cells"
            )
        return feat

    def start(
        self,
        keyframe_feature: Tensor3,
        boxes: Sequence[BoundingBox],
        fid: int,
        keyframe_frame: np.ndarray | None = None,
    ) -> TrackState:
        """Build the state for a new keyframe."""
        if keyframe_feature.shape != self.featdims:
            raise ShapeMismatch(
                f"keyframe feature {keyframe_feature.shape} != expected {self.featdims}"
            )
        if self.mode == "crop" and keyframe_frame is None:
            raise ValueError("crop tracking needs the keyframe pixels")
        cells = tuple(to_grid(b.rect, self.total_stride, self.featdims) for b in boxes)
        if self.mode == "crop":
            targets = [self._crop_features(keyframe_frame, c) for c in cells]
        else:
            targets = [c.crop(keyframe_feature) for c in cells]
        return TrackState(
            keyframe_feature=keyframe_feature,
            boxes=tuple(boxes),
            current_centers=tuple(b.rect.center for b in boxes),
            frame_of_centers=fid,
            target_cells=cells,
            templates=tuple(self._template(t) for t in targets),
            frozen=(False,) * len(boxes),
            keyframe_frame=keyframe_frame if self.mode == "crop" else None,
        )

    def search_region(self, state: TrackState, index: int) -> RoiSpec:
        """Search RoI for box ``index``, centered on its previous center.

        Raises:
            EmptySearchRegion: The clipped window cannot hold the target.
        """
        target = state.target_cells[index]
        box = state.boxes[index].rect
        cx, cy = state.current_centers[index]
        s = self.total_stride
        # cell origin of the box at its previous position
        px = _round_half_up((cx - box.w / 2.0) / s)
        py = _round_half_up((cy - box.h / 2.0) / s)
        mx = max(1, _round_half_up((self.cfg.search_scale - 1.0) * target.w / 2.0))
        my = max(1, _round_half_up((self.cfg.search_scale - 1.0) * target.h / 2.0))

        rows, cols = self.featdims[0], self.featdims[1]
        x0, y0 = max(px - mx, 0), max(py - my, 0)
        x1, y1 = min(px + target.w + mx, cols), min(py + target.h + my, rows)
        if x1 - x0 < target.w or y1 - y0 < target.h:
            raise EmptySearchRegion(
                f"search window for box {index} left the {rows}x{cols} feature map",
                box_index=index,
            )
        return RoiSpec(
            target_cells=target,
            search_cells=GridRect(x0, y0, x1 - x0, y1 - y0),
            anchor=(py - y0, px - x0),
            search_scale=self.cfg.search_scale,
        )

    def _clamp_center(self, center: tuple[float, float]) -> tuple[float, float]:
        return (
            min(max(center[0], 0.0), float(self.frame_width)),
            min(max(center[1], 0.0), float(self.frame_height)),
        )

    def _advance(
        self, state: TrackState, fid: int, search_of
    ) -> tuple[TrackState, list[BoundingBox]]:
        centers = list(state.current_centers)
        frozen = list(state.frozen)
        for i in range(len(state)):
            if frozen[i]:
                continue
            try:
                spec = self.search_region(state, i)
            except EmptySearchRegion as e:
                logger.warning(f"Frame {fid}: freezing box id={state.boxes[i].id}: {e}")
                get_metrics().record_frozen_box()
                frozen[i] = True
                continue
            result = track_single(
                state.templates[i],
                search_of(spec.search_cells),
                centers[i],
                self.total_stride,
                anchor=spec.anchor,
            )
            centers[i] = self._clamp_center(result.center)

        new_state = replace(
            state,
            current_centers=tuple(centers),
            frame_of_centers=fid,
            frozen=tuple(frozen),
        )
        tracked = [
            b.moved_to(c, fid) for b, c in zip(state.boxes, centers, strict=True)
        ]
        return new_state, tracked

    def roi_track_all(
        self, state: TrackState, current_feature: Tensor3, fid: int | None = None
    ) -> tuple[TrackState, list[BoundingBox]]:
        """Track every box into the frame whose features are ``current_feature``."""
        if current_feature.shape != self.featdims:
            raise ShapeMismatch(
                f"current feature {current_feature.shape} != expected {self.featdims}"
            )
        fid = state.frame_of_centers + 1 if fid is None else fid
        return self._advance(state, fid, lambda cells: cells.crop(current_feature))

    def crop_track_all(
        self, state: TrackState, frame: np.ndarray, fid: int | None = None
    ) -> tuple[TrackState, list[BoundingBox]]:
        """Track every box by extracting features from per-box pixel crops."""
        fid = state.frame_of_centers + 1 if fid is None else fid
        return self._advance(
            state, fid, lambda cells: self._crop_features(frame, cells)
        )

    def step(
        self,
        state: TrackState,
        current_feature: Tensor3,
        frame: np.ndarray | None = None,
        fid: int | None = None,
    ) -> tuple[TrackState, list[BoundingBox]]:
        """Advance by one frame using the configured path."""
        if self.mode == "crop":
            if frame is None:
                raise ValueError("crop tracking needs the current frame pixels")
            return self.crop_track_all(state, frame, fid)
        return self.roi_track_all(state, current_feature, fid)

    def track_through(
        self,
        state: TrackState,
        features: Sequence[Tensor3],
        frames: Sequence[np.ndarray] | None = None,
        first_fid: int | None = None,
    ) -> tuple[TrackState, list[BoundingBox]]:
        """Fold :meth:`step` over consecutive frames; returns the last boxes."""
        fid = state.frame_of_centers + 1 if first_fid is None else first_fid
        tracked: list[BoundingBox] = [
            b.moved_to(c, state.frame_of_centers)
            for b, c in zip(state.boxes, state.current_centers, strict=True)
        ]
        for k, feature in enumerate(features):
            frame = frames[k] if frames is not None else None
            state, tracked = self.step(state, feature, frame, fid + k)
        return state, tracked


__all__ = [
    "GridRect",
    "RoiSpec",
    "SingleTrackResult",
    "TrackState",
    "CorrelationTracker",
    "to_grid",
    "track_single",
]
