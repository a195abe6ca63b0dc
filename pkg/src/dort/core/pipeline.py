"""The detect-or-track decision loop.

Frame 1 is always detected. Every later frame is either detected (fresh
detections inherit IDs from the previous frame's boxes through Hungarian
association, and the frame becomes the new keyframe) or tracked (keyframe
boxes are moved by the correlation tracker and keep their IDs and scores).
Which one happens is decided per frame by one of three sources:

- ``dort``: the scheduler network, consulted every ``sigma`` frames;
  frames in between are tracked
- ``fixed``: detect whenever ``sigma`` frames have passed since the keyframe
- ``oracle``: the ground-truth labeling rule, on the same stride as ``dort``

Results for frame ``i`` are final before frame ``i + 1`` is read.
"""

from __future__ import annotations

import logging
import time
from collections import defaultdict
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..config import PipelineConfig
from ..errors import EmptySequence, MissingGroundtruth, ShapeMismatch
from ..geometry import BoundingBox
from ..scheduler.labeling import label_from_tracked
from ..scheduler.network import SchedulerNetwork, SchedulerState, schedule
from ..types import Action, DecisionRecord, DecisionSource, Detector
from ..utils.logger import get_logger, log_event
from ..utils.metrics import get_metrics
from .association import IdCounter, assign_new_ids, associate
from .featmap import FeatureExtractor, Tensor3, extract_features
from .tracker import CorrelationTracker, TrackState

logger = get_logger(__name__)

VALID_HOOKS = frozenset(
    {"pre_frame", "post_frame", "on_detect", "on_track", "sequence_end"}
)

Groundtruth = Mapping[int, Sequence[BoundingBox]] | Sequence[BoundingBox]


def group_by_frame(
    boxes: Groundtruth, num_frames: int
) -> dict[int, list[BoundingBox]]:
    """Per-frame lists for frames ``1..num_frames`` (missing frames are empty)."""
    out: dict[int, list[BoundingBox]] = {fid: [] for fid in range(1, num_frames + 1)}
    if isinstance(boxes, Mapping):
        for fid, frame_boxes in boxes.items():
            if fid in out:
                out[fid].extend(frame_boxes)
        return out
    for box in boxes:
        if box.fid in out:
            out[box.fid].append(box)
    return out


@dataclass
class SequenceResult:
    """Everything one pass over a sequence produced.

    ``decisions`` holds one record per frame from 2 on; frame 1 is an
    implicit detect.
    """

    name: str
    num_frames: int
    boxes: list[BoundingBox] = field(default_factory=list)
    decisions: list[DecisionRecord] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=lambda: defaultdict(float))
    mode: str = "dort"
    sigma: int = 1

    def actions(self) -> list[Action]:
        """Action per frame, frame 1 included."""
        return [Action.DETECT] + [d.action for d in self.decisions]

    @property
    def n_detect(self) -> int:
        return sum(1 for a in self.actions() if a == Action.DETECT)

    @property
    def n_track(self) -> int:
        return self.num_frames - self.n_detect

    @property
    def n_consulted(self) -> int:
        return sum(1 for d in self.decisions if d.consulted)

    def boxes_by_frame(self) -> dict[int, list[BoundingBox]]:
        return group_by_frame(self.boxes, self.num_frames)


@dataclass
class _LoopState:
    keyframe: int
    keyframe_feature: Tensor3
    track: TrackState
    prev_boxes: list[BoundingBox]
    last_scheduled: int = 1
    gt_track: TrackState | None = None
    gt_tracked: list[BoundingBox] = field(default_factory=list)


class DetectOrTrackPipeline:
    """Binds detector, tracker, scheduler and association into one loop.

    One instance can process many sequences; every call to
    :meth:`run_sequence` starts from a fresh state (new ID counter, new
    keyframe).
    """

    def __init__(
        self,
        cfg: PipelineConfig,
        detector: Detector,
        extractor: FeatureExtractor,
        tracker: CorrelationTracker,
        scheduler: SchedulerNetwork | None = None,
    ):
        self.cfg = cfg
        self.detector = detector
        self.extractor = extractor
        self.tracker = tracker
        self.scheduler = scheduler
        self.hooks: dict[str, list[Callable[..., Any]]] = defaultdict(list)
        self.metrics = get_metrics()

        if cfg.mode == "dort":
            if scheduler is None:
                raise ValueError("dort mode needs a scheduler network")
            feat_h, feat_w, _ = tracker.featdims
            if (scheduler.in_height, scheduler.in_width) != (feat_h, feat_w):
                raise ShapeMismatch(
                    f"scheduler expects {scheduler.in_height}x{scheduler.in_width} "
                    f"features, extractor gives {feat_h}x{feat_w}"
                )

        logger.info(
            f"DetectOrTrackPipeline initialized: mode={cfg.mode}, sigma={cfg.sigma}, "
            f"delta={cfg.delta}, tracker={tracker.mode}"
        )

    def register_hook(self, hook_point: str, callback: Callable[..., Any]) -> None:
        if hook_point not in VALID_HOOKS:
            logger.warning(
                f"Invalid hook point: {hook_point}. Valid hooks: {sorted(VALID_HOOKS)}"
            )
            return
        self.hooks[hook_point].append(callback)
        logger.debug(f"Registered hook '{callback.__name__}' for '{hook_point}'")

    def _trigger_hooks(self, hook_point: str, **kwargs: Any) -> None:
        for callback in self.hooks.get(hook_point, []):
            try:
                callback(pipeline=self, **kwargs)
            except Exception as e:
                logger.error(
                    f"Hook error at '{hook_point}' ({callback.__name__}): {e}",
                    exc_info=True,
                )
                self.metrics.record_error("hook")

    def _features(self, frame: np.ndarray, timings: dict[str, float]) -> Tensor3:
        start = time.perf_counter()
        feature = extract_features(frame, self.extractor)
        timings["features"] += time.perf_counter() - start
        if feature.shape != self.tracker.featdims:
            raise ShapeMismatch(
                f"frame gives features {feature.shape}, "
                f"tracker works on {self.tracker.featdims}"
            )
        return feature

    def _detect(
        self,
        frame: np.ndarray,
        fid: int,
        prev: list[BoundingBox],
        counter: IdCounter,
        timings: dict[str, float],
    ) -> list[BoundingBox]:
        start = time.perf_counter()
        detections = list(self.detector.detect(frame, fid))
        timings["detect"] += time.perf_counter() - start

        start = time.perf_counter()
        if fid == 1:
            boxes = assign_new_ids(detections, counter)
        else:
            boxes = associate(prev, detections, counter, self.cfg.gate_iou)
        timings["associate"] += time.perf_counter() - start
        return boxes

    def _start_track(
        self,
        feature: Tensor3,
        frame: np.ndarray,
        fid: int,
        boxes: Sequence[BoundingBox],
    ) -> TrackState:
        keyframe_frame = frame if self.tracker.mode == "crop" else None
        return self.tracker.start(feature, boxes, fid, keyframe_frame=keyframe_frame)

    def _decide(
        self,
        fid: int,
        feature: Tensor3,
        state: _LoopState,
        gt_next: list[BoundingBox] | None,
        timings: dict[str, float],
    ) -> tuple[DecisionSource, Action, float | None, Action | None]:
        """Action for frame ``fid``: ``(source, action, p_track, oracle_action)``."""
        if self.cfg.mode == "fixed":
            due = fid - state.keyframe >= self.cfg.sigma
            action = Action.DETECT if due else Action.TRACK
            return DecisionSource.FIXED, action, None, None

        if fid - state.last_scheduled < self.cfg.sigma:
            return DecisionSource.STRIDE, Action.TRACK, None, None
        state.last_scheduled = fid

        oracle_action = None
        if gt_next is not None:
            oracle_action = label_from_tracked(
                state.gt_tracked, gt_next, self.cfg.label_iou
            )

        if self.cfg.mode == "oracle":
            self.metrics.record_consultation(DecisionSource.ORACLE.value)
            return DecisionSource.ORACLE, oracle_action, None, oracle_action

        start = time.perf_counter()
        s = SchedulerState(
            keyframe_feature=state.keyframe_feature,
            current_feature=feature,
            keyframe_index=state.keyframe,
            current_index=fid,
        )
        p_track, action = schedule(self.scheduler, s, self.cfg.delta)
        timings["schedule"] += time.perf_counter() - start
        self.metrics.record_consultation(DecisionSource.SCHEDULER.value, p_track)
        return DecisionSource.SCHEDULER, action, p_track, oracle_action

    def run_sequence(
        self,
        frames: Sequence[np.ndarray],
        groundtruth: Groundtruth | None = None,
        name: str = "seq",
    ) -> SequenceResult:
        """Process ``frames`` in order and return every emitted box.

        Args:
            frames: Frames at the tracker's working size, frame 1 first.
            groundtruth: Ground truth with object IDs; required in oracle
                mode, and in dort mode used for shadow oracle labels.
            name: Sequence name used in logs and results.

        Raises:
            EmptySequence: ``frames`` is empty.
            MissingGroundtruth: Oracle mode without ``groundtruth``.
        """
        if len(frames) == 0:
            raise EmptySequence(f"sequence {name} has no frames")
        if self.cfg.mode == "oracle" and groundtruth is None:
            raise MissingGroundtruth(
                f"oracle mode needs ground truth for sequence {name}"
            )

        n = len(frames)
        gt = group_by_frame(groundtruth, n) if groundtruth is not None else None
        use_gt = gt is not None and self.cfg.mode != "fixed"
        result = SequenceResult(
            name=name, num_frames=n, mode=self.cfg.mode, sigma=self.cfg.sigma
        )
        timings = result.timings
        counter = IdCounter()
        logger.info(
            f"Running {name}: {n} frames, mode={self.cfg.mode}, sigma={self.cfg.sigma}"
        )

        # frame 1: always detect
        frame_start = time.perf_counter()
        self._trigger_hooks("pre_frame", frame_id=1)
        feature = self._features(frames[0], timings)
        boxes = self._detect(frames[0], 1, [], counter, timings)
        state = _LoopState(
            keyframe=1,
            keyframe_feature=feature,
            track=self._start_track(feature, frames[0], 1, boxes),
            prev_boxes=boxes,
        )
        if use_gt:
            state.gt_track = self._start_track(feature, frames[0], 1, gt[1])
            state.gt_tracked = list(gt[1])
        result.boxes.extend(boxes)
        elapsed = time.perf_counter() - frame_start
        self.metrics.record_frame("detect", elapsed, len(boxes))
        self._trigger_hooks("on_detect", frame_id=1, boxes=boxes)
        self._trigger_hooks("post_frame", frame_id=1, action=Action.DETECT, boxes=boxes)

        for fid in range(2, n + 1):
            frame_start = time.perf_counter()
            frame = frames[fid - 1]
            self._trigger_hooks("pre_frame", frame_id=fid)
            feature = self._features(frame, timings)

            if use_gt:
                start = time.perf_counter()
                state.gt_track, state.gt_tracked = self.tracker.step(
                    state.gt_track, feature, frame, fid
                )
                timings["oracle"] += time.perf_counter() - start

            source, action, p_track, oracle_action = self._decide(
                fid, feature, state, gt[fid] if use_gt else None, timings
            )

            if action == Action.DETECT:
                boxes = self._detect(frame, fid, state.prev_boxes, counter, timings)
                state.keyframe = fid
                state.keyframe_feature = feature
                state.track = self._start_track(feature, frame, fid, boxes)
                if use_gt:
                    state.gt_track = self._start_track(feature, frame, fid, gt[fid])
                    state.gt_tracked = list(gt[fid])
                self._trigger_hooks("on_detect", frame_id=fid, boxes=boxes)
            else:
                start = time.perf_counter()
                state.track, boxes = self.tracker.step(state.track, feature, frame, fid)
                timings["track"] += time.perf_counter() - start
                self._trigger_hooks("on_track", frame_id=fid, boxes=boxes)

            state.prev_boxes = boxes
            result.boxes.extend(boxes)
            result.decisions.append(
                DecisionRecord(
                    frame_id=fid,
                    source=source,
                    action=action,
                    p_track=p_track,
                    keyframe=state.keyframe,
                    n_boxes=len(boxes),
                    oracle_action=oracle_action,
                )
            )
            logger.debug(
                f"{name} frame {fid}: {source.value} -> {action}"
                + (f" (p_track={p_track:.4f})" if p_track is not None else "")
            )
            elapsed = time.perf_counter() - frame_start
            self.metrics.record_frame(str(action), elapsed, len(boxes))
            self._trigger_hooks("post_frame", frame_id=fid, action=action, boxes=boxes)

        self.metrics.record_sequence(self.cfg.mode)
        log_event(
            logger,
            logging.INFO,
            f"Finished {name}: {result.n_detect} detect, {result.n_track} track, "
            f"{len(result.boxes)} boxes",
            sequence=name,
            mode=self.cfg.mode,
            sigma=self.cfg.sigma,
            n_detect=result.n_detect,
            n_track=result.n_track,
            n_consulted=result.n_consulted,
        )
        self._trigger_hooks("sequence_end", result=result)
        return result


__all__ = [
    "DetectOrTrackPipeline",
    "SequenceResult",
    "VALID_HOOKS",
    "group_by_frame",
]
