"""Simulated single-frame detector.

Stands in for a real detector by corrupting ground truth: Gaussian jitter of
center and size, random misses, Poisson-distributed spurious boxes, and
scores drawn from a high Beta for true boxes and a low Beta for spurious
ones. Randomness for frame ``fid`` comes from ``default_rng([seed, fid])``,
so a frame's detections do not depend on which other frames were detected.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import replace

import numpy as np

from ..config import NoiseConfig
from ..errors import EmptyAfterClip
from ..geometry import BoundingBox, Rect, clip
from ..utils.logger import get_logger

logger = get_logger(__name__)


def simulate_detector(
    gt_boxes: Sequence[BoundingBox],
    noise: NoiseConfig,
    rng: np.random.Generator,
    bounds: Rect,
    fid: int | None = None,
    num_classes: int = 1,
) -> list[BoundingBox]:
    """Noisy detections for one frame's ground truth (IDs stripped).

    ``fid`` defaults to the frame of ``gt_boxes``; with neither there is no
    frame to place spurious boxes in and the result is empty.
    """
    if fid is None:
        if not gt_boxes:
            return []
        fid = gt_boxes[0].fid

    detections: list[BoundingBox] = []
    for gt in gt_boxes:
        if rng.random() < noise.drop_prob:
            continue
        dx, dy = rng.normal(0.0, noise.center_jitter, size=2)
        dw, dh = rng.normal(0.0, noise.size_jitter, size=2)
        w = max(1.0, gt.rect.w + dw)
        h = max(1.0, gt.rect.h + dh)
        # jitter the center, keep it fixed under the size change
        x = gt.rect.x + dx - (w - gt.rect.w) / 2.0
        y = gt.rect.y + dy - (h - gt.rect.h) / 2.0
        score = 1.0
        if noise.true_score_beta is not None:
            score = float(rng.beta(*noise.true_score_beta))
        try:
            rect = clip(Rect(x, y, w, h), bounds)
        except EmptyAfterClip:
            continue
        detections.append(
            BoundingBox(rect=rect, fid=fid, score=score, id=None, class_id=gt.class_id)
        )

    lo, hi = noise.spurious_size
    for _ in range(int(rng.poisson(noise.spurious_rate))):
        w = float(min(rng.integers(lo, hi + 1), bounds.w))
        h = float(min(rng.integers(lo, hi + 1), bounds.h))
        x = float(rng.uniform(bounds.x, bounds.x2 - w))
        y = float(rng.uniform(bounds.y, bounds.y2 - h))
        score = float(rng.beta(*noise.false_score_beta))
        class_id = int(rng.integers(0, max(num_classes, 1)))
        detections.append(
            BoundingBox(
                rect=Rect(x, y, w, h), fid=fid, score=score, id=None, class_id=class_id
            )
        )
    return detections


def sequence_seed(run_seed: int, index: int) -> int:
    """Independent seed for the ``index``-th sequence of a run."""
    return int(np.random.SeedSequence([run_seed, index]).generate_state(1)[0])


class SimulatedDetector:
    """Detector over known ground truth.

    Args:
        groundtruth: Ground-truth boxes per frame id.
        noise: Noise model; ``noise.seed`` seeds every frame.
        height: Frame height used to clip boxes.
        width: Frame width used to clip boxes.
        num_classes: Classes spurious boxes are drawn from.
    """

    def __init__(
        self,
        groundtruth: Mapping[int, Sequence[BoundingBox]],
        noise: NoiseConfig,
        height: int,
        width: int,
        num_classes: int = 1,
    ):
        self.groundtruth = groundtruth
        self.noise = noise
        self.bounds = Rect(0.0, 0.0, float(width), float(height))
        self.num_classes = num_classes
        self.calls = 0

    def detect(self, frame: np.ndarray | None, fid: int) -> list[BoundingBox]:
        self.calls += 1
        rng = np.random.default_rng([self.noise.seed, fid])
        return simulate_detector(
            self.groundtruth.get(fid, []),
            self.noise,
            rng,
            self.bounds,
            fid,
            self.num_classes,
        )


class CachedDetector:
    """Replays detections loaded from a ``det_<seed>.csv`` table."""

    def __init__(self, detections: Sequence[BoundingBox]):
        self.by_frame: dict[int, list[BoundingBox]] = {}
        for box in detections:
            self.by_frame.setdefault(box.fid, []).append(box)
        self.calls = 0

    def detect(self, frame: np.ndarray | None, fid: int) -> list[BoundingBox]:
        self.calls += 1
        boxes = self.by_frame.get(fid, [])
        return [b if b.id is None else replace(b, id=None) for b in boxes]


def detector_for_sequence(
    groundtruth: Mapping[int, Sequence[BoundingBox]],
    index: int,
    noise: NoiseConfig,
    height: int,
    width: int,
    num_classes: int = 1,
) -> SimulatedDetector:
    """Detector for the ``index``-th sequence of a run seeded with ``noise.seed``."""
    seeded = replace(noise, seed=sequence_seed(noise.seed, index))
    return SimulatedDetector(groundtruth, seeded, height, width, num_classes)


def detect_all(
    detector: SimulatedDetector | CachedDetector, num_frames: int
) -> list[BoundingBox]:
    """Run ``detector`` on every frame id; used to fill the detection cache."""
    out: list[BoundingBox] = []
    for fid in range(1, num_frames + 1):
        out.extend(detector.detect(None, fid))
    return out


__all__ = [
    "simulate_detector",
    "sequence_seed",
    "SimulatedDetector",
    "CachedDetector",
    "detector_for_sequence",
    "detect_all",
]
