"""Labelled scheduler training pairs from synthetic sequences."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from ..config import TrainConfig
from ..core.featmap import FeatureExtractor, extract_features
from ..core.tracker import CorrelationTracker
from ..scheduler.labeling import LabeledState, label_pair
from ..scheduler.network import SchedulerState
from ..scheduler.training import class_counts
from ..utils.logger import get_logger
from .scene import SyntheticSequence

logger = get_logger(__name__)

IMBALANCE_WARNING = 0.1


def build_scheduler_dataset(
    sequences: Sequence[SyntheticSequence],
    extractor: FeatureExtractor,
    tracker: CorrelationTracker,
    cfg: TrainConfig | None = None,
) -> list[LabeledState]:
    """Sample ``(t, t + tau)`` pairs and label each by simulated tracking.

    For every start frame ``t``, ``cfg.pairs_per_frame`` gaps ``tau`` are
    drawn uniformly from ``[1, cfg.tau_max]`` (clipped to the sequence end)
    with ``default_rng(cfg.seed)``. Features are computed once per frame and
    shared by all pairs of a sequence.
    """
    cfg = cfg or TrainConfig()
    rng = np.random.default_rng(cfg.seed)
    crop = tracker.mode == "crop"
    samples: list[LabeledState] = []

    for seq in sequences:
        n = seq.num_frames
        if n < 2:
            logger.debug(f"Skipping {seq.name}: needs at least 2 frames")
            continue
        features = [extract_features(f, extractor) for f in seq.frames]
        gt = seq.boxes_by_frame()
        for t in range(1, n):
            for _ in range(cfg.pairs_per_frame):
                tau = min(int(rng.integers(1, cfg.tau_max + 1)), n - t)
                label = label_pair(
                    gt[t],
                    gt[t + tau],
                    tracker,
                    features[t - 1 : t + tau],
                    cfg.label_iou,
                    frames=seq.frames[t - 1 : t + tau] if crop else None,
                )
                state = SchedulerState(
                    keyframe_feature=features[t - 1],
                    current_feature=features[t + tau - 1],
                    keyframe_index=t,
                    current_index=t + tau,
                )
                samples.append(
                    LabeledState(state=state, label=label, sequence=seq.name)
                )

    counts = class_counts(samples)
    logger.info(
        f"Built scheduler dataset: {len(samples)} pairs from "
        f"{len(sequences)} sequences, {counts}"
    )
    if samples:
        minority = min(counts.values()) / len(samples)
        if minority < IMBALANCE_WARNING:
            logger.warning(
                f"Scheduler dataset is imbalanced: minority class share {minority:.3f}"
            )
    return samples


__all__ = ["build_scheduler_dataset"]
