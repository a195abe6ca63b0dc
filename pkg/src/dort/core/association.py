"""Hungarian assignment and ID inheritance at detect events."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..geometry import BoundingBox, iou_matrix
from ..utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class Assignment:
    """Result of a minimum-cost matching.

    ``pairs`` are ``(row, col)`` sorted by row; every row and column appears
    exactly once across ``pairs`` and the unmatched lists.
    """

    pairs: list[tuple[int, int]]
    unmatched_rows: list[int]
    unmatched_cols: list[int]
    total_cost: float = 0.0


def hungarian(costs: np.ndarray, forbidden: np.ndarray | None = None) -> Assignment:
    """Minimum-cost maximum-size matching on a rectangular cost matrix.

    Forbidden pairs are priced above any feasible total so the solver only
    uses them when no feasible pair is left; they are then reported as
    unmatched.
    """
    costs = np.asarray(costs, dtype=np.float64)
    if costs.ndim != 2:
        raise ValueError(f"cost matrix must be 2-D, got shape {costs.shape}")
    n, m = costs.shape
    if n == 0 or m == 0:
        return Assignment([], list(range(n)), list(range(m)))
    if not np.all(np.isfinite(costs)):
        raise ValueError("cost matrix must be finite")

    work = costs
    if forbidden is not None and forbidden.any():
        allowed = costs[~forbidden]
        span = float(np.abs(allowed).max()) if allowed.size else 0.0
        big = 2.0 * (span + 1.0) * (min(n, m) + 1)
        work = np.where(forbidden, big, costs)

    rows, cols = linear_sum_assignment(work)
    pairs = [
        (int(r), int(c))
        for r, c in zip(rows, cols, strict=True)
        if forbidden is None or not forbidden[r, c]
    ]
    matched_rows = {r for r, _ in pairs}
    matched_cols = {c for _, c in pairs}
    return Assignment(
        pairs=pairs,
        unmatched_rows=[r for r in range(n) if r not in matched_rows],
        unmatched_cols=[c for c in range(m) if c not in matched_cols],
        total_cost=float(sum(costs[r, c] for r, c in pairs)),
    )


@dataclass
class IdCounter:
    """Strictly increasing object-ID source for one sequence."""

    next_id: int = 1
    issued: list[int] = field(default_factory=list, repr=False)

    def take(self) -> int:
        object_id = self.next_id
        self.next_id += 1
        self.issued.append(object_id)
        return object_id


def assign_new_ids(
    boxes: Sequence[BoundingBox], counter: IdCounter
) -> list[BoundingBox]:
    return [b.with_id(counter.take()) for b in boxes]


def associate(
    prev: Sequence[BoundingBox],
    curr: Sequence[BoundingBox],
    counter: IdCounter,
    gate_iou: float = 0.3,
) -> list[BoundingBox]:
    """Give fresh detections the IDs of the previous frame's boxes.

    Cost is ``1 - IOU``. Pairs below ``gate_iou`` or with different classes
    are never matched. Unmatched detections get new IDs; unmatched previous
    boxes end their tracklets. Output keeps the order of ``curr``.
    """
    if not prev:
        return assign_new_ids(curr, counter)
    if not curr:
        logger.debug(f"No detections; terminating {len(prev)} tracklets")
        return []

    overlap = iou_matrix([b.rect for b in prev], [b.rect for b in curr])
    prev_cls = np.array([b.class_id for b in prev])[:, None]
    curr_cls = np.array([b.class_id for b in curr])[None, :]
    forbidden = (overlap < gate_iou) | (prev_cls != curr_cls)

    result = hungarian(1.0 - overlap, forbidden)
    inherited = {c: prev[r].id for r, c in result.pairs}

    out: list[BoundingBox] = []
    for c, det in enumerate(curr):
        object_id = inherited.get(c)
        out.append(det.with_id(object_id if object_id is not None else counter.take()))

    if result.unmatched_rows:
        ended = [prev[r].id for r in result.unmatched_rows]
        logger.debug(f"Frame {curr[0].fid}: tracklets ended {ended}")
    return out


__all__ = ["Assignment", "IdCounter", "hungarian", "associate", "assign_new_ids"]
