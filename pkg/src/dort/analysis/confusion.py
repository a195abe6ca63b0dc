"""Scheduler confusion matrix against ground-truth detect/track labels."""

from __future__ import annotations

from collections.abc import Collection, Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from ..errors import LengthMismatch
from ..types import Action, DecisionRecord, DecisionSource


@dataclass
class ConfusionResult:
    """2x2 counts indexed ``[predicted, label]`` by :class:`Action` value.

    ``fp_rate`` is the share of label-detect frames predicted as track; a
    missed detect is the costly error.
    """

    matrix: np.ndarray

    @property
    def total(self) -> int:
        return int(self.matrix.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.matrix) / self.total) if self.total else 0.0

    @property
    def fp_rate(self) -> float:
        detect_labels = self.matrix[:, Action.DETECT].sum()
        if detect_labels == 0:
            return 0.0
        return float(self.matrix[Action.TRACK, Action.DETECT] / detect_labels)

    def __add__(self, other: ConfusionResult) -> ConfusionResult:
        return ConfusionResult(self.matrix + other.matrix)

    def as_rows(self) -> list[dict[str, int | str]]:
        return [
            {
                "predicted": str(p),
                **{f"label_{g}": int(self.matrix[p, g]) for g in Action},
            }
            for p in Action
        ]


def confusion(
    decisions: Sequence[DecisionRecord],
    labels: Sequence[Action] | None = None,
    sources: Collection[DecisionSource] = (DecisionSource.SCHEDULER,),
) -> ConfusionResult:
    """Count predictions against labels on consulted frames.

    Only decisions whose source is in ``sources`` count. Labels come from
    ``labels`` (aligned with those decisions) or, when None, from each
    decision's recorded ``oracle_action``.

    Raises:
        LengthMismatch: ``labels`` and the counted decisions differ in
            length, or a counted decision carries no oracle label.
    """
    counted = [d for d in decisions if d.source in sources]
    if labels is None:
        missing = [d.frame_id for d in counted if d.oracle_action is None]
        if missing:
            raise LengthMismatch(
                f"decisions at frames {missing[:5]} carry no oracle label"
            )
        labels = [d.oracle_action for d in counted]  # type: ignore[misc]
    elif len(labels) != len(counted):
        raise LengthMismatch(
            f"{len(labels)} labels for {len(counted)} consulted decisions"
        )

    matrix = np.zeros((2, 2), dtype=np.int64)
    for d, label in zip(counted, labels, strict=True):
        matrix[int(d.action), int(label)] += 1
    return ConfusionResult(matrix)


def combine(results: Iterable[ConfusionResult]) -> ConfusionResult:
    total = ConfusionResult(np.zeros((2, 2), dtype=np.int64))
    for r in results:
        total = total + r
    return total


__all__ = ["ConfusionResult", "confusion", "combine"]
