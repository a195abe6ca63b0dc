"""Supervised training of the scheduler network.

With discount factor 0 the Q-learning view of the scheduler only needs the
immediate reward, which is 1 exactly when the action equals the
ground-truth label. Fitting it reduces to two-class cross-entropy on
labelled ``(keyframe, current)`` feature pairs, optimised here with SGD,
momentum and weight decay. Classes are reweighted inversely to their
frequency because near pairs are mostly track.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F

from ..config import TrainConfig
from ..errors import DegenerateDataset
from ..types import Action
from ..utils.logger import get_logger
from ..utils.metrics import get_metrics
from .correlation import correlation_layer
from .labeling import LabeledState
from .network import SchedulerNetwork, correlation_batch

logger = get_logger(__name__)


@dataclass
class TrainResult:
    model: SchedulerNetwork
    losses: list[float] = field(default_factory=list)
    accuracy: float = 0.0
    class_counts: dict[str, int] = field(default_factory=dict)


def class_counts(samples: Sequence[LabeledState]) -> dict[str, int]:
    labels = [s.label for s in samples]
    return {str(a): labels.count(a) for a in Action}


def class_weights(samples: Sequence[LabeledState]) -> torch.Tensor:
    """Weights ``N / (2 * n_c)`` per class, ordered by action value."""
    counts = class_counts(samples)
    n = len(samples)
    return torch.tensor(
        [n / (2.0 * counts[str(a)]) for a in Action], dtype=torch.float64
    )


def batch_tensors(
    samples: Sequence[LabeledState], displacement: int
) -> tuple[torch.Tensor, torch.Tensor]:
    """Correlate each pair and stack into ``(x, y)`` tensors."""
    maps = [
        correlation_layer(
            s.state.keyframe_feature, s.state.current_feature, displacement
        )
        for s in samples
    ]
    x = correlation_batch(maps)
    y = torch.tensor([int(s.label) for s in samples], dtype=torch.long)
    return x, y


def compute_loss(
    model: SchedulerNetwork,
    x: torch.Tensor,
    y: torch.Tensor,
    weights: torch.Tensor | None = None,
) -> torch.Tensor:
    return F.cross_entropy(model(x), y, weight=weights)


def _check_dataset(samples: Sequence[LabeledState]) -> dict[str, int]:
    if not samples:
        raise DegenerateDataset("training set is empty")
    counts = class_counts(samples)
    missing = [name for name, n in counts.items() if n == 0]
    if missing:
        raise DegenerateDataset(
            f"training set has no {', '.join(missing)} samples: {counts}"
        )
    return counts


def predict_track_probabilities(
    model: SchedulerNetwork, samples: Sequence[LabeledState], batch_size: int = 64
) -> np.ndarray:
    """Track probability for each sample, in order."""
    out = []
    model.eval()
    with torch.no_grad():
        for start in range(0, len(samples), batch_size):
            batch = samples[start : start + batch_size]
            x, _ = batch_tensors(batch, model.displacement)
            out.append(torch.softmax(model(x), dim=1)[:, int(Action.TRACK)].numpy())
    return np.concatenate(out) if out else np.zeros(0)


def train(
    model: SchedulerNetwork,
    dataset: Sequence[LabeledState],
    cfg: TrainConfig,
    on_epoch: Callable[[int, float], None] | None = None,
) -> TrainResult:
    """Fit ``model`` in place and return per-epoch mean losses.

    Sample order per epoch comes from ``numpy.random.default_rng(cfg.seed)``,
    so two runs with the same seed and data end with identical weights.

    Raises:
        DegenerateDataset: ``dataset`` is empty or lacks one of the classes.
    """
    counts = _check_dataset(dataset)
    weights = class_weights(dataset) if cfg.balance_classes else None
    logger.info(
        f"Training scheduler ({model.num_parameters()} params) on {len(dataset)} "
        f"pairs {counts}, {cfg.epochs} epochs"
    )

    optimizer = torch.optim.SGD(
        model.parameters(),
        lr=cfg.learning_rate,
        momentum=cfg.momentum,
        weight_decay=cfg.weight_decay,
    )
    rng = np.random.default_rng(cfg.seed)
    metrics = get_metrics()
    losses: list[float] = []

    for epoch in range(cfg.epochs):
        model.train()
        order = rng.permutation(len(dataset))
        total = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = [dataset[i] for i in order[start : start + cfg.batch_size]]
            x, y = batch_tensors(batch, model.displacement)
            optimizer.zero_grad()
            loss = compute_loss(model, x, y, weights)
            loss.backward()
            optimizer.step()
            total += float(loss.item()) * len(batch)
        mean_loss = total / len(dataset)
        losses.append(mean_loss)
        metrics.record_epoch_loss(mean_loss)
        logger.info(f"Epoch {epoch + 1}/{cfg.epochs}: loss={mean_loss:.5f}")
        if on_epoch is not None:
            on_epoch(epoch, mean_loss)

    probs = predict_track_probabilities(model, dataset)
    predicted = (probs >= 0.5).astype(int)
    labels = np.array([int(s.label) for s in dataset])
    accuracy = float(np.mean(predicted == labels))
    logger.info(f"Final training accuracy: {accuracy:.4f}")
    return TrainResult(
        model=model, losses=losses, accuracy=accuracy, class_counts=counts
    )


__all__ = [
    "TrainResult",
    "train",
    "compute_loss",
    "batch_tensors",
    "class_counts",
    "class_weights",
    "predict_track_probabilities",
]
