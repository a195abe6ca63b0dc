"""Scheduler network, labeling protocol and training."""

from .checkpoint import load_checkpoint, save_checkpoint
from .correlation import CorrelationMap, channel_index, correlation_layer
from .labeling import LabeledState, label_from_tracked, label_pair
from .network import (
    SchedulerNetwork,
    SchedulerState,
    reward,
    schedule,
    state_transition,
    track_probability,
)
from .training import TrainResult, train

__all__ = [
    "CorrelationMap",
    "channel_index",
    "correlation_layer",
    "LabeledState",
    "label_from_tracked",
    "label_pair",
    "SchedulerNetwork",
    "SchedulerState",
    "reward",
    "schedule",
    "state_transition",
    "track_probability",
    "TrainResult",
    "train",
    "load_checkpoint",
    "save_checkpoint",
]
