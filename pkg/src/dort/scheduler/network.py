"""The scheduler network: correlation -> conv -> conv -> fc -> 2-way softmax.

Output index 1 is the probability that tracking from the keyframe is still
good enough (``Action.TRACK``); the frame is tracked iff that probability
reaches ``delta``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import torch
from torch import nn

from ..config import SchedulerConfig
from ..core.featmap import ConvLayer, Tensor3, softmax2
from ..errors import ShapeMismatch
from ..types import Action
from .correlation import CorrelationMap, correlation_layer


class SchedulerNetwork(nn.Module):
    """Two strided convolutions and a linear layer on a correlation map.

    The input size is fixed at construction so the fully-connected layer has
    a static width; inputs of any other size are rejected.
    """

    def __init__(
        self,
        in_height: int,
        in_width: int,
        displacement: int = 3,
        conv_channels: tuple[int, int] = (32, 32),
        kernel_size: int = 3,
        stride: int = 2,
        delta: float = 0.97,
        seed: int = 0,
    ):
        super().__init__()
        if not 0.0 < delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        self.in_height = in_height
        self.in_width = in_width
        self.displacement = displacement
        self.conv_channels = tuple(conv_channels)
        self.kernel_size = kernel_size
        self.stride = stride
        self.delta = delta
        self.seed = seed

        h1, w1 = self._out_hw(in_height, in_width)
        h2, w2 = self._out_hw(h1, w1)
        if h2 < 1 or w2 < 1:
            raise ShapeMismatch(
                f"{in_height}x{in_width} input is too small for two "
                f"{kernel_size}x{kernel_size}/{stride} convolutions"
            )
        self.flat_size = self.conv_channels[1] * h2 * w2

        # seeded init without touching the global torch RNG
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            c1, c2 = self.conv_channels
            self.conv1 = nn.Conv2d(self.in_channels, c1, kernel_size, stride)
            self.conv2 = nn.Conv2d(c1, c2, kernel_size, stride)
            self.fc = nn.Linear(self.flat_size, 2)
        self.double()

    @classmethod
    def from_config(
        cls, cfg: SchedulerConfig, feature_height: int, feature_width: int
    ) -> SchedulerNetwork:
        return cls(
            in_height=feature_height,
            in_width=feature_width,
            displacement=cfg.displacement,
            conv_channels=cfg.conv_channels,
            kernel_size=cfg.kernel_size,
            stride=cfg.stride,
            delta=cfg.delta,
            seed=cfg.seed,
        )

    def _out_hw(self, h: int, w: int) -> tuple[int, int]:
        k, s = self.kernel_size, self.stride
        return ((h - k) // s + 1, (w - k) // s + 1)

    @property
    def in_channels(self) -> int:
        return (2 * self.displacement + 1) ** 2

    def hyperparameters(self) -> dict:
        return {
            "in_height": self.in_height,
            "in_width": self.in_width,
            "displacement": self.displacement,
            "conv_channels": list(self.conv_channels),
            "kernel_size": self.kernel_size,
            "stride": self.stride,
            "delta": self.delta,
            "seed": self.seed,
        }

    def num_parameters(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Logits ``(N, 2)`` for correlation maps laid out ``(N, C, H, W)``."""
        x = torch.relu(self.conv1(x))
        x = torch.relu(self.conv2(x))
        return self.fc(torch.flatten(x, 1))

    def as_conv_layers(self) -> tuple[ConvLayer, ConvLayer]:
        """The two convolutions as numpy :class:`ConvLayer` objects."""
        layers = []
        for conv in (self.conv1, self.conv2):
            kernels = conv.weight.detach().cpu().numpy().transpose(0, 2, 3, 1)
            layers.append(
                ConvLayer(
                    kernels=np.ascontiguousarray(kernels),
                    bias=conv.bias.detach().cpu().numpy().copy(),
                    stride=self.stride,
                    activation="relu",
                )
            )
        return layers[0], layers[1]


def correlation_batch(maps: list[CorrelationMap]) -> torch.Tensor:
    """Stack correlation maps into an ``(N, C, H, W)`` float64 tensor."""
    stacked = np.stack([m.data for m in maps]).transpose(0, 3, 1, 2)
    return torch.from_numpy(np.ascontiguousarray(stacked))


@dataclass(frozen=True, eq=False)
class SchedulerState:
    """State of the decision process: keyframe and current features."""

    keyframe_feature: Tensor3
    current_feature: Tensor3
    keyframe_index: int = 1
    current_index: int = 1

    def __post_init__(self) -> None:
        if self.keyframe_feature.shape != self.current_feature.shape:
            raise ShapeMismatch(
                f"keyframe {self.keyframe_feature.shape} and current "
                f"{self.current_feature.shape} features differ"
            )


def state_transition(
    s: SchedulerState, a: Action, next_feature: Tensor3, next_index: int | None = None
) -> SchedulerState:
    """Next state after acting on ``s``.

    Detect promotes the current frame to keyframe; track keeps the keyframe.
    Either way ``next_feature`` becomes the current frame.
    """
    next_index = s.current_index + 1 if next_index is None else next_index
    if a == Action.DETECT:
        return SchedulerState(
            keyframe_feature=s.current_feature,
            current_feature=next_feature,
            keyframe_index=s.current_index,
            current_index=next_index,
        )
    return replace(s, current_feature=next_feature, current_index=next_index)


def track_probability(model: SchedulerNetwork, corr: CorrelationMap) -> float:
    if corr.d != model.displacement:
        raise ShapeMismatch(
            f"correlation d={corr.d}, model expects {model.displacement}"
        )
    if (corr.height, corr.width) != (model.in_height, model.in_width):
        raise ShapeMismatch(
            f"correlation map {corr.height}x{corr.width} != model input "
            f"{model.in_height}x{model.in_width}"
        )
    with torch.no_grad():
        logits = model(correlation_batch([corr]))[0].numpy()
    return float(softmax2(logits)[Action.TRACK])


def schedule(
    model: SchedulerNetwork, s: SchedulerState, delta: float | None = None
) -> tuple[float, Action]:
    """Decide detect or track for the current frame of ``s``.

    Returns ``(p_track, action)`` with ``action`` TRACK iff ``p_track >= delta``
    (the model's own ``delta`` when not given).
    """
    threshold = model.delta if delta is None else delta
    corr = correlation_layer(s.keyframe_feature, s.current_feature, model.displacement)
    p_track = track_probability(model, corr)
    return p_track, Action.TRACK if p_track >= threshold else Action.DETECT


def reward(label: Action, action: Action) -> int:
    """1 when the action agrees with the ground-truth label, else 0."""
    return int(label == action)


__all__ = [
    "SchedulerNetwork",
    "SchedulerState",
    "correlation_batch",
    "state_transition",
    "track_probability",
    "schedule",
    "reward",
]
