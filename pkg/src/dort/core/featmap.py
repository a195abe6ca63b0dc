"""Dense feature maps, convolution primitives and the shared feature extractor.

Feature maps are ``float64`` arrays laid out ``(H, W, C)``. Convolutions are
valid-mode (no padding) and implemented with strided window views plus
``einsum``, so no Python loop runs over spatial positions.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import softmax

from ..config import FeatureConfig
from ..errors import ImageTooSmall, ShapeMismatch
from ..utils.logger import get_logger

logger = get_logger(__name__)

Tensor3 = np.ndarray
ACTIVATIONS = ("relu", "none")


def as_tensor3(data: np.ndarray) -> Tensor3:
    """Validate and convert to a C-contiguous finite ``(H, W, C)`` float64 array."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ShapeMismatch(f"expected an (H, W, C) tensor, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor contains non-finite values")
    return np.ascontiguousarray(arr)


@dataclass(frozen=True, eq=False)
class ConvLayer:
    """Convolution weights laid out ``(K, k, k, C_in)`` plus bias ``(K,)``."""

    kernels: np.ndarray
    bias: np.ndarray
    stride: int = 1
    activation: str = "relu"

    def __post_init__(self) -> None:
        if self.kernels.ndim != 4 or self.kernels.shape[1] != self.kernels.shape[2]:
            raise ShapeMismatch(
                f"kernels must be (K, k, k, C), got {self.kernels.shape}"
            )
        if self.kernel_size % 2 == 0:
            raise ValueError(f"kernel size must be odd, got {self.kernel_size}")
        if self.bias.shape != (self.kernels.shape[0],):
            raise ShapeMismatch(
                f"bias shape {self.bias.shape} does not match "
                f"{self.kernels.shape[0]} kernels"
            )
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")

    @property
    def kernel_size(self) -> int:
        return int(self.kernels.shape[1])

    @property
    def in_channels(self) -> int:
        return int(self.kernels.shape[3])

    @property
    def out_channels(self) -> int:
        return int(self.kernels.shape[0])

    def output_hw(self, height: int, width: int) -> tuple[int, int]:
        k, s = self.kernel_size, self.stride
        return ((height - k) // s + 1, (width - k) // s + 1)


def conv2d_valid(x: Tensor3, layer: ConvLayer) -> Tensor3:
    """Valid-mode strided convolution followed by the layer's activation.

    Raises:
        ShapeMismatch: channel counts differ or the input is smaller than
            the kernel.
    """
    H, W, C = x.shape
    k = layer.kernel_size
    if C != layer.in_channels:
        raise ShapeMismatch(
            f"input has {C} channels, layer expects {layer.in_channels}"
        )
    if H < k or W < k:
        raise ShapeMismatch(f"input {H}x{W} is smaller than the {k}x{k} kernel")

    # windows: (H-k+1, W-k+1, C, k, k)
    s = layer.stride
    windows = sliding_window_view(x, (k, k), axis=(0, 1))[::s, ::s]
    out = np.einsum("ijcuv,nuvc->ijn", windows, layer.kernels) + layer.bias
    if layer.activation == "relu":
        np.maximum(out, 0.0, out=out)
    return out


def cross_correlate(target: Tensor3, search: Tensor3) -> Tensor3:
    """Dense sliding dot product of ``target`` over ``search``.

    Returns a ``(H_s - H_t + 1, W_s - W_t + 1, 1)`` response map.
    """
    Ht, Wt, Ct = target.shape
    Hs, Ws, Cs = search.shape
    if Ct != Cs:
        raise ShapeMismatch(f"target has {Ct} channels, search has {Cs}")
    if Ht > Hs or Wt > Ws:
        raise ShapeMismatch(f"target {Ht}x{Wt} does not fit in search {Hs}x{Ws}")
    windows = sliding_window_view(search, (Ht, Wt), axis=(0, 1))
    return np.einsum("ijcuv,uvc->ij", windows, target)[:, :, None]


def softmax2(logits: Sequence[float] | np.ndarray) -> np.ndarray:
    """Two-way softmax with max subtraction."""
    z = np.asarray(logits, dtype=np.float64)
    if z.shape != (2,):
        raise ShapeMismatch(f"softmax2 takes a pair of logits, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("logits must be finite")
    return softmax(z)


@dataclass(frozen=True, eq=False)
class FeatureExtractor:
    """Fixed convolutional feature extractor shared by tracker and scheduler.

    Weights are drawn once from ``seed`` and never trained; the same seed and
    frame always give bit-identical features.
    """

    layers: tuple[ConvLayer, ...]
    seed: int = 0
    frame_height: int | None = None
    frame_width: int | None = None

    @classmethod
    def from_config(cls, cfg: FeatureConfig) -> FeatureExtractor:
        rng = np.random.default_rng(cfg.seed)
        layers = []
        in_channels = cfg.in_channels
        for spec in cfg.layers:
            fan_in = spec.kernel_size * spec.kernel_size * in_channels
            kernels = rng.standard_normal(
                (spec.out_channels, spec.kernel_size, spec.kernel_size, in_channels)
            ) / np.sqrt(fan_in)
            bias = 0.1 * rng.standard_normal(spec.out_channels)
            layers.append(
                ConvLayer(
                    kernels=kernels,
                    bias=bias,
                    stride=spec.stride,
                    activation=spec.activation,
                )
            )
            in_channels = spec.out_channels
        logger.debug(f"Feature extractor: {len(layers)} layers, seed {cfg.seed}")
        return cls(
            layers=tuple(layers),
            seed=cfg.seed,
            frame_height=cfg.frame_height,
            frame_width=cfg.frame_width,
        )

    @property
    def in_channels(self) -> int:
        return self.layers[0].in_channels

    @property
    def out_channels(self) -> int:
        return self.layers[-1].out_channels

    @property
    def total_stride(self) -> int:
        return int(np.prod([layer.stride for layer in self.layers]))

    @property
    def receptive_field(self) -> int:
        """Side length in pixels of the input patch seen by one output cell."""
        rf, jump = 1, 1
        for layer in self.layers:
            rf += (layer.kernel_size - 1) * jump
            jump *= layer.stride
        return rf

    def output_shape(self, height: int, width: int) -> tuple[int, int, int]:
        h, w = height, width
        for layer in self.layers:
            h, w = layer.output_hw(h, w)
        return (h, w, self.out_channels)

    def pixels_for_cells(self, n_cells: int) -> int:
        """Crop side in pixels whose features are exactly ``n_cells`` wide."""
        return (n_cells - 1) * self.total_stride + self.receptive_field


def frame_to_array(frame: np.ndarray) -> Tensor3:
    """uint8 frames become ``[0, 1]`` floats, float frames pass through."""
    arr = np.asarray(frame)
    if arr.dtype == np.uint8:
        arr = arr.astype(np.float64) / 255.0
    return as_tensor3(arr)


def extract_features(frame: np.ndarray, fx: FeatureExtractor) -> Tensor3:
    """Run the extractor on one frame (or crop).

    Raises:
        ImageTooSmall: The frame is smaller than the receptive field.
        ShapeMismatch: The frame's channel count differs from the extractor's.
    """
    x = frame_to_array(frame)
    rf = fx.receptive_field
    if x.shape[0] < rf or x.shape[1] < rf:
        raise ImageTooSmall(
            f"frame {x.shape[0]}x{x.shape[1]} is smaller than the "
            f"{rf}px receptive field"
        )
    for layer in fx.layers:
        x = conv2d_valid(x, layer)
    return x


__all__ = [
    "Tensor3",
    "ConvLayer",
    "FeatureExtractor",
    "as_tensor3",
    "conv2d_valid",
    "cross_correlate",
    "softmax2",
    "extract_features",
    "frame_to_array",
]
