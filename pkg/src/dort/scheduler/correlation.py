"""Point-wise correlation between a keyframe and a current feature map.

For every cell ``(i, j)`` and displacement ``(p, q)`` with ``|p|, |q| <= d``
the output holds ``<a(i, j), b(i + p, j + q)>``; comparisons that leave the
map read zeros. Channel ``(p + d) * (2d + 1) + (q + d)`` stores offset
``(p, q)``, so each cell's channel vector is a tiny SiamFC response map of a
one-cell target against its ``(2d + 1)^2`` neighbourhood.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.featmap import Tensor3
from ..errors import ShapeMismatch


@dataclass(frozen=True, eq=False)
class CorrelationMap:
    data: np.ndarray  # (H, W, (2d+1)^2)
    d: int

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def channels(self) -> int:
        return (2 * self.d + 1) ** 2

    def channel_of(self, p: int, q: int) -> int:
        return channel_index(p, q, self.d)

    def displacement_of(self, channel: int) -> tuple[int, int]:
        side = 2 * self.d + 1
        return (channel // side - self.d, channel % side - self.d)

    def best_displacements(self) -> np.ndarray:
        """Per-cell ``(p, q)`` of the strongest response, shape ``(H, W, 2)``."""
        best = np.argmax(self.data, axis=2)
        side = 2 * self.d + 1
        return np.stack([best // side - self.d, best % side - self.d], axis=2)


def channel_index(p: int, q: int, d: int) -> int:
    if abs(p) > d or abs(q) > d:
        raise ValueError(f"offset ({p}, {q}) exceeds max displacement {d}")
    return (p + d) * (2 * d + 1) + (q + d)


def correlation_layer(a: Tensor3, b: Tensor3, d: int) -> CorrelationMap:
    """Compare ``a`` with ``b`` over a ``(2d + 1)^2`` neighbourhood.

    Raises:
        ShapeMismatch: ``a`` and ``b`` differ in shape.
    """
    if a.shape != b.shape:
        raise ShapeMismatch(f"correlation inputs differ: {a.shape} vs {b.shape}")
    if d < 0:
        raise ValueError("d must be >= 0")
    H, W, _ = a.shape
    side = 2 * d + 1
    padded = np.pad(b, ((d, d), (d, d), (0, 0)))
    out = np.empty((H, W, side * side), dtype=np.float64)
    for p in range(-d, d + 1):
        for q in range(-d, d + 1):
            shifted = padded[d + p : d + p + H, d + q : d + q + W]
            out[:, :, channel_index(p, q, d)] = np.einsum("ijc,ijc->ij", a, shifted)
    return CorrelationMap(data=out, d=d)


__all__ = ["CorrelationMap", "correlation_layer", "channel_index"]
