"""Deterministic synthetic video: textured rectangles over a textured background.

Object positions are rounded to whole pixels so ground-truth boxes coincide
with rendered pixels. Motion is linear plus an optional sinusoid, reflected
at the frame borders so every visible object stays fully inside the frame.
An object is present from ``enter_frame`` up to, but not including,
``exit_frame``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import TypeVar

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.ndimage import gaussian_filter

from ..config import SuiteConfig
from ..errors import SpecOverflow
from ..geometry import BoundingBox, Rect
from ..utils.logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")


class ObjectSpec(BaseModel):
    """One scripted object; positions in pixels, velocities in pixels/frame."""

    object_id: int = Field(ge=1)
    class_id: int = Field(0, ge=0)
    width: int = Field(ge=4)
    height: int = Field(ge=4)
    x0: float = Field(description="Top-left x at the object's first frame")
    y0: float = Field(description="Top-left y at the object's first frame")
    vx: float = 0.0
    vy: float = 0.0
    amplitude_x: float = Field(0.0, ge=0.0)
    amplitude_y: float = Field(0.0, ge=0.0)
    period: float = Field(20.0, ge=1.0, description="Sinusoid period in frames")
    texture_seed: int = 0
    enter_frame: int = Field(1, ge=1)
    exit_frame: int | None = Field(
        None, ge=2, description="First frame without the object"
    )

    @model_validator(mode="after")
    def _check_lifespan(self) -> ObjectSpec:
        if self.exit_frame is not None and self.exit_frame <= self.enter_frame:
            raise ValueError("exit_frame must come after enter_frame")
        return self

    def present(self, fid: int) -> bool:
        if fid < self.enter_frame:
            return False
        return self.exit_frame is None or fid < self.exit_frame


class SceneSpec(BaseModel):
    """A full sequence script."""

    name: str = "seq"
    num_frames: int = Field(ge=1)
    height: int = Field(ge=16)
    width: int = Field(ge=16)
    background_seed: int = 0
    objects: list[ObjectSpec] = Field(default_factory=list)

    @model_validator(mode="after")
    def _unique_ids(self) -> SceneSpec:
        ids = [o.object_id for o in self.objects]
        if len(ids) != len(set(ids)):
            raise ValueError(f"duplicate object ids in scene {self.name}: {ids}")
        return self


def _reflect(p: float, lo: float, hi: float) -> float:
    span = hi - lo
    if span <= 0:
        return lo
    m = (p - lo) % (2.0 * span)
    return lo + (m if m <= span else 2.0 * span - m)


def object_rect(obj: ObjectSpec, fid: int, height: int, width: int) -> Rect:
    """Pixel-aligned rectangle of ``obj`` at frame ``fid``."""
    age = fid - obj.enter_frame
    phase = 2.0 * math.pi * age / obj.period
    x = obj.x0 + obj.vx * age + obj.amplitude_x * math.sin(phase)
    y = obj.y0 + obj.vy * age + obj.amplitude_y * math.sin(phase)
    x = _reflect(x, 0.0, float(width - obj.width))
    y = _reflect(y, 0.0, float(height - obj.height))
    return Rect(
        float(math.floor(x + 0.5)),
        float(math.floor(y + 0.5)),
        float(obj.width),
        float(obj.height),
    )


def _normalized(texture: np.ndarray, lo: float, hi: float) -> np.ndarray:
    t = texture - texture.min()
    peak = t.max()
    if peak > 0:
        t = t / peak
    return lo + (hi - lo) * t


def render_background(spec: SceneSpec) -> np.ndarray:
    rng = np.random.default_rng(spec.background_seed)
    noise = gaussian_filter(rng.random((spec.height, spec.width)), sigma=2.0)
    gradient = np.linspace(0.0, 1.0, spec.width)[None, :]
    return 0.7 * _normalized(noise, 0.05, 0.55) + 0.3 * 0.5 * gradient


def render_texture(obj: ObjectSpec) -> np.ndarray:
    rng = np.random.default_rng([obj.texture_seed, obj.object_id])
    noise = gaussian_filter(rng.standard_normal((obj.height, obj.width)), sigma=1.0)
    return _normalized(noise, 0.35, 1.0)


@dataclass(eq=False)
class SyntheticSequence:
    """Rendered frames (uint8, ``(H, W)``) with their ground truth."""

    name: str
    frames: list[np.ndarray]
    groundtruth: list[BoundingBox]
    spec: SceneSpec | None = None

    @property
    def num_frames(self) -> int:
        return len(self.frames)

    def boxes_by_frame(self) -> dict[int, list[BoundingBox]]:
        out: dict[int, list[BoundingBox]] = {
            fid: [] for fid in range(1, self.num_frames + 1)
        }
        for box in self.groundtruth:
            out[box.fid].append(box)
        return out


def validate_spec(spec: SceneSpec) -> None:
    """Raise :class:`SpecOverflow` for objects that cannot fit the frame."""
    for obj in spec.objects:
        if obj.width > spec.width or obj.height > spec.height:
            raise SpecOverflow(
                f"object {obj.object_id} ({obj.width}x{obj.height}) does not fit "
                f"the {spec.width}x{spec.height} frame"
            )
        inside_x = 0 <= obj.x0 <= spec.width - obj.width
        inside_y = 0 <= obj.y0 <= spec.height - obj.height
        if not (inside_x and inside_y):
            raise SpecOverflow(
                f"object {obj.object_id} starts outside the frame "
                f"at ({obj.x0}, {obj.y0})"
            )


def generate(spec: SceneSpec) -> SyntheticSequence:
    """Render every frame of ``spec`` and its ground-truth table.

    Raises:
        SpecOverflow: An object is larger than the frame or starts outside it.
    """
    validate_spec(spec)
    background = render_background(spec)
    textures = {obj.object_id: render_texture(obj) for obj in spec.objects}

    frames: list[np.ndarray] = []
    groundtruth: list[BoundingBox] = []
    for fid in range(1, spec.num_frames + 1):
        canvas = background.copy()
        for obj in spec.objects:
            if not obj.present(fid):
                continue
            rect = object_rect(obj, fid, spec.height, spec.width)
            x, y = int(rect.x), int(rect.y)
            canvas[y : y + obj.height, x : x + obj.width] = textures[obj.object_id]
            groundtruth.append(
                BoundingBox(
                    rect=rect,
                    fid=fid,
                    score=1.0,
                    id=obj.object_id,
                    class_id=obj.class_id,
                )
            )
        frames.append(np.clip(np.rint(canvas * 255.0), 0, 255).astype(np.uint8))

    groundtruth.sort(key=lambda b: (b.fid, b.id))
    logger.debug(
        f"Generated {spec.name}: {spec.num_frames} frames, "
        f"{len(spec.objects)} objects, {len(groundtruth)} boxes"
    )
    return SyntheticSequence(
        name=spec.name, frames=frames, groundtruth=groundtruth, spec=spec
    )


def standard_suite(
    cfg: SuiteConfig | None = None, seed: int | None = None
) -> list[SceneSpec]:
    """Scene scripts for the benchmark suite.

    Each sequence gets 1..``max_objects`` objects with random size, class,
    speed and wobble. With probability ``event_prob`` one object exits or
    enters mid-sequence; with probability ``fast_prob`` one object moves at
    ``fast_speed``, beyond what the tracker's search window can follow.
    """
    cfg = cfg or SuiteConfig()
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    specs = []
    for k in range(cfg.num_sequences):
        n_objects = int(rng.integers(cfg.min_objects, cfg.max_objects + 1))
        objects = []
        for j in range(n_objects):
            size_w = int(rng.integers(cfg.min_size, cfg.max_size + 1))
            size_h = int(rng.integers(cfg.min_size, cfg.max_size + 1))
            speed = rng.uniform(0.0, cfg.max_speed)
            angle = rng.uniform(0.0, 2.0 * math.pi)
            wobble = rng.random() < 0.3
            objects.append(
                ObjectSpec(
                    object_id=j + 1,
                    class_id=int(rng.integers(0, cfg.num_classes)),
                    width=size_w,
                    height=size_h,
                    x0=float(rng.integers(0, cfg.frame_width - size_w + 1)),
                    y0=float(rng.integers(0, cfg.frame_height - size_h + 1)),
                    vx=speed * math.cos(angle),
                    vy=speed * math.sin(angle),
                    amplitude_x=float(rng.uniform(2.0, 6.0)) if wobble else 0.0,
                    amplitude_y=float(rng.uniform(0.0, 3.0)) if wobble else 0.0,
                    period=float(rng.uniform(15.0, 40.0)),
                    texture_seed=int(rng.integers(0, 2**31)),
                )
            )

        if objects and rng.random() < cfg.event_prob:
            target = objects[int(rng.integers(0, len(objects)))]
            lo = cfg.num_frames // 4
            when = max(int(rng.integers(lo, max(lo + 1, 3 * cfg.num_frames // 4))), 2)
            event = "exit_frame" if rng.random() < 0.5 else "enter_frame"
            objects[objects.index(target)] = target.model_copy(update={event: when})

        if objects and rng.random() < cfg.fast_prob:
            target = objects[int(rng.integers(0, len(objects)))]
            angle = rng.uniform(0.0, 2.0 * math.pi)
            objects[objects.index(target)] = target.model_copy(
                update={
                    "vx": cfg.fast_speed * math.cos(angle),
                    "vy": cfg.fast_speed * math.sin(angle),
                }
            )

        specs.append(
            SceneSpec(
                name=f"seq_{k:03d}",
                num_frames=cfg.num_frames,
                height=cfg.frame_height,
                width=cfg.frame_width,
                background_seed=int(rng.integers(0, 2**31)),
                objects=objects,
            )
        )
    return specs


def split_suite(
    specs: Sequence[T], holdout_fraction: float
) -> tuple[list[T], list[T]]:
    """Split into training and held-out items, held-out taken from the end."""
    n_holdout = int(round(len(specs) * holdout_fraction))
    n_holdout = min(max(n_holdout, 0), len(specs) - 1) if len(specs) > 1 else 0
    cut = len(specs) - n_holdout
    return list(specs[:cut]), list(specs[cut:])


__all__ = [
    "ObjectSpec",
    "SceneSpec",
    "SyntheticSequence",
    "object_rect",
    "generate",
    "validate_spec",
    "standard_suite",
    "split_suite",
]
