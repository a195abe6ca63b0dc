"""Configuration management for DorT experiments.

Each concern gets a small dataclass with ``to_dict``/``from_dict``;
:class:`ExperimentConfig` bundles them and is what presets, manifests and the
CLI pass around.
"""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field, fields
from typing import Any

PIPELINE_MODES = ("dort", "fixed", "oracle")
TRACKER_MODES = ("roi", "crop")


class _DictMixin:
    """``to_dict``/``from_dict`` for flat dataclasses (unknown keys ignored)."""

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)  # type: ignore[call-overload]

    @classmethod
    def from_dict(cls, data: dict[str, Any]):
        names = {f.name for f in fields(cls)}  # type: ignore[arg-type]
        return cls(**{k: v for k, v in data.items() if k in names})


@dataclass(frozen=True)
class LayerSpec(_DictMixin):
    """One convolution layer of the shared feature extractor."""

    kernel_size: int
    out_channels: int
    stride: int = 1
    activation: str = "relu"


DEFAULT_LAYERS: tuple[LayerSpec, ...] = (
    LayerSpec(kernel_size=5, out_channels=8, stride=2, activation="relu"),
    LayerSpec(kernel_size=3, out_channels=16, stride=2, activation="relu"),
)


@dataclass
class FeatureConfig(_DictMixin):
    """Working frame size and the fixed, seeded feature extractor.

    300x500 frames give 73x123 feature maps (a 75x125 grid at stride 4,
    less the border lost to valid convolutions).
    """

    frame_height: int = 300
    frame_width: int = 500
    in_channels: int = 1
    layers: tuple[LayerSpec, ...] = DEFAULT_LAYERS
    seed: int = 7

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> FeatureConfig:
        data = dict(data)
        if "layers" in data:
            data["layers"] = tuple(
                spec if isinstance(spec, LayerSpec) else LayerSpec.from_dict(spec)
                for spec in data["layers"]
            )
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["layers"] = [spec.to_dict() for spec in self.layers]
        return data


@dataclass
class TrackerConfig(_DictMixin):
    """Multi-box correlation tracker settings."""

    mode: str = "roi"
    search_scale: float = 2.0
    center_template: bool = True

    def __post_init__(self) -> None:
        if self.mode not in TRACKER_MODES:
            raise ValueError(f"tracker mode must be one of {TRACKER_MODES}")
        if self.search_scale < 1.0:
            raise ValueError("search_scale must be >= 1.0")


@dataclass
class SchedulerConfig(_DictMixin):
    """Scheduler network architecture."""

    displacement: int = 3
    conv_channels: tuple[int, int] = (32, 32)
    kernel_size: int = 3
    stride: int = 2
    delta: float = 0.97
    seed: int = 0

    def __post_init__(self) -> None:
        self.conv_channels = tuple(self.conv_channels)  # JSON gives lists
        if self.displacement < 0:
            raise ValueError("displacement must be >= 0")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")


@dataclass
class TrainConfig(_DictMixin):
    """Scheduler training hyperparameters.

    ``gamma`` is the discount factor of the reinforcement-learning reading of
    the scheduler. Only 0 is supported, which turns the value regression into
    a two-class cross-entropy on the next action.
    """

    learning_rate: float = 1e-2
    momentum: float = 0.9
    weight_decay: float = 5e-4
    batch_size: int = 32
    epochs: int = 30
    seed: int = 0
    gamma: float = 0.0
    tau_max: int = 10
    pairs_per_frame: int = 1
    balance_classes: bool = True
    label_iou: float = 0.8

    def __post_init__(self) -> None:
        if self.gamma != 0.0:
            raise ValueError("only gamma = 0 is supported")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.tau_max < 1:
            raise ValueError("tau_max must be >= 1")


@dataclass
class NoiseConfig(_DictMixin):
    """Noise model of the simulated detector.

    Jitters are Gaussian standard deviations in pixels. Scores of true boxes
    come from ``Beta(*true_score_beta)``, spurious ones from
    ``Beta(*false_score_beta)``; a None ``true_score_beta`` pins true scores
    at 1.0.
    """

    center_jitter: float = 2.0
    size_jitter: float = 1.0
    drop_prob: float = 0.05
    spurious_rate: float = 0.2
    true_score_beta: tuple[float, float] | None = (8.0, 2.0)
    false_score_beta: tuple[float, float] = (2.0, 8.0)
    spurious_size: tuple[int, int] = (16, 40)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.true_score_beta is not None:
            self.true_score_beta = tuple(self.true_score_beta)
        self.false_score_beta = tuple(self.false_score_beta)
        self.spurious_size = tuple(self.spurious_size)
        if not 0.0 <= self.drop_prob <= 1.0:
            raise ValueError("drop_prob must lie in [0, 1]")
        if self.center_jitter < 0 or self.size_jitter < 0 or self.spurious_rate < 0:
            raise ValueError("noise magnitudes must be >= 0")

    @classmethod
    def zero(cls, seed: int = 0) -> NoiseConfig:
        """A perfect detector: ground truth with score 1.0."""
        return cls(
            center_jitter=0.0,
            size_jitter=0.0,
            drop_prob=0.0,
            spurious_rate=0.0,
            true_score_beta=None,
            seed=seed,
        )


@dataclass
class PipelineConfig(_DictMixin):
    """Decision loop settings."""

    mode: str = "dort"
    sigma: int = 1
    delta: float = 0.97
    gate_iou: float = 0.3
    label_iou: float = 0.8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in PIPELINE_MODES:
            raise ValueError(f"mode must be one of {PIPELINE_MODES}, got {self.mode!r}")
        if self.sigma < 1:
            raise ValueError("sigma must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")


@dataclass
class SuiteConfig(_DictMixin):
    """Parameters of the generated synthetic benchmark suite."""

    num_sequences: int = 20
    num_frames: int = 100
    frame_height: int = 300
    frame_width: int = 500
    min_objects: int = 1
    max_objects: int = 4
    min_size: int = 48
    max_size: int = 96
    max_speed: float = 4.0
    event_prob: float = 0.5
    fast_prob: float = 0.15
    fast_speed: float = 48.0
    num_classes: int = 3
    holdout_fraction: float = 0.3
    seed: int = 2019

    def __post_init__(self) -> None:
        if self.num_sequences < 1 or self.num_frames < 1:
            raise ValueError("num_sequences and num_frames must be >= 1")
        if not 1 <= self.min_objects <= self.max_objects:
            raise ValueError("need 1 <= min_objects <= max_objects")
        if not 4 <= self.min_size <= self.max_size:
            raise ValueError("need 4 <= min_size <= max_size")
        if self.max_size > min(self.frame_height, self.frame_width):
            raise ValueError("max_size exceeds the frame")


@dataclass
class ExperimentConfig:
    """Everything needed to generate, train, run and evaluate."""

    features: FeatureConfig = field(default_factory=FeatureConfig)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    scheduler: SchedulerConfig = field(default_factory=SchedulerConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    suite: SuiteConfig = field(default_factory=SuiteConfig)

    def to_dict(self) -> dict[str, Any]:
        return {
            "features": self.features.to_dict(),
            "tracker": self.tracker.to_dict(),
            "scheduler": self.scheduler.to_dict(),
            "train": self.train.to_dict(),
            "noise": self.noise.to_dict(),
            "pipeline": self.pipeline.to_dict(),
            "suite": self.suite.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        """Build from a dict; missing sections take their defaults."""
        return cls(
            features=FeatureConfig.from_dict(data.get("features", {})),
            tracker=TrackerConfig.from_dict(data.get("tracker", {})),
            scheduler=SchedulerConfig.from_dict(data.get("scheduler", {})),
            train=TrainConfig.from_dict(data.get("train", {})),
            noise=NoiseConfig.from_dict(data.get("noise", {})),
            pipeline=PipelineConfig.from_dict(data.get("pipeline", {})),
            suite=SuiteConfig.from_dict(data.get("suite", {})),
        )

    def copy(self) -> ExperimentConfig:
        return copy.deepcopy(self)


# Configuration Presets
QUICK_TEST = ExperimentConfig(
    features=FeatureConfig(frame_height=64, frame_width=96),
    train=TrainConfig(epochs=3, tau_max=5),
    suite=SuiteConfig(
        num_sequences=4,
        num_frames=30,
        frame_height=64,
        frame_width=96,
        max_objects=2,
        min_size=20,
        max_size=28,
        max_speed=2.0,
        fast_speed=9.0,
        seed=1,
    ),
)

DEFAULT = ExperimentConfig()

# crowded scenes, scheduler consulted every 10 frames
FULL = ExperimentConfig(
    pipeline=PipelineConfig(sigma=10),
    suite=SuiteConfig(min_objects=2, max_objects=6, max_speed=5.0),
)

PRESETS = {
    "quick_test": QUICK_TEST,
    "default": DEFAULT,
    "full": FULL,
}


def get_preset(name: str) -> ExperimentConfig:
    """Get a deep copy of a configuration preset by name.

    Args:
        name: Preset name (quick_test, default, full)

    Returns:
        ExperimentConfig instance the caller may modify

    Raises:
        KeyError: If preset name not found
    """
    if name not in PRESETS:
        available = ", ".join(PRESETS.keys())
        raise KeyError(f"Unknown preset '{name}'. Available: {available}")
    return PRESETS[name].copy()


__all__ = [
    "LayerSpec",
    "FeatureConfig",
    "TrackerConfig",
    "SchedulerConfig",
    "TrainConfig",
    "NoiseConfig",
    "PipelineConfig",
    "SuiteConfig",
    "ExperimentConfig",
    "QUICK_TEST",
    "DEFAULT",
    "FULL",
    "PRESETS",
    "PIPELINE_MODES",
    "TRACKER_MODES",
    "get_preset",
]
