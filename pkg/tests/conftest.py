"""Pytest configuration and fixtures for DorT tests."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project src directory to sys.path for tests without requiring installation
ROOT_DIR = Path(__file__).resolve().parents[1]
SRC_DIR = ROOT_DIR / "src"
for path in (str(SRC_DIR), str(ROOT_DIR)):
    if path not in sys.path:
        sys.path.insert(0, path)

from dort.config import QUICK_TEST, ExperimentConfig  # noqa: E402
from dort.core.featmap import FeatureExtractor  # noqa: E402
from dort.core.tracker import CorrelationTracker  # noqa: E402
from dort.synthdata.scene import ObjectSpec, SceneSpec  # noqa: E402


@pytest.fixture
def quick_config() -> ExperimentConfig:
    """A private copy of the quick_test preset (64x96 frames)."""
    return QUICK_TEST.copy()


@pytest.fixture
def extractor(quick_config: ExperimentConfig) -> FeatureExtractor:
    """Seeded extractor on 64x96 frames: stride 4, 14x22x16 feature maps."""
    return FeatureExtractor.from_config(quick_config.features)


@pytest.fixture
def tracker(
    extractor: FeatureExtractor, quick_config: ExperimentConfig
) -> CorrelationTracker:
    return CorrelationTracker(extractor, quick_config.tracker)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def static_scene() -> SceneSpec:
    """Two motionless objects for 6 frames."""
    return SceneSpec(
        name="static",
        num_frames=6,
        height=64,
        width=96,
        background_seed=3,
        objects=[
            ObjectSpec(object_id=1, width=20, height=20, x0=12, y0=10, texture_seed=1),
            ObjectSpec(object_id=2, width=24, height=20, x0=56, y0=30, texture_seed=2),
        ],
    )


@pytest.fixture
def exit_scene() -> SceneSpec:
    """One object leaves before frame 5."""
    return SceneSpec(
        name="exit",
        num_frames=8,
        height=64,
        width=96,
        background_seed=4,
        objects=[
            ObjectSpec(object_id=1, width=20, height=20, x0=10, y0=10, texture_seed=5),
            ObjectSpec(
                object_id=2,
                width=20,
                height=20,
                x0=60,
                y0=30,
                texture_seed=6,
                exit_frame=5,
            ),
        ],
    )
