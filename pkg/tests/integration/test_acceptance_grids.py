"""Randomised grids checking the core primitives against direct references.

Run with ``pytest -m slow tests/integration``.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np
import pytest

from dort.analysis.sweep import oracle_violations, run_sweep
from dort.config import QUICK_TEST, FeatureConfig, TrackerConfig
from dort.core.association import hungarian
from dort.core.featmap import FeatureExtractor, extract_features
from dort.core.tracker import CorrelationTracker
from dort.scheduler.correlation import channel_index, correlation_layer
from dort.synthdata.scene import ObjectSpec, SceneSpec, generate, standard_suite

pytestmark = [pytest.mark.slow, pytest.mark.integration]


def _min_cost(costs: np.ndarray) -> float:
    n, m = costs.shape
    if n <= m:
        return min(
            sum(costs[r, c] for r, c in enumerate(cols))
            for cols in permutations(range(m), n)
        )
    return min(
        sum(costs[r, c] for c, r in enumerate(rows))
        for rows in permutations(range(n), m)
    )


def _quad_loop(a: np.ndarray, b: np.ndarray, d: int) -> np.ndarray:
    H, W, _ = a.shape
    out = np.zeros((H, W, (2 * d + 1) ** 2))
    for i in range(H):
        for j in range(W):
            for p in range(-d, d + 1):
                for q in range(-d, d + 1):
                    ii, jj = i + p, j + q
                    if 0 <= ii < H and 0 <= jj < W:
                        out[i, j, channel_index(p, q, d)] = a[i, j] @ b[ii, jj]
    return out


def test_hungarian_optimal_on_integer_costs() -> None:
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n, m = (int(v) for v in rng.integers(1, 7, size=2))
        costs = rng.integers(0, 20, size=(n, m)).astype(np.float64)
        result = hungarian(costs)
        assert len(result.pairs) == min(n, m)
        assert result.total_cost == _min_cost(costs)


def test_correlation_matches_quad_loop() -> None:
    rng = np.random.default_rng(77)
    for _ in range(100):
        H, W, C = (int(v) for v in rng.integers(1, [13, 13, 5]))
        d = int(rng.integers(0, 4))
        a = rng.standard_normal((H, W, C))
        b = rng.standard_normal((H, W, C))
        np.testing.assert_allclose(
            correlation_layer(a, b, d).data, _quad_loop(a, b, d), atol=1e-12
        )


def test_planted_shifts_are_recovered() -> None:
    rng = np.random.default_rng(5)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        p, q = (int(v) for v in rng.integers(-d, d + 1, size=2))
        a = rng.standard_normal((12, 12, 4))
        a /= np.linalg.norm(a, axis=2, keepdims=True)
        b = np.roll(a, shift=(p, q), axis=(0, 1))
        best = correlation_layer(a, b, d).best_displacements()
        # cells whose shifted copy stayed inside the map without wrapping
        rows = slice(max(0, -p), 12 - max(0, p))
        cols = slice(max(0, -q), 12 - max(0, q))
        assert np.all(best[rows, cols, 0] == p)
        assert np.all(best[rows, cols, 1] == q)


def _drifting_scene(index: int, rng: np.random.Generator) -> SceneSpec:
    objects = [
        ObjectSpec(
            object_id=k + 1,
            width=20,
            height=20,
            x0=x0,
            y0=38,
            vx=float(rng.uniform(-0.4, 0.4)),
            vy=float(rng.uniform(-0.3, 0.3)),
            texture_seed=10 * index + k,
        )
        for k, x0 in enumerate((36, 70, 104))
    ]
    return SceneSpec(
        name=f"drift_{index}",
        num_frames=18,
        height=96,
        width=160,
        background_seed=index,
        objects=objects,
    )


def test_crop_tracker_matches_roi_tracker() -> None:
    extractor = FeatureExtractor.from_config(
        FeatureConfig(frame_height=96, frame_width=160)
    )
    roi = CorrelationTracker(extractor, TrackerConfig(mode="roi"))
    crop = CorrelationTracker(extractor, TrackerConfig(mode="crop"))
    rng = np.random.default_rng(31)

    cases = 0
    for index in range(4):
        seq = generate(_drifting_scene(index, rng))
        feats = [extract_features(f, extractor) for f in seq.frames]
        gt1 = seq.boxes_by_frame()[1]

        roi_state = roi.start(feats[0], gt1, 1)
        crop_state = crop.start(feats[0], gt1, 1, keyframe_frame=seq.frames[0])
        for k in range(1, seq.num_frames):
            roi_state, roi_boxes = roi.step(roi_state, feats[k], None, k + 1)
            crop_state, crop_boxes = crop.step(
                crop_state, feats[k], seq.frames[k], k + 1
            )
            assert [(b.fid, b.id, b.rect) for b in roi_boxes] == [
                (b.fid, b.id, b.rect) for b in crop_boxes
            ]
            cases += len(roi_boxes)
    assert cases >= 200


def test_oracle_never_below_fixed() -> None:
    cfg = QUICK_TEST.copy()
    sequences = [generate(spec) for spec in standard_suite(cfg.suite)]
    result = run_sweep(sequences, [1, 2, 5, 10], ["fixed", "oracle"], cfg)
    assert len(result.table) == 8
    assert oracle_violations(result.table) == []
