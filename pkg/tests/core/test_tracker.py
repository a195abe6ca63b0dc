"""Tests for the multi-box correlation tracker."""

import logging
from dataclasses import replace

import numpy as np
import pytest

from dort.config import TrackerConfig
from dort.core.featmap import extract_features
from dort.core.tracker import CorrelationTracker, GridRect, to_grid, track_single
from dort.errors import EmptySearchRegion, ShapeMismatch
from dort.geometry import BoundingBox, Rect
from dort.synthdata.scene import ObjectSpec, SceneSpec, generate

FEATDIMS = (14, 22, 16)


def _pattern(rng):
    """4x4 cell pattern with one dominant cell so the response peak is unique."""
    pattern = rng.uniform(0.0, 1.0, (4, 4, FEATDIMS[2]))
    pattern[1, 2, 0] = 50.0
    return pattern


def _feature_map(rng, placements):
    """Low background plus ``pattern`` pasted at each ``(row, col, pattern)``."""
    fmap = rng.uniform(0.0, 0.1, FEATDIMS)
    for row, col, pattern in placements:
        fmap[row : row + 4, col : col + 4] = pattern
    return fmap


def _box(row, col, object_id=1, fid=1):
    """16x16 pixel box over the 4x4 cells starting at ``(row, col)``."""
    return BoundingBox(
        Rect(col * 4.0, row * 4.0, 16.0, 16.0),
        fid=fid,
        score=0.9,
        id=object_id,
        class_id=2,
    )


class TestToGrid:
    """Test pixel-to-cell mapping."""

    def test_aligned_box(self):
        assert to_grid(Rect(24, 16, 16, 16), 4, FEATDIMS) == GridRect(6, 4, 4, 4)

    def test_rounds_half_up(self):
        # 2/4 = 0.5 rounds to 1, 18/4 = 4.5 rounds to 5
        assert to_grid(Rect(2, 2, 16, 16), 4, FEATDIMS) == GridRect(1, 1, 4, 4)

    def test_tiny_box_gets_one_cell(self):
        cells = to_grid(Rect(40, 20, 1, 1), 4, FEATDIMS)
        assert (cells.w, cells.h) == (1, 1)

    def test_shifted_inside_feature_map(self):
        cells = to_grid(Rect(90, 60, 16, 16), 4, FEATDIMS)
        assert cells.x + cells.w <= FEATDIMS[1]
        assert cells.y + cells.h <= FEATDIMS[0]
        assert (cells.w, cells.h) == (4, 4)

    def test_contains(self):
        outer = GridRect(0, 0, 5, 5)
        assert outer.contains(GridRect(1, 1, 3, 3))
        assert not outer.contains(GridRect(3, 3, 3, 3))


class TestTrackSingle:
    def test_default_anchor_is_search_middle(self, rng):
        target = rng.random((2, 2, 3))
        search = np.zeros((6, 6, 3))
        search[2:4, 2:4] = target * 10.0
        result = track_single(target, search, (50.0, 50.0), total_stride=4)
        assert result.offset == (2, 2)
        assert result.center == (50.0, 50.0)
        assert result.displacement == (0.0, 0.0)


class TestRoiTracking:
    """Test the RoI path on planted feature maps."""

    def test_static_features_keep_boxes(self, tracker, rng):
        pattern = _pattern(rng)
        fmap = _feature_map(rng, [(4, 6, pattern)])
        box = _box(4, 6)
        state = tracker.start(fmap, [box], fid=1)
        _, tracked = tracker.roi_track_all(state, fmap.copy(), fid=2)
        assert tracked[0].rect == box.rect
        assert tracked[0].fid == 2

    def test_planted_shift_is_recovered(self, tracker, rng):
        pattern = _pattern(rng)
        key = _feature_map(rng, [(4, 6, pattern)])
        current = _feature_map(rng, [(5, 4, pattern)])
        state = tracker.start(key, [_box(4, 6)], fid=1)
        new_state, tracked = tracker.roi_track_all(state, current, fid=2)
        # one row down, two columns left at stride 4
        assert tracked[0].rect.center == (24.0, 28.0)
        assert new_state.current_centers[0] == (24.0, 28.0)
        assert new_state.frame_of_centers == 2

    def test_boxes_keep_size_score_id_and_class(self, tracker, rng):
        pattern = _pattern(rng)
        key = _feature_map(rng, [(4, 6, pattern)])
        current = _feature_map(rng, [(4, 7, pattern)])
        box = _box(4, 6, object_id=7)
        _, tracked = tracker.roi_track_all(tracker.start(key, [box], 1), current, 2)
        out = tracked[0]
        assert (out.rect.w, out.rect.h, out.score, out.id, out.class_id) == (
            16.0,
            16.0,
            0.9,
            7,
            2,
        )

    def test_boxes_move_independently(self, tracker, rng):
        a, b = _pattern(rng), _pattern(rng)
        b[1, 2, 0] = 0.5
        b[2, 1, 1] = 50.0
        key = _feature_map(rng, [(2, 2, a), (8, 14, b)])
        current = _feature_map(rng, [(3, 2, a), (8, 16, b)])
        state = tracker.start(key, [_box(2, 2, 1), _box(8, 14, 2)], 1)
        _, tracked = tracker.roi_track_all(state, current, 2)
        assert tracked[0].rect.center == (16.0, 20.0)
        assert tracked[1].rect.center == (72.0, 40.0)

    def test_track_through_folds_frames(self, tracker, rng):
        pattern = _pattern(rng)
        frames = [_feature_map(rng, [(4, 6 + k, pattern)]) for k in range(4)]
        state = tracker.start(frames[0], [_box(4, 6)], 1)
        final, tracked = tracker.track_through(state, frames[1:])
        # three single-cell steps add up beyond one search window's reach
        assert tracked[0].rect.center == (32.0 + 12.0, 24.0)
        assert tracked[0].fid == 4
        assert final.frame_of_centers == 4

    def test_no_boxes(self, tracker, rng):
        fmap = _feature_map(rng, [])
        state = tracker.start(fmap, [], 1)
        _, tracked = tracker.roi_track_all(state, fmap, 2)
        assert tracked == []

    def test_templates_are_mean_centered(self, extractor, rng):
        fmap = _feature_map(rng, [(4, 6, _pattern(rng))])
        centered = CorrelationTracker(extractor, TrackerConfig())
        raw = CorrelationTracker(extractor, TrackerConfig(center_template=False))
        template = centered.start(fmap, [_box(4, 6)], 1).templates[0]
        np.testing.assert_allclose(template.mean(axis=(0, 1)), 0.0, atol=1e-12)
        plain = raw.start(fmap, [_box(4, 6)], 1).templates[0]
        np.testing.assert_array_equal(plain, fmap[4:8, 6:10])

    def test_feature_shape_checked(self, tracker, rng):
        with pytest.raises(ShapeMismatch):
            tracker.start(rng.random((10, 10, 16)), [], 1)


class TestFrozenBoxes:
    """Test boxes whose search window leaves the feature map."""

    def test_empty_search_region(self, extractor, rng):
        tracker = CorrelationTracker(extractor, TrackerConfig(search_scale=1.0))
        fmap = _feature_map(rng, [(4, 6, _pattern(rng))])
        state = tracker.start(fmap, [_box(4, 6)], 1)
        stranded = replace(state, current_centers=((0.0, 24.0),))
        with pytest.raises(EmptySearchRegion) as excinfo:
            tracker.search_region(stranded, 0)
        assert excinfo.value.box_index == 0

    def test_frozen_box_stays_and_warns(self, extractor, rng, caplog):
        tracker = CorrelationTracker(extractor, TrackerConfig(search_scale=1.0))
        fmap = _feature_map(rng, [(4, 6, _pattern(rng))])
        state = tracker.start(fmap, [_box(4, 6)], 1)
        state = replace(state, current_centers=((0.0, 24.0),))
        with caplog.at_level(logging.WARNING, logger="dort.core.tracker"):
            new_state, tracked = tracker.roi_track_all(state, fmap, 2)
        assert new_state.frozen == (True,)
        assert tracked[0].rect.center == (0.0, 24.0)
        assert "freezing" in caplog.text

        _, again = tracker.roi_track_all(new_state, fmap, 3)
        assert again[0].rect.center == (0.0, 24.0)


class TestCropTracking:
    """Test that the crop path reproduces the RoI path."""

    @pytest.fixture
    def moving(self):
        spec = SceneSpec(
            name="moving",
            num_frames=5,
            height=64,
            width=96,
            background_seed=11,
            objects=[
                ObjectSpec(
                    object_id=1, width=20, height=20, x0=20, y0=12, vx=2.0, vy=1.0
                ),
                ObjectSpec(
                    object_id=2, width=24, height=16, x0=60, y0=36, vx=-1.5
                ),
            ],
        )
        return generate(spec)

    def test_crop_matches_roi(self, extractor, moving):
        roi = CorrelationTracker(extractor, TrackerConfig(mode="roi"))
        crop = CorrelationTracker(extractor, TrackerConfig(mode="crop"))
        feats = [extract_features(f, extractor) for f in moving.frames]
        gt1 = moving.boxes_by_frame()[1]

        roi_state = roi.start(feats[0], gt1, 1)
        crop_state = crop.start(feats[0], gt1, 1, keyframe_frame=moving.frames[0])
        for a, b in zip(roi_state.templates, crop_state.templates, strict=True):
            np.testing.assert_allclose(a, b, atol=1e-10)

        _, roi_boxes = roi.track_through(roi_state, feats[1:])
        _, crop_boxes = crop.track_through(crop_state, feats[1:], moving.frames[1:])
        assert [b.rect for b in roi_boxes] == [b.rect for b in crop_boxes]

    def test_crop_mode_needs_pixels(self, extractor, moving):
        crop = CorrelationTracker(extractor, TrackerConfig(mode="crop"))
        feat = extract_features(moving.frames[0], extractor)
        with pytest.raises(ValueError):
            crop.start(feat, moving.boxes_by_frame()[1], 1)
