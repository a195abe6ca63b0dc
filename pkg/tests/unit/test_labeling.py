"""Unit tests for ground-truth detect/track labelling."""

import numpy as np
import pytest

from dort.geometry import BoundingBox, Rect, iou
from dort.scheduler.labeling import LabeledState, label_from_tracked, label_pair
from dort.scheduler.network import SchedulerState
from dort.types import Action

FEATDIMS = (14, 22, 16)


def _gt_box(row, col, object_id=1, fid=1):
    return BoundingBox(
        Rect(col * 4.0, row * 4.0, 16.0, 16.0), fid=fid, score=1.0, id=object_id
    )


def _planted_features(rng, positions):
    """One feature map per ``(row, col)`` with the same spiky pattern moved."""
    pattern = rng.uniform(0.0, 1.0, (4, 4, FEATDIMS[2]))
    pattern[1, 2, 0] = 50.0
    maps = []
    for row, col in positions:
        fmap = rng.uniform(0.0, 0.1, FEATDIMS)
        fmap[row : row + 4, col : col + 4] = pattern
        maps.append(fmap)
    return maps


class TestLabelFromTracked:
    def test_exact_overlap_is_track(self):
        boxes = [_gt_box(2, 2), _gt_box(6, 10, object_id=2)]
        assert label_from_tracked(boxes, boxes) == Action.TRACK

    def test_low_overlap_is_detect(self):
        tracked = [_gt_box(2, 2)]
        # one cell off on a 4-cell box: IOU = 12/20 = 0.6
        assert label_from_tracked(tracked, [_gt_box(2, 3)]) == Action.DETECT
        assert label_from_tracked(tracked, [_gt_box(2, 3)], iou_thresh=0.5) == (
            Action.TRACK
        )

    def test_id_sets_must_match(self):
        assert label_from_tracked([_gt_box(2, 2)], []) == Action.DETECT
        assert label_from_tracked([], [_gt_box(2, 2)]) == Action.DETECT
        assert (
            label_from_tracked([_gt_box(2, 2)], [_gt_box(2, 2, object_id=5)])
            == Action.DETECT
        )

    def test_both_empty_is_track(self):
        assert label_from_tracked([], []) == Action.TRACK


class TestLabelPair:
    """Test labelling through the tracker."""

    def test_empty_on_both_sides_is_track(self, tracker, rng):
        features = _planted_features(rng, [(4, 6), (4, 6)])
        assert label_pair([], [], tracker, features) == Action.TRACK

    def test_identity_change_is_detect(self, tracker, rng):
        features = _planted_features(rng, [(4, 6), (4, 6)])
        gt_t = [_gt_box(4, 6)]
        gt_next = [_gt_box(4, 6, object_id=2, fid=2)]
        assert label_pair(gt_t, gt_next, tracker, features) == Action.DETECT

    def test_followed_motion_is_track(self, tracker, rng):
        features = _planted_features(rng, [(4, 6), (5, 4)])
        gt_t = [_gt_box(4, 6)]
        gt_next = [_gt_box(5, 4, fid=2)]
        assert label_pair(gt_t, gt_next, tracker, features) == Action.TRACK

    def test_truth_elsewhere_is_detect(self, tracker, rng):
        # the features move one way while the labelled box jumps far away
        features = _planted_features(rng, [(4, 6), (5, 4)])
        gt_t = [_gt_box(4, 6)]
        gt_next = [_gt_box(8, 16, fid=2)]
        assert label_pair(gt_t, gt_next, tracker, features) == Action.DETECT

    def test_folds_over_intermediate_frames(self, tracker, rng):
        features = _planted_features(rng, [(4, 6), (4, 7), (4, 8), (4, 9)])
        gt_t = [_gt_box(4, 6)]
        gt_next = [_gt_box(4, 9, fid=4)]
        assert label_pair(gt_t, gt_next, tracker, features) == Action.TRACK

    def test_consistent_id_permutation_keeps_labels(self, tracker, rng):
        features = _planted_features(rng, [(4, 6), (5, 4)])
        relabel = {1: 7, 2: 3}
        cases = [
            ([_gt_box(4, 6)], [_gt_box(5, 4, fid=2)]),
            ([_gt_box(4, 6)], [_gt_box(8, 16, fid=2)]),
            ([_gt_box(4, 6)], [_gt_box(4, 6, object_id=2, fid=2)]),
        ]
        for gt_t, gt_next in cases:
            permuted_t = [b.with_id(relabel[b.id]) for b in gt_t]
            permuted_next = [b.with_id(relabel[b.id]) for b in gt_next]
            assert label_pair(permuted_t, permuted_next, tracker, features) == (
                label_pair(gt_t, gt_next, tracker, features)
            )

    def test_scripted_overlap_below_threshold_is_detect(self, tracker, rng):
        # the features stand still; the truth slides 3 px on a 17 px wide box
        features = _planted_features(rng, [(4, 6), (4, 6)])
        start = BoundingBox(Rect(24.0, 16.0, 17.0, 16.0), fid=1, score=1.0, id=1)
        slid = BoundingBox(Rect(27.0, 16.0, 17.0, 16.0), fid=2, score=1.0, id=1)
        assert iou(start.rect, slid.rect) == pytest.approx(0.7)
        stayed = start.moved_to(start.rect.center, 2)
        assert label_pair([start], [stayed], tracker, features) == Action.TRACK
        assert label_pair([start], [slid], tracker, features) == Action.DETECT


class TestLabeledState:
    def test_reward_matches_label(self, rng):
        a = rng.random((3, 3, 2))
        sample = LabeledState(SchedulerState(a, a.copy()), Action.DETECT, "s")
        assert sample.reward(Action.DETECT) == 1
        assert sample.reward(Action.TRACK) == 0

    def test_holds_state_by_reference(self, rng):
        a = rng.random((3, 3, 2))
        state = SchedulerState(a, np.zeros_like(a))
        assert LabeledState(state, Action.TRACK).state is state
