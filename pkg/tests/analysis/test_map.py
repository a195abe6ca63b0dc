"""Tests for box-level and tracklet-level mAP."""

import numpy as np
import pytest

from dort.analysis.metrics import (
    Tracklet,
    average_precision,
    box_map,
    build_tracklets,
    pool_sequences,
    temporal_iou,
    tracklet_map,
    tracklet_map_from_boxes,
)
from dort.errors import MissingIds
from dort.geometry import BoundingBox, Rect, iou


def _box(fid, x, score=1.0, object_id=None, class_id=0, w=10.0):
    return BoundingBox(
        Rect(x, 0.0, w, 10.0), fid=fid, score=score, id=object_id, class_id=class_id
    )


def _reference_ap(preds, gts, thresh=0.5):
    """Single-class AP written out directly: greedy matching in score order,
    then precision interpolated as the best precision at any later rank."""
    order = sorted(range(len(preds)), key=lambda k: -preds[k].score)
    used = set()
    hits = []
    for k in order:
        p = preds[k]
        candidates = [
            (iou(p.rect, g.rect), j)
            for j, g in enumerate(gts)
            if g.fid == p.fid and j not in used
        ]
        best = max(candidates, default=(-1.0, None), key=lambda c: c[0])
        hit = best[1] is not None and best[0] >= thresh
        if hit:
            used.add(best[1])
        hits.append(hit)
    if not gts:
        return 0.0
    precisions = []
    tp = 0
    for rank, hit in enumerate(hits, start=1):
        tp += hit
        precisions.append(tp / rank)
    ap = 0.0
    for rank, hit in enumerate(hits):
        if hit:
            ap += max(precisions[rank:]) / len(gts)
    return ap


class TestAveragePrecision:
    def test_perfect(self):
        assert average_precision(np.array([0.5, 1.0]), np.array([1.0, 1.0])) == 1.0

    def test_envelope_is_monotone(self):
        # precision 0.5 at recall 0.5 is lifted to the later 2/3
        recall = np.array([0.5, 0.5, 1.0])
        precision = np.array([1.0, 0.5, 2.0 / 3.0])
        assert average_precision(recall, precision) == pytest.approx(0.5 + 0.5 * 2 / 3)


class TestBoxMap:
    """Test detection mAP."""

    def test_perfect_predictions(self):
        gt = [_box(1, 0), _box(1, 30), _box(2, 0)]
        assert box_map(gt, gt).mean_ap == 1.0

    def test_false_positive_ranked_first(self):
        gt = [_box(1, 0)]
        preds = [_box(1, 50, score=0.9), _box(1, 0, score=0.8)]
        assert box_map(preds, gt).mean_ap == pytest.approx(0.5)

    def test_threshold_is_inclusive(self):
        gt = [BoundingBox(Rect(0, 0, 10, 10), fid=1)]
        half = [BoundingBox(Rect(0, 0, 10, 5), fid=1)]
        assert box_map(half, gt).mean_ap == 1.0
        assert box_map(half, gt, iou_thresh=0.51).mean_ap == 0.0

    def test_duplicates_count_once(self):
        gt = [_box(1, 0)]
        preds = [_box(1, 0, score=0.9), _box(1, 1, score=0.8)]
        result = box_map(preds, gt)
        assert result.mean_ap == 1.0
        assert result.num_gt == {0: 1}

    def test_mean_over_classes_with_groundtruth(self):
        gt = [_box(1, 0, class_id=0), _box(1, 30, class_id=1)]
        preds = [_box(1, 0, class_id=0), _box(1, 60, class_id=2)]
        result = box_map(preds, gt)
        assert result.per_class == {0: 1.0, 1: 0.0}
        assert result.mean_ap == 0.5

    def test_matching_never_crosses_sequences(self):
        gts = {"a": [_box(1, 0)], "b": [_box(1, 40)]}
        preds = {"a": [_box(1, 40)], "b": [_box(1, 0)]}
        assert box_map(preds, gts).mean_ap == 0.0
        assert box_map(gts, gts).mean_ap == 1.0

    def test_no_predictions(self):
        assert box_map([], [_box(1, 0)]).mean_ap == 0.0

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_reference_implementation(self, seed):
        rng = np.random.default_rng(seed)
        gts = [
            _box(int(f), float(x))
            for f, x in zip(rng.integers(1, 4, 8), rng.uniform(0, 80, 8), strict=True)
        ]
        preds = [
            _box(int(f), float(x), score=float(s))
            for f, x, s in zip(
                rng.integers(1, 4, 12),
                rng.uniform(0, 80, 12),
                rng.uniform(0, 1, 12),
                strict=True,
            )
        ]
        assert box_map(preds, gts).mean_ap == pytest.approx(_reference_ap(preds, gts))

    @pytest.mark.parametrize("seed", range(50))
    def test_micro_instances(self, seed):
        rng = np.random.default_rng(1000 + seed)
        gts = [_box(1, float(x)) for x in rng.uniform(0, 30, int(rng.integers(1, 4)))]
        n_preds = int(rng.integers(0, 6))
        preds = [
            _box(1, float(x), score=float(s))
            for x, s in zip(
                rng.uniform(0, 30, n_preds), rng.uniform(0, 1, n_preds), strict=True
            )
        ]
        assert box_map(preds, gts).mean_ap == pytest.approx(_reference_ap(preds, gts))


class TestTracklets:
    """Test tracklet construction and temporal overlap."""

    def test_build_groups_and_sorts(self):
        boxes = [
            _box(3, 0, object_id=1),
            _box(1, 0, object_id=1),
            _box(2, 5, object_id=2),
        ]
        tracklets = build_tracklets(boxes)
        assert [t.object_id for t in tracklets] == [1, 2]
        assert [b.fid for b in tracklets[0].boxes] == [1, 3]

    def test_missing_ids(self):
        with pytest.raises(MissingIds):
            build_tracklets([_box(1, 0)])

    def test_frames_must_increase(self):
        with pytest.raises(ValueError):
            Tracklet(1, 0, (_box(2, 0, object_id=1), _box(2, 0, object_id=1)))

    def test_score_is_mean(self):
        t = Tracklet(1, 0, (_box(1, 0, 0.4, 1), _box(2, 0, 0.8, 1)))
        assert t.score == pytest.approx(0.6)

    def test_temporal_iou(self):
        a = build_tracklets([_box(f, 0, object_id=1) for f in (1, 2, 3)])[0]
        b = build_tracklets([_box(f, 0, object_id=7) for f in (2, 3, 4, 5)])[0]
        assert temporal_iou(a, b) == pytest.approx(2 / 5)

    def test_temporal_iou_needs_box_overlap(self):
        a = build_tracklets([_box(1, 0, object_id=1)])[0]
        b = build_tracklets([_box(1, 8, object_id=1)])[0]
        assert temporal_iou(a, b) == 0.0

    def test_pool_names_by_sequence(self):
        one = [_box(1, 0, object_id=1)]
        tracklets = pool_sequences({"b": one, "a": one})
        assert [t.sequence for t in tracklets] == ["a", "b"]
        assert temporal_iou(tracklets[0], tracklets[1]) == 0.0


class TestTrackletMap:
    def test_perfect_tracks(self):
        gt = [_box(f, 0, object_id=1) for f in range(1, 5)]
        assert tracklet_map_from_boxes(gt, gt).mean_ap == 1.0

    def test_id_switch_lowers_tracklet_map_only(self):
        gt = [_box(f, 0, object_id=1) for f in range(1, 5)]
        # same boxes, but the identity changes after frame 1
        preds = [_box(1, 0, score=0.9, object_id=1)] + [
            _box(f, 0, score=0.8, object_id=2) for f in range(2, 5)
        ]
        assert box_map(preds, gt).mean_ap == 1.0
        assert tracklet_map_from_boxes(preds, gt).mean_ap == pytest.approx(0.5)

    def test_tracklet_threshold_is_inclusive(self):
        gt = build_tracklets([_box(f, 0, object_id=1) for f in range(1, 5)])
        half = build_tracklets([_box(f, 0, object_id=3) for f in (1, 2)])
        assert tracklet_map(half, gt).mean_ap == 1.0
        assert tracklet_map(half, gt, tracklet_iou=0.6).mean_ap == 0.0

    def test_pooled_sequences(self):
        gts = {
            "a": [_box(f, 0, object_id=1) for f in (1, 2)],
            "b": [_box(f, 0, object_id=1) for f in (1, 2)],
        }
        preds = {"a": gts["a"], "b": []}
        result = tracklet_map_from_boxes(preds, gts)
        assert result.num_gt == {0: 2}
        assert result.mean_ap == pytest.approx(0.5)
