import numpy as np
import pytest

from focusidx.classifiers import specialize_profile
from focusidx.clustering import Cluster
from focusidx.core import OTHER_CLASS, AccuracyTarget, Config
from focusidx.evaluation import (SegmentIndex, class_precision_recall,
                                 dominant_classes, evaluate_index,
                                 segment_ground_truth)
from focusidx.index import IndexHeader, build
from conftest import make_object


def _obj(oid, frame, cls):
    return make_object(oid, [0.0], frame_id=frame, true_class=cls)


def _segment_stream():
    # fps=2 -> two frames per segment; seg0 = frames {0,1}, seg1 = {2,3}
    rows = [(0, 5), (1, 5), (0, 6), (2, 5), (3, 8), (3, 8)]
    return [_obj(i, f, c) for i, (f, c) in enumerate(rows)]


def test_gt_segments_fifty_percent_inclusive():
    segidx = SegmentIndex(_segment_stream(), fps=2.0)
    assert segidx.gt_segments(5) == {0, 1}
    assert segidx.gt_segments(6) == {0}   # 1 of 2 frames: boundary counts
    assert segidx.gt_segments(8) == {1}
    assert segidx.gt_segments(99) == set()


def test_claimed_segments_same_criterion():
    segidx = SegmentIndex(_segment_stream(), fps=2.0)
    assert segidx.claimed_segments([0]) == {0}
    assert segidx.claimed_segments([0, 1]) == {0}
    assert segidx.claimed_segments([2, 3]) == {1}
    # frames with no detected objects never count toward a segment
    assert segidx.claimed_segments([5, 7]) == set()


def test_segment_ground_truth_map():
    assert segment_ground_truth(_segment_stream(), fps=2.0) == {
        0: {5, 6},
        1: {5, 8},
    }


def test_class_precision_recall_edges():
    assert class_precision_recall(set(), set()) == (1.0, 1.0)
    assert class_precision_recall(set(), {1}) == (1.0, 0.0)
    assert class_precision_recall({1}, set()) == (0.0, 1.0)
    p, r = class_precision_recall({1, 2, 3, 4}, {1, 2, 5})
    assert p == pytest.approx(0.5)
    assert r == pytest.approx(2 / 3)


def test_dominant_classes_coverage_and_ties():
    objs = [_obj(i, i, c) for i, c in
            enumerate([1] * 6 + [4] * 3 + [2] * 3)]
    assert dominant_classes(objs, coverage=0.5) == [1]
    # 2 and 4 tie on count; the smaller id enters first
    assert dominant_classes(objs, coverage=0.75) == [1, 2]
    assert dominant_classes(objs, coverage=1.0) == [1, 2, 4]


def _cluster(cid, ranks, members):
    return Cluster(
        cluster_id=cid,
        centroid=np.zeros(2),
        member_object_ids=list(members),
        frame_ids=[m * 2 for m in members],
        class_best_rank=dict(ranks),
        centroid_member_id=members[0],
        sealed=True,
    )


def test_evaluate_index_end_to_end(profiles):
    cfg = Config("cheap", k=4, l_s=50, t=0.25, m=100, targets=AccuracyTarget())
    header = IndexHeader(stream_id="s", dim=2, vocab=50, n_objects=6, config=cfg)
    idx = build([
        _cluster(0, {7: 1, 9: 3}, (0, 1)),
        _cluster(1, {9: 1, OTHER_CLASS: 2}, (2,)),
        _cluster(2, {7: 4, OTHER_CLASS: 1}, (3, 4, 5)),
    ], header)
    true = {0: 7, 1: 7, 2: 9, 3: 12, 4: 12, 5: 12}
    objects = [make_object(oid, [0.0, 0.0], frame_id=oid * 2, true_class=cls)
               for oid, cls in true.items()]
    spec = specialize_profile(profiles["cheap"], {7: 5, 9: 4}, l_s=2)

    ev = evaluate_index(idx, objects, profiles["gt"], spec, fps=1.0)

    # dominant order: class 12 (3 objects), then 7, then 9
    assert [s.class_id for s in ev.per_class] == [12, 7, 9]
    assert [s.routed_via_other for s in ev.per_class] == [True, False, False]
    assert ev.macro_precision == 1.0
    assert ev.macro_recall == 1.0
    # every class triggers exactly two fresh representative verifications
    assert all(s.gt_inferences == 2 for s in ev.per_class)
    assert ev.mean_query_cost == pytest.approx(2 * 58.0)
    assert ev.per_class[0].frames_returned == 3


def test_evaluate_index_restricted_class_list(profiles):
    cfg = Config("cheap", k=4, l_s=50, t=0.25, m=100, targets=AccuracyTarget())
    header = IndexHeader(stream_id="s", dim=2, vocab=50, n_objects=2, config=cfg)
    idx = build([_cluster(0, {7: 1}, (0, 1))], header)
    objects = [make_object(0, [0.0, 0.0], frame_id=0, true_class=7),
               make_object(1, [0.0, 0.0], frame_id=2, true_class=7)]
    spec = specialize_profile(profiles["cheap"], {7: 2}, l_s=1)
    ev = evaluate_index(idx, objects, profiles["gt"], spec, fps=1.0,
                        classes=[7, 3])
    assert [s.class_id for s in ev.per_class] == [7, 3]
    # class 3 has no postings and no ground truth: vacuous perfection
    assert ev.per_class[1].precision == 1.0
    assert ev.per_class[1].recall == 1.0
    assert ev.per_class[1].clusters_examined == 0
