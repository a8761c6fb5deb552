"""Segment-level precision/recall against the ground-truth oracle.

A class counts as present in a one-second segment iff it is reported in
at least 50% (inclusive) of that segment's object-bearing frames.
Segments with no object-bearing frames are excluded from all
denominators.  The same criterion is applied to the ground truth and to
the frames a query returns.
"""

from __future__ import annotations

from dataclasses import dataclass

from .classifiers import ClassifierProfile, ground_truth_label
from .core import DetectedObject
from .query import QuerySession
from .index import TopKIndex


class SegmentIndex:
    """Per-second segment structure of one labeled stream."""

    def __init__(self, objects: list[DetectedObject], fps: float):
        self.seg_len = max(1, int(round(fps)))
        self.seg_frames: dict[int, set[int]] = {}   # segment -> object-bearing frames
        self._gt_class_frames: dict[int, dict[int, set[int]]] = {}  # seg -> class -> frames
        for obj in objects:
            seg = obj.frame_id // self.seg_len
            self.seg_frames.setdefault(seg, set()).add(obj.frame_id)
            label = ground_truth_label(obj)
            self._gt_class_frames.setdefault(seg, {}).setdefault(label, set()).add(obj.frame_id)

    def gt_segments(self, class_id: int) -> set[int]:
        """Segments where the GT classifier reports the class in >= 50% of
        the object-bearing frames."""
        out = set()
        for seg, frames in self.seg_frames.items():
            hit = self._gt_class_frames.get(seg, {}).get(class_id)
            if hit is not None and 2 * len(hit) >= len(frames):
                out.add(seg)
        return out

    def claimed_segments(self, frame_ids) -> set[int]:
        """Apply the same presence criterion to a returned frame set."""
        per_seg: dict[int, int] = {}
        for fid in set(frame_ids):
            seg = fid // self.seg_len
            if seg in self.seg_frames and fid in self.seg_frames[seg]:
                per_seg[seg] = per_seg.get(seg, 0) + 1
        return {seg for seg, n in per_seg.items()
                if 2 * n >= len(self.seg_frames[seg])}


def segment_ground_truth(objects: list[DetectedObject], fps: float) -> dict[int, set[int]]:
    """Map segment index -> set of classes present per the 50% criterion."""
    segidx = SegmentIndex(objects, fps)
    out: dict[int, set[int]] = {seg: set() for seg in segidx.seg_frames}
    classes = {ground_truth_label(o) for o in objects}
    for cls in classes:
        for seg in segidx.gt_segments(cls):
            out[seg].add(cls)
    return out


def class_precision_recall(claimed: set[int], truth: set[int]) -> tuple[float, float]:
    hit = len(claimed & truth)
    precision = hit / len(claimed) if claimed else 1.0
    recall = hit / len(truth) if truth else 1.0
    return precision, recall


def dominant_classes(objects: list[DetectedObject], coverage: float = 0.95) -> list[int]:
    """Smallest set of GT classes covering `coverage` of the objects
    (descending count, ties to the smaller class id)."""
    hist: dict[int, int] = {}
    for obj in objects:
        label = ground_truth_label(obj)
        hist[label] = hist.get(label, 0) + 1
    ordered = sorted(hist.items(), key=lambda kv: (-kv[1], kv[0]))
    need = coverage * len(objects)
    out, cum = [], 0
    for cls, count in ordered:
        out.append(cls)
        cum += count
        if cum >= need:
            break
    return out


@dataclass(frozen=True)
class ClassQueryStats:
    class_id: int
    routed_via_other: bool
    clusters_examined: int
    gt_inferences: int
    query_cost_units: float
    precision: float
    recall: float
    frames_returned: int


@dataclass(frozen=True)
class StreamEvaluation:
    per_class: tuple[ClassQueryStats, ...]
    macro_precision: float
    macro_recall: float
    mean_query_cost: float


def evaluate_index(idx: TopKIndex, objects: list[DetectedObject],
                   gt_profile: ClassifierProfile,
                   ingest_profile: ClassifierProfile,
                   fps: float,
                   classes: list[int] | None = None) -> StreamEvaluation:
    """Query every (dominant) class with a fresh session and score the
    returned frames against the GT oracle at segment granularity."""
    if classes is None:
        classes = dominant_classes(objects)
    segidx = SegmentIndex(objects, fps)
    obj_by_id = {o.object_id: o for o in objects}
    stats = []
    for cls in classes:
        session = QuerySession(idx, gt_profile, obj_by_id, ingest_profile=ingest_profile)
        result = session.route_query(cls)
        routed = (ingest_profile.class_set is not None
                  and cls not in ingest_profile.class_set)
        precision, recall = class_precision_recall(
            segidx.claimed_segments(result.frame_ids), segidx.gt_segments(cls))
        stats.append(ClassQueryStats(
            class_id=cls,
            routed_via_other=routed,
            clusters_examined=result.clusters_examined,
            gt_inferences=result.gt_inferences,
            query_cost_units=result.query_cost_units,
            precision=precision,
            recall=recall,
            frames_returned=len(result.frame_ids),
        ))
    n = len(stats)
    return StreamEvaluation(
        per_class=tuple(stats),
        macro_precision=sum(s.precision for s in stats) / n if n else 1.0,
        macro_recall=sum(s.recall for s in stats) / n if n else 1.0,
        mean_query_cost=sum(s.query_cost_units for s in stats) / n if n else 0.0,
    )
