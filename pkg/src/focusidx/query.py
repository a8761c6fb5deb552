"""Query-time executor: index lookup, ground-truth verification of cluster
representatives only, OTHER-class routing, dynamic K_x, and cost accounting.

A session memoizes ground-truth labels per representative object, so a
cluster is never verified twice, within or across queries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import index as index_mod
from .classifiers import GROUND_TRUTH, SPECIALIZED, ClassifierProfile, ground_truth_label
from .core import OTHER_CLASS, DetectedObject
from .errors import NonMonotoneSchedule, UnknownClass
from .index import TopKIndex


@dataclass(frozen=True)
class QueryRequest:
    class_id: int
    k_x: int | None = None  # default: the index's K
    time_range: tuple[int, int] | None = None  # [start_frame, end_frame] inclusive


@dataclass(frozen=True)
class QueryResult:
    frame_ids: tuple[int, ...]
    object_ids: tuple[int, ...]
    gt_inferences: int
    query_cost_units: float
    clusters_examined: int
    clusters_matched: int


@dataclass
class QuerySession:
    """Read-only index plus the verification oracle for one query session."""

    idx: TopKIndex
    gt_profile: ClassifierProfile
    objects: dict[int, DetectedObject]
    ingest_profile: ClassifierProfile | None = None  # needed for OTHER routing
    _gt_cache: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.gt_profile.kind != GROUND_TRUTH:
            raise UnknownClass(f"{self.gt_profile.profile_id!r} is not a GT profile")

    def gt_inferences_total(self) -> int:
        return len(self._gt_cache)

    def _verify(self, cluster_id: int) -> tuple[int, bool]:
        """GT label of the cluster's representative; True on a cache miss."""
        member_id = self.idx.clusters[cluster_id].centroid_member_id
        if member_id in self._gt_cache:
            return self._gt_cache[member_id], False
        label = ground_truth_label(self.objects[member_id])
        self._gt_cache[member_id] = label
        return label, True

    def _matches(self, gt_label: int, queried: int) -> bool:
        # Comparing against OTHER maps the GT label through the
        # specialized class set first.
        if queried == OTHER_CLASS:
            if self.ingest_profile is None or self.ingest_profile.kind != SPECIALIZED:
                raise UnknownClass("OTHER queries need the specialized ingest profile")
            return self.ingest_profile.map_class(gt_label) == OTHER_CLASS
        return gt_label == queried

    def _check_class(self, class_id: int) -> None:
        if class_id != OTHER_CLASS and not 0 <= class_id < self.idx.header.vocab:
            raise UnknownClass(str(class_id))

    def _collect(self, cluster_ids, queried: int,
                 time_range: tuple[int, int] | None,
                 keep_label: int | None = None) -> QueryResult:
        frames: set[int] = set()
        objs: set[int] = set()
        new_inferences = 0
        matched = 0
        for cid in cluster_ids:
            label, fresh = self._verify(cid)
            if fresh:
                new_inferences += 1
            if keep_label is not None:
                ok = label == keep_label
            else:
                ok = self._matches(label, queried)
            if not ok:
                continue
            matched += 1
            c = self.idx.clusters[cid]
            for oid, fid in zip(c.member_object_ids, c.frame_ids):
                if time_range is not None and not time_range[0] <= fid <= time_range[1]:
                    continue
                frames.add(fid)
                objs.add(oid)
        return QueryResult(
            frame_ids=tuple(sorted(frames)),
            object_ids=tuple(sorted(objs)),
            gt_inferences=new_inferences,
            query_cost_units=new_inferences * self.gt_profile.cost_units,
            clusters_examined=len(cluster_ids),
            clusters_matched=matched,
        )

    def execute_query(self, req: QueryRequest) -> QueryResult:
        """Verify every cluster posted under the class (at rank <= k_x) and
        return the frames/objects of the clusters whose representative the
        GT classifier labels as the queried class."""
        self._check_class(req.class_id)
        cluster_ids = index_mod.lookup(self.idx, req.class_id, req.k_x)
        return self._collect(cluster_ids, req.class_id, req.time_range)

    def query_other(self, raw_class: int,
                    time_range: tuple[int, int] | None = None) -> QueryResult:
        """Query a class the specialized ingest model lumped into OTHER:
        verify all OTHER clusters, keep those GT-labeled `raw_class`."""
        self._check_class(raw_class)
        if self.ingest_profile is None or self.ingest_profile.kind != SPECIALIZED:
            raise UnknownClass("query_other requires a specialized ingest profile")
        if raw_class in self.ingest_profile.class_set:
            return self.execute_query(QueryRequest(raw_class, time_range=time_range))
        cluster_ids = index_mod.lookup(self.idx, OTHER_CLASS, None)
        return self._collect(cluster_ids, OTHER_CLASS, time_range, keep_label=raw_class)

    def route_query(self, class_id: int, k_x: int | None = None,
                    time_range: tuple[int, int] | None = None) -> QueryResult:
        """Dispatch to the OTHER path when the ingest model cannot emit the
        class directly, else run a plain query."""
        if (self.ingest_profile is not None
                and self.ingest_profile.kind == SPECIALIZED
                and class_id != OTHER_CLASS
                and class_id not in self.ingest_profile.class_set):
            return self.query_other(class_id, time_range=time_range)
        return self.execute_query(QueryRequest(class_id, k_x=k_x, time_range=time_range))

    def batched_query(self, req: QueryRequest, batch_schedule):
        """Yield result increments for a strictly increasing k_x schedule.

        Each increment covers only newly matched clusters; memoization
        keeps total GT inferences equal to a single query at max k_x.
        """
        schedule = list(batch_schedule)
        if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])):
            raise NonMonotoneSchedule(str(schedule))
        self._check_class(req.class_id)
        seen: set[int] = set()
        for k_x in schedule:
            cluster_ids = [c for c in index_mod.lookup(self.idx, req.class_id, k_x)
                           if c not in seen]
            seen.update(cluster_ids)
            yield self._collect(cluster_ids, req.class_id, req.time_range)
