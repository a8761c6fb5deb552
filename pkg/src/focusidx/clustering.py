"""Single-pass incremental clustering with threshold T and live cap M.

Each incoming feature joins the closest live cluster if that cluster's
centroid is within L2 distance T, else it seeds a new cluster.  When
more than M clusters are live, the one with the fewest members is
evicted (sealed).  Total distance computations stay within M*n.

Centroids are running means over the members that actually had features
extracted (pixel-diff'ed duplicates join a cluster without a feature).
Member features are retained only until a cluster is sealed, at which
point the representative member nearest the centroid is fixed and the
features dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DetectedObject, RankedClassification
from .errors import DimensionMismatch


@dataclass
class Cluster:
    cluster_id: int
    centroid: np.ndarray
    member_object_ids: list[int] = field(default_factory=list)
    frame_ids: list[int] = field(default_factory=list)
    class_best_rank: dict[int, int] = field(default_factory=dict)
    centroid_member_id: int | None = None
    sealed: bool = False
    # insertion-time distance of each featured member to the then-current
    # centroid (the threshold-T guarantee holds against these, not against
    # the final, drifted centroid)
    insertion_distances: list[float] = field(default_factory=list)
    _features: list[np.ndarray] = field(default_factory=list, repr=False)
    _featured_ids: list[int] = field(default_factory=list, repr=False)
    _feature_sum: np.ndarray | None = field(default=None, repr=False)

    @property
    def class_set(self) -> set[int]:
        return set(self.class_best_rank)

    def size(self) -> int:
        return len(self.member_object_ids)

    def _add(self, obj: DetectedObject, feature: np.ndarray, distance: float) -> None:
        self.member_object_ids.append(obj.object_id)
        self.frame_ids.append(obj.frame_id)
        self.insertion_distances.append(distance)
        self._features.append(feature)
        self._featured_ids.append(obj.object_id)
        if self._feature_sum is None:
            self._feature_sum = feature.astype(float).copy()
        else:
            self._feature_sum += feature
        self.centroid = self._feature_sum / len(self._features)

    def add_without_feature(self, obj: DetectedObject) -> None:
        self.member_object_ids.append(obj.object_id)
        self.frame_ids.append(obj.frame_id)

    def merge_classes(self, topk: RankedClassification) -> None:
        for rank, (class_id, _) in enumerate(topk.ranked, start=1):
            best = self.class_best_rank.get(class_id)
            if best is None or rank < best:
                self.class_best_rank[class_id] = rank

    def seal(self) -> None:
        """Fix the representative member (nearest the centroid, ties to the
        smaller object id) and drop retained member features."""
        if self.sealed:
            return
        if self._features:
            dists = np.linalg.norm(np.asarray(self._features) - self.centroid, axis=1)
            best = int(np.argmin(dists))  # first minimum = smallest object id
            self.centroid_member_id = self._featured_ids[best]
        self._features = []
        self._featured_ids = []
        self._feature_sum = None
        self.sealed = True


class ClusterEngine:
    """One engine per stream; inserts are strictly sequential."""

    def __init__(self, dim: int, t: float, m: int):
        if m < 1:
            raise ValueError("m must be >= 1")
        if t < 0:
            raise ValueError("t must be >= 0")
        self.dim = dim
        self.t = t
        self.m = m
        self.live: list[Cluster] = []  # ascending cluster_id
        self.evicted: list[Cluster] = []
        self.by_id: dict[int, Cluster] = {}
        self.distance_computations = 0
        self.objects_inserted = 0
        self._next_id = 0

    def insert(self, obj: DetectedObject,
               topk: RankedClassification | None = None) -> int:
        """Insert one object; returns the cluster id it joined or seeded."""
        feature = topk.feature if topk is not None else obj.feature
        if feature.shape[0] != self.dim:
            raise DimensionMismatch(
                f"feature dim {feature.shape[0]} != engine dim {self.dim}")
        self.objects_inserted += 1
        target: Cluster | None = None
        distance = 0.0
        if self.live:
            centroids = np.asarray([c.centroid for c in self.live])
            dists = np.linalg.norm(centroids - feature, axis=1)
            self.distance_computations += len(self.live)
            idx = int(np.argmin(dists))  # ties: first = smallest cluster_id
            if dists[idx] <= self.t:
                target = self.live[idx]
                distance = float(dists[idx])
        if target is None:
            target = Cluster(cluster_id=self._next_id, centroid=feature.astype(float))
            self._next_id += 1
            self.live.append(target)
            self.by_id[target.cluster_id] = target
        target._add(obj, feature, distance)
        if topk is not None:
            target.merge_classes(topk)
        if len(self.live) > self.m:
            self._evict_smallest()
        return target.cluster_id

    def add_dedup_member(self, cluster_id: int, obj: DetectedObject) -> None:
        """Attach a pixel-diff'ed duplicate to its predecessor's cluster
        without a feature (and without any distance computation)."""
        self.by_id[cluster_id].add_without_feature(obj)

    def _evict_smallest(self) -> None:
        sizes = [c.size() for c in self.live]
        idx = sizes.index(min(sizes))  # ties: first = smallest cluster_id
        victim = self.live.pop(idx)
        victim.seal()
        self.evicted.append(victim)

    def finalize(self) -> list[Cluster]:
        """Seal everything; returns all clusters ordered by cluster_id."""
        for c in self.live:
            c.seal()
        out = sorted(self.evicted + self.live, key=lambda c: c.cluster_id)
        self.live = []
        self.evicted = list(out)
        return out

    def distance_budget(self, n: int) -> bool:
        """O(Mn) audit: at most M distance computations per insert."""
        return self.distance_computations <= self.m * n

    def retained_feature_count(self) -> int:
        return sum(len(c._features) for c in self.by_id.values())
