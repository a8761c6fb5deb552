"""Per-stream parameter selection.

Two-step search over (profile, L_s, K, T): step 1 keeps the
(profile, L_s, K) tuples whose estimated recall at T=0 meets the recall
target; step 2 sweeps the clustering threshold T for the survivors and
keeps the points that also meet the precision target.  The viable set is
then reduced to its Pareto boundary over (ingest cost, query cost) and
the Balance / Opt-Ingest / Opt-Query policies are picked from it.

Grid-point evaluation reuses cached classifications and cluster
skeletons (cluster structure is independent of K and L_s); the cached
path is exactly equivalent to running `evaluate_config` per point.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import cKDTree

from . import classifiers, ingest as ingest_mod
from .classifiers import (GENERIC_CHEAP, GROUND_TRUTH, ClassifierProfile,
                          extract_feature, ground_truth_label, specialize_profile)
from .clustering import ClusterEngine
from .core import OTHER_CLASS, AccuracyTarget, Config, RankedClassification
from .errors import EmptySample, EmptyViableSet, NoViableConfig, UsageError
from .evaluation import SegmentIndex, class_precision_recall, dominant_classes, evaluate_index
from .streamio import StreamHeader

DEFAULT_K_VALUES = (1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 200)
DEFAULT_LS_VALUES = (5, 10, 25, 50)
DEFAULT_M = 100
SAMPLE_MAX_OBJECTS = 5000
SAMPLE_MIN_OBJECTS = 500
SAMPLE_FRACTION = 0.2


@dataclass(frozen=True)
class TuneGrid:
    k_values: tuple[int, ...] = DEFAULT_K_VALUES
    l_s_values: tuple[int, ...] = DEFAULT_LS_VALUES
    t_values: tuple[float, ...] | None = None  # None: derived from the sample
    m: int = DEFAULT_M
    specialize: bool = True


@dataclass(frozen=True)
class ConfigEvaluation:
    cfg: Config
    est_recall: float
    est_precision: float
    ingest_cost: float
    query_cost: float
    viable: bool

    def cost_sum(self) -> float:
        return self.ingest_cost + self.query_cost


@dataclass(frozen=True)
class TuneOutcome:
    pareto: tuple[ConfigEvaluation, ...]
    balance: ConfigEvaluation
    opt_ingest: ConfigEvaluation
    opt_query: ConfigEvaluation


@dataclass(frozen=True)
class TuneResult:
    viable: tuple[ConfigEvaluation, ...]
    evaluations: tuple[ConfigEvaluation, ...]  # every grid point, viable or not
    profiles: dict[str, ClassifierProfile]     # registry + derived specializations
    t_values: tuple[float, ...]


def find_gt_profile(profiles: dict[str, ClassifierProfile]) -> ClassifierProfile:
    for p in profiles.values():
        if p.kind == GROUND_TRUTH:
            return p
    raise UsageError("profile registry has no GROUND_TRUTH profile")


def sample_stream(objects, fps: float, seed: int = 0,
                  max_objects: int = SAMPLE_MAX_OBJECTS,
                  min_objects: int = SAMPLE_MIN_OBJECTS,
                  fraction: float = SAMPLE_FRACTION):
    """Seeded sample of whole one-second segments, in stream order.

    Short streams are sampled whole: accuracy estimates on fewer than
    `min_objects` objects are too noisy to tune against.
    """
    if not objects:
        raise EmptySample("empty stream")
    target = min(max_objects,
                 max(round(fraction * len(objects)), min(len(objects), min_objects)))
    seg_len = max(1, int(round(fps)))
    by_seg: dict[int, list] = {}
    for obj in objects:
        by_seg.setdefault(obj.frame_id // seg_len, []).append(obj)
    segs = sorted(by_seg)
    rng = np.random.default_rng([seed, 0x5A17])
    picked = []
    total = 0
    for i in rng.permutation(len(segs)):
        picked.append(segs[i])
        total += len(by_seg[segs[i]])
        if total >= target:
            break
    return [obj for seg in sorted(picked) for obj in by_seg[seg]]


def derive_t_values(objects, count: int = 12) -> tuple[float, ...]:
    """0 plus log-spaced thresholds up to 2x the median nearest-neighbor
    distance of the sample's raw features."""
    feats = np.asarray([o.feature for o in objects[:500]])
    if len(feats) < 2:
        return (0.0,)
    dists, _ = cKDTree(feats).query(feats, k=2)
    hi = 2.0 * float(np.median(dists[:, 1]))
    if hi <= 0:
        return (0.0,)
    return (0.0,) + tuple(float(t) for t in np.geomspace(hi / 64.0, hi, count - 1))


def evaluate_config(header: StreamHeader, sample, cfg: Config,
                    profiles: dict[str, ClassifierProfile],
                    pixel_eps: float = ingest_mod.DEFAULT_PIXEL_EPS,
                    seed: int = 0) -> ConfigEvaluation:
    """Run the full ingest pipeline on the sample, query every dominant
    class, and score precision/recall at segment granularity."""
    sample = list(sample)
    if not sample:
        raise EmptySample("evaluate_config needs a non-empty sample")
    gt = find_gt_profile(profiles)
    idx, report = ingest_mod.ingest_stream(header, sample, cfg, profiles,
                                           pixel_eps=pixel_eps, seed=seed)
    ev = evaluate_index(idx, sample, gt, profiles[cfg.profile_id], header.fps)
    return ConfigEvaluation(
        cfg=cfg,
        est_recall=ev.macro_recall,
        est_precision=ev.macro_precision,
        ingest_cost=report.ingest_cost_units,
        query_cost=ev.mean_query_cost,
        viable=(ev.macro_recall >= cfg.targets.recall_target
                and ev.macro_precision >= cfg.targets.precision_target),
    )


class _Skeleton:
    """Cluster structure for one (noise sigma, T): config-independent."""

    __slots__ = ("row_cluster", "rep_label", "frames", "n_clusters", "_by_class")

    def __init__(self, row_cluster: np.ndarray, rep_label: np.ndarray,
                 frames: list[set]):
        self.row_cluster = row_cluster  # classified-object row -> cluster index
        self.rep_label = rep_label      # GT label of each cluster representative
        self.frames = frames            # per cluster: frame ids of all members
        self.n_clusters = len(frames)
        self._by_class: dict[int, np.ndarray] = {}

    def clusters_of_class(self, cls: int) -> np.ndarray:
        if cls not in self._by_class:
            self._by_class[cls] = np.flatnonzero(self.rep_label == cls)
        return self._by_class[cls]


class _GridEvaluator:
    """Shared caches for one tuning run: classifications per profile,
    cluster skeletons per (noise sigma, T).  Produces evaluations
    identical to `evaluate_config`."""

    def __init__(self, header: StreamHeader, sample, profiles, targets: AccuracyTarget,
                 pixel_eps: float, seed: int, m: int):
        self.header = header
        self.sample = list(sample)
        if not self.sample:
            raise EmptySample("empty tuning sample")
        self.targets = targets
        self.pixel_eps = pixel_eps
        self.seed = seed
        self.m = m
        self.gt_cost = find_gt_profile(profiles).cost_units
        self.segidx = SegmentIndex(self.sample, header.fps)
        self.dominant = dominant_classes(self.sample)
        self._gt_segs = {c: self.segidx.gt_segments(c) for c in self.dominant}

        # pixel-diff outcome is config-independent
        self.is_dup = np.zeros(len(self.sample), dtype=bool)
        for i in range(1, len(self.sample)):
            self.is_dup[i] = ingest_mod.pixel_diff(self.sample[i - 1], self.sample[i],
                                                   pixel_eps)
        self.classified = [o for o, d in zip(self.sample, self.is_dup) if not d]
        self.n_classified = len(self.classified)

        self._features: dict[float, list[np.ndarray]] = {}
        self._skeletons: dict[tuple[float, float], _Skeleton] = {}
        self._ranked: dict[str, np.ndarray] = {}
        self._pos: dict[tuple[str, int], np.ndarray] = {}

    def _features_for(self, sigma: float) -> list[np.ndarray]:
        if sigma not in self._features:
            stub = ClassifierProfile("_noise", GENERIC_CHEAP, self.header.vocab,
                                     classifiers.RankModel(0.5, 0.5), 1.0,
                                     feature_noise_sigma=sigma)
            self._features[sigma] = [extract_feature(stub, o, self.seed)
                                     for o in self.classified]
        return self._features[sigma]

    def _skeleton_for(self, sigma: float, t: float) -> _Skeleton:
        key = (sigma, t)
        if key in self._skeletons:
            return self._skeletons[key]
        feats = self._features_for(sigma)
        engine = ClusterEngine(self.header.dim, t, self.m)
        prev_cluster = None
        row = 0
        row_of_member: dict[int, int] = {}
        for i, obj in enumerate(self.sample):
            if self.is_dup[i]:
                engine.add_dedup_member(prev_cluster, obj)
            else:
                rc = RankedClassification((), feats[row])
                row_of_member[obj.object_id] = row
                prev_cluster = engine.insert(obj, rc)
                row += 1
        obj_by_id = {o.object_id: o for o in self.sample}
        clusters = engine.finalize()
        row_cluster = np.empty(self.n_classified, dtype=np.int64)
        rep_label = np.empty(len(clusters), dtype=np.int64)
        frames: list[set] = []
        for ci, c in enumerate(clusters):
            for oid in c.member_object_ids:
                if oid in row_of_member:
                    row_cluster[row_of_member[oid]] = ci
            rep_label[ci] = ground_truth_label(obj_by_id[c.centroid_member_id])
            frames.append(set(c.frame_ids))
        skel = _Skeleton(row_cluster, rep_label, frames)
        self._skeletons[key] = skel
        return skel

    def _positions(self, profile: ClassifierProfile, class_id: int) -> np.ndarray:
        """0-based rank position of `class_id` in every classified object's
        ranked output (every class of the profile universe appears once)."""
        key = (profile.profile_id, class_id)
        if key in self._pos:
            return self._pos[key]
        if profile.profile_id not in self._ranked:
            mat = np.empty((self.n_classified, profile.output_length), dtype=np.int32)
            for r, obj in enumerate(self.classified):
                mat[r] = classifiers.classify(profile, obj, self.seed).classes()
            self._ranked[profile.profile_id] = mat
        mat = self._ranked[profile.profile_id]
        self._pos[key] = (mat == class_id).argmax(axis=1)
        return self._pos[key]

    def evaluate(self, profile: ClassifierProfile, k: int, t: float) -> ConfigEvaluation:
        skel = self._skeleton_for(profile.feature_noise_sigma, t)
        precisions, recalls, costs = [], [], []
        for cls in self.dominant:
            direct = profile.class_set is None or cls in profile.class_set
            lookup_class = cls if direct else OTHER_CLASS
            pos = self._positions(profile, lookup_class)
            hit = pos < k
            matched = np.bincount(skel.row_cluster[hit],
                                  minlength=skel.n_clusters) > 0
            # direct path and OTHER routing both keep exactly the clusters
            # whose representative the GT oracle labels as the queried class
            verified = skel.clusters_of_class(cls)
            verified = verified[matched[verified]]
            frames: set[int] = set()
            for ci in verified:
                frames.update(skel.frames[ci])
            p, r = class_precision_recall(self.segidx.claimed_segments(frames),
                                          self._gt_segs[cls])
            precisions.append(p)
            recalls.append(r)
            costs.append(int(np.count_nonzero(matched)) * self.gt_cost)
        n = len(self.dominant)
        est_precision = sum(precisions) / n
        est_recall = sum(recalls) / n
        cfg = Config(profile_id=profile.profile_id, k=k, l_s=profile.l_s,
                     t=t, m=self.m, targets=self.targets)
        return ConfigEvaluation(
            cfg=cfg,
            est_recall=est_recall,
            est_precision=est_precision,
            ingest_cost=self.n_classified * profile.cost_units,
            query_cost=sum(costs) / n,
            viable=(est_recall >= self.targets.recall_target
                    and est_precision >= self.targets.precision_target),
        )


def candidate_profiles(profiles: dict[str, ClassifierProfile], sample,
                       l_s_values, specialize: bool = True) -> list[ClassifierProfile]:
    """All registered cheap profiles plus, when allowed, their per-stream
    specializations for each L_s (class sets from the sample GT histogram)."""
    hist: dict[int, int] = {}
    for obj in sample:
        label = ground_truth_label(obj)
        hist[label] = hist.get(label, 0) + 1
    out = []
    for pid in sorted(profiles):
        p = profiles[pid]
        if p.kind != GENERIC_CHEAP:
            continue
        out.append(p)
        if specialize:
            for l_s in l_s_values:
                out.append(specialize_profile(p, hist, l_s))
    return out


def two_step_search(header: StreamHeader, sample, profiles,
                    targets: AccuracyTarget = AccuracyTarget(),
                    grid: TuneGrid = TuneGrid(),
                    pixel_eps: float = ingest_mod.DEFAULT_PIXEL_EPS,
                    seed: int = 0) -> TuneResult:
    """Recall-only filtering of (profile, L_s, K) at T=0, then a T sweep
    for the survivors against the precision target."""
    sample = list(sample)
    if not sample:
        raise EmptySample("empty tuning sample")
    candidates = candidate_profiles(profiles, sample, grid.l_s_values, grid.specialize)
    if not candidates:
        raise UsageError("no GENERIC_CHEAP profile registered")
    t_values = grid.t_values if grid.t_values is not None else derive_t_values(sample)
    t_values = tuple(sorted(t_values))

    ev = _GridEvaluator(header, sample, profiles, targets, pixel_eps, seed, grid.m)
    evaluations: list[ConfigEvaluation] = []
    survivors: list[tuple[ClassifierProfile, int, ConfigEvaluation | None]] = []
    for profile in candidates:
        for k in grid.k_values:
            if k > profile.output_length:
                continue
            e0 = ev.evaluate(profile, k, 0.0)
            if e0.est_recall >= targets.recall_target:
                survivors.append((profile, k, e0))
            else:
                evaluations.append(e0)

    viable: list[ConfigEvaluation] = []
    for profile, k, e0 in survivors:
        for t in t_values:
            e = e0 if t == 0.0 else ev.evaluate(profile, k, t)
            evaluations.append(e)
            if e.viable:
                viable.append(e)

    viable.sort(key=lambda e: e.cfg.sort_key())
    evaluations.sort(key=lambda e: e.cfg.sort_key())
    if not viable:
        raise NoViableConfig("no grid point meets the accuracy targets")
    augmented = dict(profiles)
    for p in candidates:
        augmented[p.profile_id] = p
    return TuneResult(tuple(viable), tuple(evaluations), augmented, t_values)


def _dominates(a: ConfigEvaluation, b: ConfigEvaluation) -> bool:
    return (a.ingest_cost <= b.ingest_cost and a.query_cost <= b.query_cost
            and (a.ingest_cost < b.ingest_cost or a.query_cost < b.query_cost))


def pareto_and_policies(viable) -> TuneOutcome:
    """Non-dominated set under (ingest cost, query cost) plus the three
    policy picks; ties break toward lower ingest, then lower query, then
    the lexicographically smallest config."""
    viable = list(viable)
    if not viable:
        raise EmptyViableSet("pareto_and_policies needs a non-empty viable set")
    pareto = [e for e in viable if not any(_dominates(o, e) for o in viable)]
    pareto.sort(key=lambda e: (e.ingest_cost, e.query_cost, e.cfg.sort_key()))
    balance = min(pareto, key=lambda e: (e.cost_sum(), e.ingest_cost, e.query_cost,
                                         e.cfg.sort_key()))
    opt_ingest = min(pareto, key=lambda e: (e.ingest_cost, e.query_cost, e.cfg.sort_key()))
    opt_query = min(pareto, key=lambda e: (e.query_cost, e.ingest_cost, e.cfg.sort_key()))
    return TuneOutcome(tuple(pareto), balance, opt_ingest, opt_query)


def tune(header: StreamHeader, objects, profiles,
         targets: AccuracyTarget = AccuracyTarget(),
         grid: TuneGrid = TuneGrid(),
         pixel_eps: float = ingest_mod.DEFAULT_PIXEL_EPS,
         seed: int = 0) -> tuple[TuneOutcome, TuneResult]:
    """Sample the stream, search the grid, and pick the policy configs."""
    sample = sample_stream(objects, header.fps, seed=seed)
    result = two_step_search(header, sample, profiles, targets=targets, grid=grid,
                             pixel_eps=pixel_eps, seed=seed)
    return pareto_and_policies(result.viable), result
