"""Ingest-time worker: pixel differencing, cheap classification, single-pass
clustering, and top-K index construction, with cost accounting.

Cost is inference count x per-profile unit cost; the ground-truth
classifier is never invoked here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import classifiers, index as index_mod
from .clustering import ClusterEngine
from .core import Config, DetectedObject, validate_config
from .errors import SignatureLengthMismatch
from .index import IndexHeader, TopKIndex
from .streamio import StreamHeader

#: Default mean-absolute pixel difference under which two adjacent-frame
#: objects are treated as duplicates.  Negative disables differencing.
DEFAULT_PIXEL_EPS = 0.01


@dataclass(frozen=True)
class IngestReport:
    objects_seen: int
    objects_classified: int
    clusters_emitted: int
    ingest_cost_units: float
    dedup_savings_units: float  # classifier cost avoided by pixel differencing
    distance_computations: int
    gt_invocations: int = 0  # always 0: ingest never runs the GT classifier


def pixel_diff(prev: DetectedObject, cur: DetectedObject, eps: float) -> bool:
    """True iff the two objects are in adjacent frames and their pixel
    signatures differ by at most `eps` in mean absolute difference."""
    if eps < 0:
        return False
    if prev.pixel_signature.shape[0] != cur.pixel_signature.shape[0]:
        raise SignatureLengthMismatch(
            f"{prev.pixel_signature.shape[0]} vs {cur.pixel_signature.shape[0]}")
    if cur.frame_id - prev.frame_id > 1:
        return False
    return float(np.mean(np.abs(prev.pixel_signature - cur.pixel_signature))) <= eps


def ingest_stream(header: StreamHeader, stream, cfg: Config, profiles,
                  pixel_eps: float = DEFAULT_PIXEL_EPS, seed: int = 0,
                  classify_fn=None) -> tuple[TopKIndex, IngestReport]:
    """Run the full ingest pipeline over an ordered object stream.

    `classify_fn(profile, obj, seed)` defaults to the synthetic
    classifier; the tuner substitutes a memoized equivalent.
    """
    validate_config(cfg, profiles)
    profile = profiles[cfg.profile_id]
    if classify_fn is None:
        classify_fn = classifiers.classify
    engine = ClusterEngine(header.dim, cfg.t, cfg.m)

    seen = 0
    classified = 0
    prev_obj: DetectedObject | None = None
    prev_cluster: int | None = None
    for obj in stream:
        seen += 1
        if prev_obj is not None and pixel_diff(prev_obj, obj, pixel_eps):
            engine.add_dedup_member(prev_cluster, obj)
        else:
            ranked = classify_fn(profile, obj, seed)
            classified += 1
            prev_cluster = engine.insert(obj, ranked.top(cfg.k))
        prev_obj = obj

    clusters = engine.finalize()
    idx = index_mod.build(clusters, IndexHeader(
        stream_id=header.stream_id,
        dim=header.dim,
        vocab=header.vocab,
        n_objects=seen,
        config=cfg,
    ))
    report = IngestReport(
        objects_seen=seen,
        objects_classified=classified,
        clusters_emitted=len(clusters),
        ingest_cost_units=classified * profile.cost_units,
        dedup_savings_units=(seen - classified) * profile.cost_units,
        distance_computations=engine.distance_computations,
    )
    assert engine.distance_budget(classified), "O(Mn) distance budget exceeded"
    assert engine.retained_feature_count() == 0
    return idx, report
