"""Walk through the two phases on one small synthetic stream.

Ingest runs only the cheap classifier and clusters similar objects; the
expensive ground-truth model is reserved for query time, where it checks
one representative object per candidate cluster.
"""

from collections import Counter

from focusidx.classifiers import make_default_profiles
from focusidx.core import AccuracyTarget, Config
from focusidx.evaluation import SegmentIndex, class_precision_recall
from focusidx.ingest import ingest_stream
from focusidx.query import QueryRequest, QuerySession
from focusidx.simharness import StreamSpec, generate_stream

spec = StreamSpec(n_objects=3000, vocab=100, n_stream_classes=15, seed=42,
                  stream_id="demo")
header, objects = generate_stream(spec)
print(f"stream: {len(objects)} detected objects, "
      f"{len({o.frame_id for o in objects})} frames, fps={header.fps:g}")

profiles = make_default_profiles(spec.vocab)

# A hand-picked config: index the cheap model's top 8 classes per object,
# join clusters within L2 distance 1.0, keep at most 100 live clusters.
cfg = Config(profile_id="cheap", k=8, l_s=spec.vocab, t=1.0, m=100,
             targets=AccuracyTarget())
idx, report = ingest_stream(header, objects, cfg, profiles)

print(f"\ningest: classified {report.objects_classified}/{report.objects_seen} "
      f"objects ({report.objects_seen - report.objects_classified} skipped by "
      "pixel differencing)")
print(f"ingest: {report.clusters_emitted} clusters, "
      f"cost {report.ingest_cost_units:.0f} units "
      f"(vs {len(objects) * profiles['gt'].cost_units:.0f} for GT-on-everything)")

# Query the three most common classes.  Each query verifies only the
# representatives of the clusters the index proposes.
top3 = [c for c, _ in Counter(o.true_class for o in objects).most_common(3)]
by_id = {o.object_id: o for o in objects}
segidx = SegmentIndex(objects, header.fps)
session = QuerySession(idx, profiles["gt"], by_id, ingest_profile=profiles["cheap"])

print("\nclass  examined  matched  gt_calls  precision  recall")
for cls in top3:
    res = session.execute_query(QueryRequest(cls))
    p, r = class_precision_recall(segidx.claimed_segments(res.frame_ids),
                                  segidx.gt_segments(cls))
    print(f"{cls:5d}  {res.clusters_examined:8d}  {res.clusters_matched:7d}"
          f"  {res.gt_inferences:8d}  {p:9.3f}  {r:6.3f}")

# The session memoizes representative labels, so re-querying is free.
res = session.execute_query(QueryRequest(top3[0]))
print(f"\nre-query class {top3[0]}: {res.gt_inferences} new GT inferences "
      f"(cost {res.query_cost_units:.0f})")
