"""Tune ingest parameters for one stream and inspect the Pareto boundary.

The tuner samples whole one-second segments, filters (profile, L_s, K)
combinations by recall at T=0, sweeps the clustering threshold T for the
survivors, and keeps the configurations no other viable one beats on
both ingest and query cost.
"""

from focusidx.classifiers import make_default_profiles
from focusidx.core import AccuracyTarget
from focusidx.simharness import StreamSpec, generate_stream
from focusidx.tuner import tune

spec = StreamSpec(n_objects=5000, seed=7, stream_id="tuning-demo")
header, objects = generate_stream(spec)
profiles = make_default_profiles(spec.vocab)

targets = AccuracyTarget(precision_target=0.95, recall_target=0.95)
outcome, result = tune(header, objects, profiles, targets=targets)

print(f"grid points evaluated: {len(result.evaluations)}, "
      f"viable: {len(result.viable)}, pareto: {len(outcome.pareto)}")
print(f"thresholds tried: {', '.join(f'{t:.3f}' for t in result.t_values)}")

print("\nPareto boundary (ingest cost up, query cost down):")
print("profile             l_s    k      t   ingest_cost  query_cost")
for e in outcome.pareto:
    c = e.cfg
    print(f"{c.profile_id:18s}  {c.l_s:4d}  {c.k:3d}  {c.t:5.2f}"
          f"  {e.ingest_cost:11.1f}  {e.query_cost:10.1f}")

print("\npolicy picks:")
for name, pick in (("balance", outcome.balance),
                   ("opt-ingest", outcome.opt_ingest),
                   ("opt-query", outcome.opt_query)):
    c = pick.cfg
    print(f"  {name:10s} -> {c.profile_id} k={c.k} t={c.t:.2f} "
          f"(ingest {pick.ingest_cost:.1f}, query {pick.query_cost:.1f}, "
          f"est recall {pick.est_recall:.3f})")
