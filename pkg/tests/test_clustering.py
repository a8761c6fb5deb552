import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from focusidx.clustering import ClusterEngine
from focusidx.core import RankedClassification
from focusidx.errors import DimensionMismatch
from conftest import make_object


def _insert(engine, oid, feature, topk=()):
    obj = make_object(oid, feature)
    rc = RankedClassification(tuple((c, 0.9) for c in topk),
                              np.asarray(feature, dtype=float))
    return engine.insert(obj, rc)


def test_threshold_join_and_eviction_scenario():
    """Hand-worked five-point scenario with T=1, M=2.

    Point 4 forces a third live cluster; the smallest live one (cluster 1,
    single member, created before cluster 2) is evicted.
    """
    eng = ClusterEngine(3, t=1.0, m=2)
    assert _insert(eng, 0, [0, 0, 0]) == 0
    assert _insert(eng, 1, [0.5, 0, 0]) == 0       # dist 0.5 <= T
    assert _insert(eng, 2, [5, 5, 5]) == 1          # far: new cluster
    assert _insert(eng, 3, [0.2, 0.2, 0]) == 0
    assert _insert(eng, 4, [9, 9, 9]) == 2          # far: new, triggers evict
    assert [c.cluster_id for c in eng.live] == [0, 2]
    assert [c.cluster_id for c in eng.evicted] == [1]
    assert eng.distance_computations == 6

    clusters = eng.finalize()
    assert [c.cluster_id for c in clusters] == [0, 1, 2]
    assert clusters[0].member_object_ids == [0, 1, 3]
    np.testing.assert_allclose(clusters[0].centroid, [0.7 / 3, 0.2 / 3, 0.0])
    # member 3 is nearest the final centroid
    assert clusters[0].centroid_member_id == 3
    assert clusters[1].centroid_member_id == 2
    assert all(c.sealed for c in clusters)


def test_t_zero_keeps_singletons():
    eng = ClusterEngine(1, t=0.0, m=100)
    for i in range(5):
        _insert(eng, i, [float(i)])
    assert len(eng.finalize()) == 5


def test_exact_match_joins_at_t_zero():
    eng = ClusterEngine(1, t=0.0, m=10)
    _insert(eng, 0, [1.0])
    assert _insert(eng, 1, [1.0]) == 0  # distance 0 <= T=0


def test_centroid_is_running_mean_of_featured_members():
    eng = ClusterEngine(1, t=10.0, m=5)
    _insert(eng, 0, [0.0])
    _insert(eng, 1, [3.0])
    eng.add_dedup_member(0, make_object(2, [99.0]))  # no feature, no shift
    np.testing.assert_allclose(eng.by_id[0].centroid, [1.5])
    assert eng.by_id[0].member_object_ids == [0, 1, 2]
    assert eng.retained_feature_count() == 2


def test_representative_tie_breaks_to_smaller_object_id():
    eng = ClusterEngine(1, t=10.0, m=5)
    _insert(eng, 4, [0.0])
    _insert(eng, 9, [2.0])  # both at distance 1 from centroid [1.0]
    (c,) = eng.finalize()
    assert c.centroid_member_id == 4


def test_class_best_rank_keeps_minimum():
    eng = ClusterEngine(1, t=10.0, m=5)
    _insert(eng, 0, [0.0], topk=(7, 8))
    _insert(eng, 1, [0.1], topk=(8, 7))
    assert eng.by_id[0].class_best_rank == {7: 1, 8: 1}


def test_dimension_mismatch():
    eng = ClusterEngine(3, t=1.0, m=2)
    with pytest.raises(DimensionMismatch):
        _insert(eng, 0, [1.0])


def test_engine_rejects_bad_params():
    with pytest.raises(ValueError):
        ClusterEngine(2, t=1.0, m=0)
    with pytest.raises(ValueError):
        ClusterEngine(2, t=-1.0, m=2)


@settings(deadline=None, max_examples=50)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=60),
       st.floats(0, 5), st.integers(1, 8))
def test_engine_invariants(values, t, m):
    """Distance budget, member partition, centroid = mean, feature release."""
    eng = ClusterEngine(1, t=t, m=m)
    feats = {}
    for i, v in enumerate(values):
        feats[i] = v
        _insert(eng, i, [v])
    assert eng.distance_budget(len(values))
    assert len(eng.live) <= m
    clusters = eng.finalize()
    members = [oid for c in clusters for oid in c.member_object_ids]
    assert sorted(members) == list(range(len(values)))
    for c in clusters:
        mean = np.mean([feats[oid] for oid in c.member_object_ids])
        np.testing.assert_allclose(c.centroid, [mean], atol=1e-9)
        assert c.centroid_member_id in c.member_object_ids
        # threshold guarantee holds at insertion time
        assert all(d <= t for d in c.insertion_distances)
    assert eng.retained_feature_count() == 0
