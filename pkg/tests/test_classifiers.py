import numpy as np
import pytest
from hypothesis import given, strategies as st

from focusidx.classifiers import (GENERIC_COST, GT_COST, SPECIALIZED,
                                  ClassifierProfile, GENERIC_CHEAP, RankModel,
                                  classify, extract_feature, ground_truth_label,
                                  make_default_profiles, parse_profiles,
                                  format_profiles, specialize_profile,
                                  true_class_rank)
from focusidx.core import OTHER_CLASS
from focusidx.errors import DataError, EmptyHistogram, MissingTrueClass
from conftest import make_object


# -- rank model -------------------------------------------------------------

def test_rank_model_validation():
    with pytest.raises(DataError):
        RankModel(0.0, 0.5)
    with pytest.raises(DataError):
        RankModel(0.5, 1.0)
    RankModel(1.0, 0.0)


def test_inclusion_frozen_values():
    m = RankModel(0.7, 0.95)
    assert m.inclusion(1) == pytest.approx(0.7)
    # 1 - 0.3 * 0.95**7 and 1 - 0.3 * 0.95**31, computed independently
    assert m.inclusion(8) == pytest.approx(0.790498811171875)
    assert m.inclusion(32) == pytest.approx(0.9388279522762629)


def test_rank_from_uniform_frozen_values():
    m = RankModel(0.7, 0.95)
    assert m.rank_from_uniform(0.2, 1000) == 1
    assert m.rank_from_uniform(0.7, 1000) == 1
    assert m.rank_from_uniform(0.8, 1000) == 9
    assert m.rank_from_uniform(0.999, 1000) == 113
    assert m.rank_from_uniform(0.999, 50) == 50  # capped at output length


@given(u=st.floats(1e-9, 1 - 1e-9), p1=st.floats(0.05, 0.99),
       rho=st.floats(0.0, 0.99))
def test_rank_is_smallest_k_reaching_u(u, p1, rho):
    m = RankModel(p1, rho)
    k = m.rank_from_uniform(u, 10_000)
    # 1e-9 slack for float round-off in 1 - (1-p1)*rho**(k-1)
    assert m.inclusion(k) >= u - 1e-9 or k == 10_000
    if k > 1:
        assert m.inclusion(k - 1) < u + 1e-9


@given(p1=st.floats(0.05, 1.0), rho=st.floats(0.0, 0.999))
def test_inclusion_monotone(p1, rho):
    m = RankModel(p1, rho)
    incs = [m.inclusion(k) for k in range(1, 50)]
    assert all(b >= a for a, b in zip(incs, incs[1:]))


# -- classify ---------------------------------------------------------------

def test_classify_is_deterministic(profiles):
    obj = make_object(3, np.zeros(64), true_class=17)
    a = classify(profiles["cheap"], obj, rng_seed=5)
    b = classify(profiles["cheap"], obj, rng_seed=5)
    assert a.ranked == b.ranked
    assert np.array_equal(a.feature, b.feature)


def test_classify_output_is_permutation(profiles):
    obj = make_object(3, np.zeros(64), true_class=17)
    out = classify(profiles["cheap"], obj, rng_seed=5)
    classes = out.classes()
    assert len(classes) == 1000
    assert sorted(classes) == list(range(1000))


def test_classify_places_true_class_at_model_rank(profiles):
    p = profiles["cheap"]
    for oid in range(30):
        obj = make_object(oid, np.zeros(64), true_class=17)
        rank = true_class_rank(p, obj, rng_seed=0)
        out = classify(p, obj, rng_seed=0)
        assert out.classes()[rank - 1] == 17


def test_classify_confidences_decreasing(profiles):
    obj = make_object(1, np.zeros(64), true_class=2)
    conf = [c for _, c in classify(profiles["cheap"], obj, 0).ranked]
    assert all(b < a for a, b in zip(conf, conf[1:]))


def test_classify_fillers_fixed_across_objects(profiles):
    """The confusion ordering depends on the class, not the object."""
    p = profiles["cheap"]
    outs = []
    for oid in range(50):
        obj = make_object(oid, np.zeros(64), true_class=4)
        ranked = classify(p, obj, 0).classes()
        ranked.remove(4)
        outs.append(tuple(ranked))
    assert len(set(outs)) == 1


def test_missing_true_class(profiles):
    obj = make_object(0, np.zeros(64), true_class=None)
    with pytest.raises(MissingTrueClass):
        classify(profiles["cheap"], obj, 0)
    with pytest.raises(MissingTrueClass):
        ground_truth_label(obj)


def test_ground_truth_is_exact(profiles):
    obj = make_object(0, np.zeros(64), true_class=123)
    assert ground_truth_label(obj) == 123
    assert classify(profiles["gt"], obj, 0).classes()[0] == 123


def test_extract_feature_noise():
    quiet = ClassifierProfile("q", GENERIC_CHEAP, 10, RankModel(0.5, 0.5), 1.0)
    noisy = ClassifierProfile("n", GENERIC_CHEAP, 10, RankModel(0.5, 0.5), 1.0,
                              feature_noise_sigma=0.1)
    obj = make_object(0, np.ones(8), true_class=1)
    f0 = extract_feature(quiet, obj, 0)
    assert np.array_equal(f0, obj.feature)
    assert f0 is not obj.feature
    f1 = extract_feature(noisy, obj, 0)
    assert not np.array_equal(f1, obj.feature)
    assert np.array_equal(f1, extract_feature(noisy, obj, 0))


# -- specialization ---------------------------------------------------------

def test_specialize_profile_top_classes_and_scaling(profiles):
    hist = {5: 10, 2: 10, 9: 3, 1: 1}
    spec = specialize_profile(profiles["cheap"], hist, l_s=3)
    # ties on count break toward the smaller class id: 2 before 5
    assert spec.class_set == (2, 5, 9, OTHER_CLASS)
    assert spec.kind == SPECIALIZED
    assert spec.cost_units == pytest.approx(GENERIC_COST / 10.0)
    assert spec.rank_model.rho == pytest.approx(0.95 * 0.8)
    assert spec.output_length == 4
    assert spec.l_s == 3
    assert spec.map_class(5) == 5
    assert spec.map_class(77) == OTHER_CLASS


def test_specialize_empty_histogram(profiles):
    with pytest.raises(EmptyHistogram):
        specialize_profile(profiles["cheap"], {}, 3)


def test_specialized_classify_other_is_first_filler(profiles):
    spec = specialize_profile(profiles["cheap"], {5: 9, 2: 8, 9: 7}, l_s=3)
    for oid in range(40):
        obj = make_object(oid, np.zeros(64), true_class=5)
        classes = classify(spec, obj, 0).classes()
        assert sorted(classes, key=str) == sorted([2, 5, 9, OTHER_CLASS], key=str)
        rank = classes.index(5)
        if rank > 0:  # OTHER absorbs the top of the residual mass
            assert classes[0] == OTHER_CLASS


def test_specialized_classify_out_of_set_class(profiles):
    spec = specialize_profile(profiles["cheap"], {5: 9, 2: 8}, l_s=2)
    obj = make_object(0, np.zeros(64), true_class=777)
    classes = classify(spec, obj, 0).classes()
    assert OTHER_CLASS in classes
    assert 777 not in classes


# -- registry file ----------------------------------------------------------

def test_registry_round_trip(profiles):
    spec = specialize_profile(profiles["cheap"], {5: 9, 2: 8}, l_s=2)
    reg = dict(profiles)
    reg[spec.profile_id] = spec
    text = format_profiles(reg)
    assert parse_profiles(text) == reg
    # canonical form is stable
    assert format_profiles(parse_profiles(text)) == text


def test_registry_rejects_bad_magic():
    with pytest.raises(DataError):
        parse_profiles("NOTPROF/9\n")


def test_registry_rejects_duplicate_id(profiles):
    text = format_profiles(profiles)
    block = text.split("\n\n")[1]
    with pytest.raises(DataError, match="duplicate"):
        parse_profiles(text + "\n" + block + "\n")


def test_default_profiles_costs():
    reg = make_default_profiles(1000)
    assert reg["gt"].cost_units == GT_COST == 58.0
    assert reg["cheap"].cost_units == pytest.approx(GT_COST / 8)
