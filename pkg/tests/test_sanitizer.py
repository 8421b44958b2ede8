import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pssl.concepts import ConceptClass
from pssl.errors import DomainError, ResourceError
from pssl.mechanisms import softmax_probabilities
from pssl.sanitizer import (
    _compositions,
    blr_sanitize,
    candidate_count,
    deviations,
    max_query_error,
    query_value,
    sanitize_for_learner,
    synthetic_size,
)

T2 = ConceptClass.thresholds(2)


def test_query_value_example():
    assert query_value(T2[2], [0, 1, 2, 3]) == Fraction(1, 2)


def test_query_value_empty():
    with pytest.raises(DomainError):
        query_value(T2[2], [])


def test_synthetic_size_formula():
    assert synthetic_size(1, 0.25, 1.0) == math.ceil(16 * math.log(4))
    assert synthetic_size(1, 0.25, 0.8) == 18


def test_candidate_count_is_multisets():
    assert candidate_count(4, 3) == 20
    assert _compositions(3, 4).shape[0] == 20


def test_score_sensitivity_brute_force():
    # scaled score -dev/mhat changes by at most 1 between neighbors
    X = ConceptClass.xor_of(T2)
    mhat = 3
    comps = _compositions(mhat, 4)
    D = np.array([0, 1, 3, 3, 2])
    base = -deviations(comps, X.table, D) / mhat
    for i in range(D.size):
        for x in range(4):
            D2 = D.copy()
            D2[i] = x
            other = -deviations(comps, X.table, D2) / mhat
            assert np.abs(other - base).max() <= 1 + 1e-12


def test_deviation_matches_direct_formula():
    X = ConceptClass.xor_of(T2)
    D = np.array([0, 0, 2, 3])
    comps = _compositions(2, 4)
    dev = deviations(comps, X.table, D)
    for row, c in zip(dev, comps):
        pts = np.repeat(np.arange(4), c)
        direct = max(abs(int(q[D].sum()) * 2 - int(q[pts].sum()) * D.size) for q in X.table)
        assert row == direct


def test_exhaustive_mechanism_ratio_bound():
    # exact output distributions on neighbouring inputs differ by at most e^eps
    X = ConceptClass.xor_of(T2)
    mhat, eps = 3, 1.0
    comps = _compositions(mhat, 4)
    D = np.array([0, 1, 2, 3, 3, 1])

    def probs(db):
        return softmax_probabilities(eps, -deviations(comps, X.table, db) / mhat)

    p = probs(D)
    for i, x in itertools.product(range(D.size), range(4)):
        D2 = D.copy()
        D2[i] = x
        q = probs(D2)
        assert np.abs(np.log(p) - np.log(q)).max() <= eps + 1e-9


def test_output_size_and_support(rng):
    D = rng.integers(0, 8, 40)
    X = ConceptClass.xor_of(ConceptClass.thresholds(3))
    out = blr_sanitize(D, X, 0.4, 0.2, 1.0, rng, kappa=1.0, vc=1)
    assert out.points.size == out.target_size == synthetic_size(1, 0.4)
    assert np.all(np.diff(out.points) >= 0)
    assert out.support().size <= out.target_size
    assert not out.approximate
    assert out.privacy.epsilon == 1.0 and out.privacy.delta == 0.0


def test_walk_used_past_threshold(rng):
    D = rng.integers(0, 8, 40)
    X = ConceptClass.xor_of(ConceptClass.thresholds(3))
    out = blr_sanitize(D, X, 0.4, 0.2, 1.0, rng, vc=1, max_exhaustive=5, walk_steps=2000)
    assert out.approximate and out.points.size == out.target_size


def test_walk_budget(rng):
    X = ConceptClass.xor_of(ConceptClass.thresholds(3))
    with pytest.raises(ResourceError):
        blr_sanitize([0, 1], X, 0.4, 0.2, 1.0, rng, vc=1, max_exhaustive=1, walk_steps=10**9)


def test_sanitize_rejects_bad_input(rng):
    with pytest.raises(DomainError):
        blr_sanitize([], ConceptClass.xor_of(T2), 0.4, 0.2, 1.0, rng)
    with pytest.raises(DomainError):
        blr_sanitize([9], ConceptClass.xor_of(T2), 0.4, 0.2, 1.0, rng)


def test_sanitizer_is_accurate_on_concentrated_data():
    D = np.array([5] * 30 + [1] * 30)
    synth, support = sanitize_for_learner(D, ConceptClass.thresholds(3), 0.3, 0.2, 4.0, 11, kappa=0.5)
    assert max_query_error(ConceptClass.xor_of(ConceptClass.thresholds(3)), D, synth.points) <= 0.3
    assert set(support.tolist()) <= set(range(8))


@given(st.lists(st.integers(0, 3), min_size=1, max_size=12), st.integers(0, 2**31 - 1))
def test_property_output_is_sized_multiset(D, seed):
    out = blr_sanitize(D, ConceptClass.xor_of(T2), 0.5, 0.3, 1.0, seed, vc=1)
    assert out.points.size == synthetic_size(1, 0.5)
    assert out.points.min() >= 0 and out.points.max() < 4
