import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pssl.audit import (
    MAX_SUBSET_OUTCOMES,
    clopper_pearson,
    constant_mechanism,
    epsilon_from_counts,
    estimate_epsilon,
    neighbors,
    randomized_response,
)
from pssl.data import PartiallyLabeledDatabase
from pssl.errors import DomainError, ResourceError


def test_clopper_pearson_edges():
    assert clopper_pearson(0, 10)[0] == 0.0
    assert clopper_pearson(10, 10)[1] == 1.0
    # zero successes: upper bound solves (1 - p)^n = alpha/2
    assert clopper_pearson(0, 100)[1] == pytest.approx(1 - 0.025 ** (1 / 100))
    lo, hi = clopper_pearson(50, 100)
    assert lo < 0.5 < hi


def test_neighbors_replace_one_record():
    pair = neighbors(np.array([1, 2, 3]), 1, 9)
    assert pair.d1.tolist() == [1, 2, 3] and pair.d2.tolist() == [1, 9, 3]
    db = PartiallyLabeledDatabase([0, 1], [1, 0])
    p2 = neighbors(db, 0, (3, 1))
    assert p2.d2.points.tolist() == [3, 1] and p2.diff_index == 0
    assert neighbors((1, 2), 0, 5).d2 == (5, 2)
    with pytest.raises(DomainError):
        neighbors([1], 3, 0)


def test_constant_mechanism_audits_to_zero():
    rep = estimate_epsilon(constant_mechanism(), neighbors([0], 0, 1), 0.0, 2000, seed=0)
    assert rep.epsilon_hat == 0.0 and rep.epsilon_point == 0.0


def test_randomized_response_estimate():
    M = randomized_response(1.0)
    rep = estimate_epsilon(M, neighbors([0], 0, 1), 0.0, 100_000, seed=1)
    assert 0.7 <= rep.epsilon_hat <= 1.0
    assert rep.epsilon_hat <= rep.epsilon_point
    assert rep.epsilon_point == pytest.approx(1.0, abs=0.06)
    assert rep.slack == pytest.approx(rep.epsilon_point - rep.epsilon_hat)


def test_audit_is_deterministic_and_serializable():
    M = randomized_response(0.5)
    pair = neighbors([0], 0, 1)
    a = estimate_epsilon(M, pair, 0.0, 3000, seed=4)
    b = estimate_epsilon(M, pair, 0.0, 3000, seed=4)
    assert a.to_json() == b.to_json()
    json.dumps(a.to_json())
    assert a.csv_row()[0] == M.name


def test_min_trials():
    with pytest.raises(DomainError):
        estimate_epsilon(constant_mechanism(), neighbors([0], 0, 1), 0.0, 10, seed=0)


def test_coupled_identical_inputs_match_exactly():
    M = randomized_response(1.0)
    rep = estimate_epsilon(M, neighbors([0], 0, 0), 0.0, 1000, seed=2, coupled=True)
    assert rep.counts1 == rep.counts2 and rep.epsilon_point == 0.0


def test_infinite_witness_plug_in():
    eps, point, witness, direction = epsilon_from_counts({"a": 10}, {"b": 10}, confidence=None)
    assert math.isinf(eps) and math.isinf(point) and witness in (("a",), ("b",))


def test_delta_absorbs_small_events():
    c1, c2 = {"a": 9, "b": 1}, {"a": 10}
    assert math.isinf(epsilon_from_counts(c1, c2, 0.0, None)[0])
    assert epsilon_from_counts(c1, c2, 0.1, None)[0] == 0.0


def test_subset_scan_dominates_singletons():
    # with delta = 0 the best ratio is always a singleton; delta > 0 rewards larger events
    c1 = {"a": 30, "b": 30, "c": 40}
    c2 = {"a": 15, "b": 15, "c": 70}
    assert epsilon_from_counts(c1, c2, 0.0, None, "subset")[0] == epsilon_from_counts(c1, c2, 0.0, None)[0]
    single = epsilon_from_counts(c1, c2, 0.1, None, "singleton")[0]
    subset = epsilon_from_counts(c1, c2, 0.1, None, "subset")
    assert single == pytest.approx(math.log(0.6 / 0.4))
    assert subset[0] == pytest.approx(math.log(0.5 / 0.3)) and subset[2] == ("a", "b")


def test_subset_scan_limit():
    c = {str(i): 1 for i in range(MAX_SUBSET_OUTCOMES + 1)}
    with pytest.raises(ResourceError):
        epsilon_from_counts(c, c, events="subset")
    with pytest.raises(DomainError):
        epsilon_from_counts(c, c, events="pairs")


counts = st.dictionaries(st.sampled_from("abcd"), st.integers(1, 50), min_size=1)


@given(counts, counts, st.sampled_from([None, 0.95]))
def test_property_symmetric_and_nonnegative(c1, c2, conf):
    a = epsilon_from_counts(c1, c2, 0.0, conf)
    b = epsilon_from_counts(c2, c1, 0.0, conf)
    assert a[0] == b[0] and a[0] >= 0
    if conf is not None:
        assert a[0] <= epsilon_from_counts(c1, c2, 0.0, None)[0] + 1e-12
