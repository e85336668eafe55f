from __future__ import annotations

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metric_lab.metrics import (
    CountedMetric,
    DegenerateDistributionError,
    MetricDescriptor,
    check_metric_axioms,
    edit_distance,
    intrinsic_dim,
    lp_distance,
)


def test_lp_examples():
    assert lp_distance((0, 0), (3, 4), 2) == 5
    assert lp_distance((2, 4), (0, 6), math.inf) == 2
    assert lp_distance((2, 4), (0, 6), "inf") == 2
    assert lp_distance((1, -2), (4, 2), 1) == 7
    for p in (1, 2, math.inf):
        assert lp_distance((1.5, 2.5), (1.5, 2.5), p) == 0


def test_lp_rejects_bad_input():
    with pytest.raises(ValueError):
        lp_distance((1, 2), (1, 2, 3), 2)
    with pytest.raises(ValueError):
        lp_distance((), (), 1)
    with pytest.raises(ValueError):
        lp_distance((1,), (2,), 3)


def _lev_oracle(a, b):
    # plain recursive definition, memoised
    from functools import lru_cache

    @lru_cache(None)
    def go(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(go(i - 1, j) + 1, go(i, j - 1) + 1, go(i - 1, j - 1) + (a[i - 1] != b[j - 1]))

    return go(len(a), len(b))


def test_edit_distance_dna_anchor():
    q = "CAATCTGT"
    assert edit_distance(q, "AATCTGT") <= 2
    assert edit_distance(q, "AAAACGG") > 2
    assert edit_distance("", "abc") == 3
    assert edit_distance("abc", "") == 3
    assert edit_distance("kitten", "sitting") == 3


@given(st.text(alphabet="abc", max_size=8), st.text(alphabet="abc", max_size=8))
def test_edit_distance_matches_recursive_definition(a, b):
    assert edit_distance(a, b) == _lev_oracle(a, b)


vec = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=3, max_size=3)


@settings(max_examples=200)
@given(vec, vec, vec, st.sampled_from([1, 2, math.inf]))
def test_lp_axioms(u, v, w, p):
    duv, dvw, duw = lp_distance(u, v, p), lp_distance(v, w, p), lp_distance(u, w, p)
    assert duv >= 0
    assert duv == lp_distance(v, u, p)
    assert lp_distance(u, u, p) == 0
    assert duw <= (duv + dvw) * (1 + 1e-12) + 1e-9


def test_counted_metric_counts_and_resets():
    cm = CountedMetric(edit_distance)
    for _ in range(7):
        cm("ab", "ba")
    assert cm.count == 7
    cm.reset()
    assert cm.count == 0
    # wrapping a counter does not double count
    outer = CountedMetric(cm)
    outer("a", "b")
    assert outer.count == 1 and cm.count == 0


def test_intrinsic_dim_examples():
    assert intrinsic_dim([1, 3]) == 2.0
    with pytest.raises(DegenerateDistributionError):
        intrinsic_dim([2, 2, 2])
    with pytest.raises(ValueError):
        intrinsic_dim([1])


@given(st.lists(st.floats(0.1, 100), min_size=2, max_size=20), st.floats(0.01, 100))
def test_intrinsic_dim_scale_invariant(ds, lam):
    if np.var(ds) < 1e-6:
        return
    a = intrinsic_dim(ds)
    b = intrinsic_dim([lam * d for d in ds])
    assert b == pytest.approx(a, rel=1e-6)


def test_axioms_pass_for_true_metrics():
    rng = random.Random(0)
    pts = [(rng.random(), rng.random()) for _ in range(50)]
    assert check_metric_axioms(lambda a, b: lp_distance(a, b, 2), pts).ok
    words = ["".join(rng.choice("ab") for _ in range(rng.randint(0, 6))) for _ in range(50)]
    assert check_metric_axioms(edit_distance, words).ok


def test_axioms_flag_squared_euclidean():
    rep = check_metric_axioms(lambda a, b: (a - b) ** 2, [0, 1, 2])
    assert not rep.ok
    assert not rep.passed["triangle"]
    assert rep.passed["symmetry"] and rep.passed["identity"]
    i, j, k = rep.violations["triangle"]
    assert (i - k) ** 2 > (i - j) ** 2 + (j - k) ** 2


def test_axioms_need_three_objects():
    with pytest.raises(ValueError):
        check_metric_axioms(edit_distance, ["a", "b"])


def test_descriptor_validation():
    MetricDescriptor("Edit", "string")
    with pytest.raises(ValueError):
        MetricDescriptor("Edit", "vector", 3)
    with pytest.raises(ValueError):
        MetricDescriptor("L2", "string")
    with pytest.raises(ValueError):
        MetricDescriptor("L2", "vector", 0)
    with pytest.raises(ValueError):
        MetricDescriptor("L2", "vector", 2, n_d=0)
    with pytest.raises(ValueError):
        MetricDescriptor("cosine", "vector", 2)
