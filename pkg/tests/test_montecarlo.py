import math
from collections import Counter
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from linhyp.core import build, is_linear
from linhyp.errors import AcceptanceTooLow, OutOfRange, ZeroTrials
from linhyp.exact import count_linear, count_linear_containing, exact_binomial_linearity
from linhyp.montecarlo import (
    Colex,
    TrialStreams,
    bernoulli_estimate,
    estimate_conditional_moments,
    estimate_containment,
    estimate_linearity,
    estimate_profile_distribution,
    sample_binomial,
    sample_fixed,
    sample_many,
    trial_generator,
    wilson_interval,
)


def test_sampler_edges():
    assert sample_fixed(5, 3, 10, seed=1).m == 10
    assert sample_fixed(5, 3, 0, seed=1).m == 0
    assert sample_binomial(6, 3, 0, seed=2).m == 0
    assert sample_binomial(6, 3, 1, seed=2).m == 20
    assert sample_fixed(50, 3, 20, seed=9) == sample_fixed(50, 3, 20, seed=9)
    assert sample_fixed(50, 3, 20, seed=9) != sample_fixed(50, 3, 20, seed=10)
    with pytest.raises(OutOfRange):
        sample_fixed(5, 3, 11, seed=0)
    with pytest.raises(OutOfRange):
        sample_binomial(5, 3, 1.5, seed=0)


def test_stream_reset_matches_fresh_generator():
    ts = TrialStreams(77)
    for t in (0, 5, 123456):
        assert np.array_equal(ts.at(t).integers(0, 2**40, 8), trial_generator(77, t).integers(0, 2**40, 8))


def test_sample_many_matches_single_trials():
    got = list(sample_many(40, 3, seed=5, count=4, m=12))
    for t, H in got:
        assert H == sample_fixed(40, 3, 12, seed=5, trial=t)
    got = list(sample_many(20, 3, seed=5, count=3, p=0.01))
    for t, H in got:
        assert H == sample_binomial(20, 3, 0.01, seed=5, trial=t)


@pytest.mark.parametrize("n,r", [(5, 3), (7, 2), (9, 4), (12, 1), (30, 5)])
def test_colex_is_a_bijection(n, r):
    cx = Colex(n, r)
    N = comb(n, r)
    rows = cx.unrank(np.arange(N))
    sets = [tuple(x) for x in rows.tolist()]
    assert sorted(sets) == sorted(combinations(range(1, n + 1), r))
    assert [cx.rank(s) for s in sets] == list(range(N))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, comb(1000, 3) - 1))
def test_colex_round_trip_large(k):
    cx = Colex(1000, 3)
    row = cx.unrank(np.array([k]))[0]
    assert cx.rank(row.tolist()) == k
    assert all(a < b for a, b in zip(row, row[1:]))


def test_fixed_model_uniform_chi_square():
    """All C(4,2)=6 two-edge 3-graphs on [4] equally likely."""
    trials = 6000
    counts = Counter(sample_fixed(4, 3, 2, seed=31, trial=t).edges for t in range(trials))
    assert len(counts) == 6
    exp = trials / 6
    chi2 = sum((c - exp) ** 2 / exp for c in counts.values())
    assert chi2 < 20.5  # 5 dof, p ~ 0.001


def test_binomial_model_edge_count():
    ms = [sample_binomial(8, 3, 0.25, seed=3, trial=t).m for t in range(3000)]
    mean = sum(ms) / len(ms)
    assert abs(mean - 14) < 4 * math.sqrt(56 * 0.25 * 0.75 / 3000)


def test_estimates_small_m():
    for m in (0, 1):
        est = estimate_linearity(10, 3, m=m, trials=200, seed=1)
        assert est.point == 1.0 and est.stderr == 0.0
        assert est.ci95[0] < 1.0 <= est.ci95[1]
    with pytest.raises(ZeroTrials):
        estimate_linearity(10, 3, m=2, trials=0, seed=1)


def test_estimates_are_thread_invariant():
    a = estimate_linearity(30, 3, m=6, trials=20000, seed=4, threads=1)
    b = estimate_linearity(30, 3, m=6, trials=20000, seed=4, threads=3)
    assert a == b
    pa = estimate_profile_distribution(30, 3, 6, 5000, seed=4, threads=1)
    pb = estimate_profile_distribution(30, 3, 6, 5000, seed=4, threads=2)
    assert pa == pb


def _within(est, truth, k=4.0):
    se = max(est.stderr, 1e-12)
    return abs(est.point - truth) <= k * se


def test_linearity_matches_exact_oracle():
    est = estimate_linearity(6, 3, m=3, trials=40000, seed=8)
    truth = count_linear(6, 3, 3) / comb(20, 3)
    assert _within(est, truth)
    est = estimate_linearity(6, 3, p=0.1, trials=40000, seed=8)
    assert _within(est, exact_binomial_linearity(6, 3, Fraction(1, 10)).probability)


def test_profile_distribution_matches_census():
    from linhyp.exact import profile_census

    pe = estimate_profile_distribution(6, 3, 2, 30000, seed=12)
    tab = profile_census(6, 3, 2)
    for prof, cnt in tab.by_profile().items():
        assert _within(pe.profiles[prof], cnt / tab.total)
    assert pe.plusplus.point <= pe.plus.point


def test_profile_m1():
    pe = estimate_profile_distribution(20, 3, 1, 100, seed=1)
    assert len(pe.profiles) == 1
    (est,) = pe.profiles.values()
    assert est.point == 1.0 and pe.plus.point == 1.0


def test_containment_matches_exact():
    K = build(6, 3, [(1, 2, 3)])
    est = estimate_containment(6, 3, 2, K, 40000, seed=3)
    truth = count_linear_containing(6, 3, 2, K) / count_linear(6, 3, 2)
    assert _within(est, truth)
    assert estimate_containment(6, 3, 2, build(6, 3, []), 100, seed=3).point == 1.0


def test_conditional_moments():
    cm = estimate_conditional_moments(7, 3, 0.1, 40000, seed=2)
    from linhyp.exact import count_linear_vector

    p = 0.1
    w = [c * p**m * (1 - p) ** (35 - m) for m, c in enumerate(count_linear_vector(7, 3))]
    Z = sum(w)
    mean = sum(m * x for m, x in enumerate(w)) / Z
    assert _within(cm.mean, mean)
    assert cm.acceptance_rate == pytest.approx(Z, abs=4 * math.sqrt(Z * (1 - Z) / 40000))
    assert estimate_conditional_moments(7, 3, 0, 100, seed=2).mean.point == 0
    with pytest.raises(AcceptanceTooLow):
        estimate_conditional_moments(7, 3, 0.9, 2000, seed=2)


def test_interval_helpers():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0 and 0 < hi < 0.05
    est = bernoulli_estimate(30, 100, 0)
    assert est.ci95[0] < 0.3 < est.ci95[1]
    assert est.to_json()["successes"] == 30
