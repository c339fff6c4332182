import csv
import os
from fractions import Fraction
from math import comb

import pytest

from linhyp.core import build
from linhyp.errors import BudgetExceeded, NotLinearK, OutOfRange
from linhyp.exact import (
    count_all,
    count_linear,
    count_linear_bruteforce,
    count_linear_containing,
    count_linear_vector,
    count_small_unions,
    edge_set_probability,
    exact_binomial_linearity,
    profile_census,
)

from conftest import ROOT


def test_count_all():
    assert count_all(5, 3, 2) == 45
    assert count_all(9, 3, 0) == 1
    assert count_all(6, 3, 1) == 20


def test_count_linear_examples():
    assert count_linear(5, 3, 2) == 15
    assert count_linear(8, 4, 1) == comb(8, 4)
    assert count_linear(5, 3, 0) == 1


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_dfs_matches_subset_filter(n, m):
    if m > comb(n, 3):
        return
    assert count_linear(n, 3, m) == count_linear_bruteforce(n, 3, m)


def test_vector_matches_pointwise():
    vec = count_linear_vector(7, 3)
    assert vec[:4] == [count_linear(7, 3, m) for m in range(4)]
    assert vec[7] == 30  # Fano planes
    assert len(vec) == 8


def test_threads_do_not_change_counts():
    assert count_linear(8, 3, 4, threads=1) == count_linear(8, 3, 4, threads=3)


def test_census():
    tab = profile_census(5, 3, 2)
    assert tab.total == 45
    got = {p.as_tuple(): v for p, v in tab.by_profile().items()}
    assert got == {(0, 0, 0, 0, 0): 15, (0, 0, 0, 1, 0): 30}
    tab = profile_census(6, 3, 3)
    assert sum(tab.counts.values()) == comb(20, 3)
    assert tab.by_profile()[min(tab.by_profile(), key=lambda p: p.as_tuple())] == count_linear(6, 3, 3)


def test_census_budget():
    with pytest.raises(BudgetExceeded):
        profile_census(9, 3, 6, cap=1000)


def test_count_linear_containing():
    K = build(5, 3, [(1, 2, 3)])
    assert count_linear_containing(5, 3, 2, K) == 3
    assert count_linear_containing(6, 3, 2, build(6, 3, [(1, 2, 3)])) == 10
    K2 = build(7, 3, [(1, 2, 3), (3, 4, 5)])
    assert count_linear_containing(7, 3, 2, K2) == 1
    with pytest.raises(NotLinearK):
        count_linear_containing(5, 3, 2, build(5, 3, [(1, 2, 3), (1, 2, 4)]))


def test_edge_set_probability_bound():
    for N, m, t in [(10, 3, 2), (35, 7, 4), (100, 50, 10)]:
        p = edge_set_probability(N, m, t)
        assert p <= Fraction(m, N) ** t


def test_count_small_unions():
    # two 3-sets of [5] sharing >= 2 vertices: 10 * 6 / 2 = 30
    assert count_small_unions(5, 3, 2, 2) == 30


def test_binomial_linearity():
    assert exact_binomial_linearity(5, 3, 0).probability == 1.0
    assert exact_binomial_linearity(5, 3, 1).probability == 0.0
    p = Fraction(1, 10)
    vec = count_linear_vector(5, 3)
    want = sum(c * p**m * (1 - p) ** (10 - m) for m, c in enumerate(vec))
    res = exact_binomial_linearity(5, 3, p)
    assert res.exact == want and not res.truncated
    with pytest.raises(OutOfRange):
        exact_binomial_linearity(5, 3, 2)


def test_golden_linear_counts():
    with open(os.path.join(ROOT, "golden", "linear_counts.csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert rows
    for row in rows:
        n, r, m = int(row["n"]), int(row["r"]), int(row["m"])
        if comb(comb(n, r), m) <= 50_000:
            assert count_linear_bruteforce(n, r, m) == int(row["linear_count"])
        if n <= 8:
            assert count_linear(n, r, m) == int(row["linear_count"])


def test_golden_census():
    with open(os.path.join(ROOT, "golden", "census.csv")) as fh:
        rows = list(csv.DictReader(fh))
    for (n, r, m) in {(int(x["n"]), int(x["r"]), int(x["m"])) for x in rows if int(x["n"]) <= 6}:
        tab = profile_census(n, r, m)
        want = {tuple(int(x[k]) for k in ("h1", "h2", "h3", "h4", "other", "in_plus", "in_plusplus")): int(x["count"])
                for x in rows if (int(x["n"]), int(x["r"]), int(x["m"])) == (n, r, m)}
        got = {(*row[:5], int(row[5]), int(row[6])): row[7] for row in tab.rows()}
        assert got == want
