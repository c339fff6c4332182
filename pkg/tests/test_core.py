from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from linhyp.core import (
    Regime,
    build,
    cluster_profile,
    clusters,
    codegree,
    count_conflict_free_sets,
    count_one_conflict_sets,
    dumps_lh,
    is_linear,
    loads_lh,
    property_report,
    thresholds,
)
from linhyp.errors import DuplicateEdge, LoadError, TooFewVertices, VertexOutOfRange, WrongEdgeSize


def test_build_examples():
    assert build(5, 3, [{1, 2, 3}]).m == 1
    with pytest.raises(DuplicateEdge):
        build(5, 3, [{1, 2, 3}, {1, 2, 3}])
    with pytest.raises(VertexOutOfRange):
        build(4, 3, [{1, 2, 5}])
    with pytest.raises(WrongEdgeSize):
        build(5, 3, [{1, 2}])


def test_build_is_canonical():
    H = build(6, 3, [(4, 5, 6), (3, 1, 2)])
    assert H.edges == ((1, 2, 3), (4, 5, 6))
    assert H == build(6, 3, [[1, 2, 3], [6, 5, 4]])


def test_codegree_examples():
    assert codegree(build(5, 3, [{1, 2, 3}]), {1}) == 1
    assert codegree(build(5, 3, [{1, 2, 3}, {1, 2, 4}]), {1, 2}) == 2
    assert codegree(build(5, 3, [{1, 2, 3}]), {4, 5}) == 0


def test_is_linear_examples():
    assert is_linear(build(5, 3, [{1, 2, 3}, {3, 4, 5}]))
    assert not is_linear(build(5, 3, [{1, 2, 3}, {1, 2, 4}]))
    assert is_linear(build(5, 3, []))
    assert is_linear(build(5, 3, [{1, 2, 3}]))


@pytest.mark.parametrize("edges, kind", [
    ([{1, 2, 3, 4}, {1, 2, 5, 6}, {3, 4, 7, 8}], "Type1"),
    ([{1, 2, 3, 4}, {1, 2, 5, 6}, {2, 3, 7, 8}], "Type2"),
    ([{1, 2, 3, 4}, {1, 2, 5, 6}, {1, 2, 7, 8}], "Type3"),
])
def test_three_edge_kinds(edges, kind):
    cls = clusters(build(10, 4, edges))
    assert len(cls) == 1
    assert cls[0].kind == kind
    assert cls[0].vertex_span == 8


def test_type4_and_other():
    cls = clusters(build(5, 3, [{1, 2, 3}, {1, 2, 4}]))
    assert [(c.kind, c.vertex_span) for c in cls] == [("Type4", 4)]
    assert cluster_profile(build(8, 3, [{1, 2, 3}, {1, 2, 4}, {5, 6, 7}, {5, 6, 8}])).as_tuple() == (0, 0, 0, 2, 0)
    assert cluster_profile(build(6, 4, [{1, 2, 3, 4}, {1, 2, 3, 5}])).as_tuple() == (0, 0, 0, 0, 1)


def test_property_report_examples():
    H = build(20, 3, [{1, 2, 3}, {4, 5, 6}])
    ts = thresholds(20, 3, 2)
    rep = property_report(H, ts.regime, ts)
    assert all(rep.properties.values()) and rep.in_plusplus
    bad = build(6, 4, [{1, 2, 3, 4}, {1, 2, 3, 5}])
    ts = thresholds(6, 4, 2)
    rep = property_report(bad, ts.regime, ts)
    assert not rep.properties["a"] and not rep.in_plus


def test_sparse_cap_on_type4():
    edges = [(1, 2, 3), (1, 2, 4), (5, 6, 7), (5, 6, 8), (9, 10, 11), (9, 10, 12)]
    H = build(200, 3, edges)
    ts = thresholds(200, 3, 6, Regime.SPARSE)
    rep = property_report(H, Regime.SPARSE, ts)
    assert rep.properties["d"] is False
    assert rep.in_plusplus == rep.in_plus


def test_conflict_free_examples():
    H = build(5, 3, [{1, 2, 3}])
    assert count_conflict_free_sets(H, 3) == 3
    assert count_conflict_free_sets(H, 3, forbidden={1, 4, 5}) == 2
    assert count_conflict_free_sets(build(7, 3, []), 4) == 35


def test_one_conflict_examples():
    assert count_one_conflict_sets(build(6, 3, [])) == 0
    assert count_one_conflict_sets(build(6, 3, [{1, 2, 3}])) == 9
    assert count_one_conflict_sets(build(6, 3, [{1, 2, 3}, {4, 5, 6}])) == 0
    with pytest.raises(TooFewVertices):
        count_one_conflict_sets(build(3, 3, [{1, 2, 3}]))


def _brute_cf(H, t, forbidden=None):
    out = 0
    for T in combinations(range(1, H.n + 1), t):
        if forbidden is not None and set(T) == set(forbidden):
            continue
        if all(len(set(T) & set(e)) <= 1 for e in H.edges):
            out += 1
    return out


def _brute_one(H):
    t = 2 * H.r - 2
    out = 0
    for T in combinations(range(1, H.n + 1), t):
        hits = [len(set(T) & set(e)) for e in H.edges]
        if max(hits, default=0) <= 2 and hits.count(2) == 1:
            out += 1
    return out


@st.composite
def small_hypergraphs(draw, n_max=8):
    r = draw(st.integers(2, 4))
    n = draw(st.integers(r, n_max))
    all_sets = list(combinations(range(1, n + 1), r))
    edges = draw(st.lists(st.sampled_from(all_sets), unique=True, max_size=6))
    return build(n, r, edges)


@settings(max_examples=80, deadline=None)
@given(small_hypergraphs(), st.integers(1, 8))
def test_conflict_free_matches_brute_force(H, t):
    if t > H.n:
        return
    assert count_conflict_free_sets(H, t) == _brute_cf(H, t)


@settings(max_examples=60, deadline=None)
@given(small_hypergraphs())
def test_one_conflict_matches_brute_force(H):
    if H.n < 2 * H.r - 2:
        return
    assert count_one_conflict_sets(H) == _brute_one(H)


@settings(max_examples=100, deadline=None)
@given(small_hypergraphs())
def test_codegree_invariants(H):
    assert sum(codegree(H, {v}) for v in range(1, H.n + 1)) == H.r * H.m
    for e in H.edges:
        assert codegree(H, e[:1]) >= codegree(H, e[:2]) >= codegree(H, e)


@settings(max_examples=100, deadline=None)
@given(small_hypergraphs())
def test_linear_iff_no_clusters(H):
    assert is_linear(H) == (clusters(H) == []) == cluster_profile(H).is_zero()


@settings(max_examples=60, deadline=None)
@given(small_hypergraphs(), st.integers(1, 5))
def test_property_report_monotone_in_caps(H, by):
    if H.m == 0:
        return
    ts = thresholds(H.n, H.r, H.m)
    lo = property_report(H, ts.regime, ts)
    hi = property_report(H, ts.regime, ts.raised(by))
    assert all(hi.properties[k] or not v for k, v in lo.properties.items())
    assert not lo.in_plusplus or lo.in_plus


@pytest.mark.parametrize("r", [3, 4])
def test_classification_completeness(r):
    """Every 2/3-edge component with overlaps <= 2 and full span gets a Type label."""
    n = 3 * r - 4 + 1
    sets = list(combinations(range(1, n + 1), r))
    base = sets[0]
    seen = 0
    for k in (2, 3):
        for rest in combinations(sets[1:], k - 1):
            H = build(n, r, (base, *rest))
            cls = clusters(H)
            if len(cls) != 1 or len(cls[0].edge_indices) != k:
                continue
            if any(len(set(a) & set(b)) > 2 for a, b in combinations(H.edges, 2)):
                continue
            floor = 2 * r - 2 if k == 2 else 3 * r - 4
            if cls[0].vertex_span >= floor:
                assert cls[0].kind != "Other"
                seen += 1
    assert seen > 0


def test_lh_round_trip_and_errors():
    H = build(7, 3, [(1, 2, 3), (3, 4, 5)])
    assert loads_lh(dumps_lh(H)) == H
    assert loads_lh("# c\n7 3 1\n1 2 3") == build(7, 3, [(1, 2, 3)])
    for bad, line in [("7 3 1\n1 3 2\n", 2), ("7 3 2\n1 2 3\n", 3), ("7 3 1\n1  2 3\n", 2), ("7 3 1\n1 2 9\n", 2)]:
        with pytest.raises(LoadError, match=f"line {line}"):
            loads_lh(bad)
