from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from linhyp.core import build, cluster_profile, clusters, count_conflict_free_sets, is_linear
from linhyp.errors import EdgeAbsent, EdgePresent, NoSuchCluster, StaleDescriptor, TooFewFreeEdges
from linhyp.switching import (
    SwitchKind,
    SwitchingDescriptor,
    apply,
    canonical_key,
    creation_count,
    creation_patterns,
    degree_switchings,
    displacement_ops,
    double_count_audit,
    forward_switchings,
    inverse,
    reverse_switchings,
)

PAIR = build(6, 3, [(1, 2, 3), (1, 2, 4)])
FREE2 = build(6, 3, [(1, 2, 3), (4, 5, 6)])


def test_forward_type4_example():
    sw = forward_switchings(PAIR, 4)
    assert sw.count == 200
    ds = list(sw)
    assert len(ds) == 200 == len(set(ds))
    for d in ds:
        assert cluster_profile(apply(PAIR, d)).h4 == 0


def test_forward_on_linear_is_empty():
    H = build(7, 3, [(1, 2, 3), (3, 4, 5)])
    for i in (1, 2, 3, 4):
        assert forward_switchings(H, i).count == 0
    with pytest.raises(NoSuchCluster):
        forward_switchings(H, 4, strict=True)


def test_reverse_type4_example():
    sw = reverse_switchings(FREE2, 4)
    assert sw.count == 180 == len(list(sw))


def test_reverse_errors_and_r3_type1():
    with pytest.raises(TooFewFreeEdges):
        reverse_switchings(build(6, 3, [(1, 2, 3), (1, 2, 4), (4, 5, 6)]), 2)
    H = build(9, 3, [(1, 2, 3), (4, 5, 6), (7, 8, 9)])
    assert reverse_switchings(H, 1).count == 0
    assert creation_count(3, 1) == 0


def test_round_trip_and_inverse_closure():
    rev = set(reverse_switchings(apply(PAIR, next(iter(forward_switchings(PAIR, 4)))), 4))
    for d in forward_switchings(PAIR, 4):
        H2 = apply(PAIR, d)
        assert apply(H2, inverse(d)) == PAIR
        if H2 == apply(PAIR, next(iter(forward_switchings(PAIR, 4)))):
            assert inverse(d) in rev
    for d in reverse_switchings(FREE2, 4):
        H2 = apply(FREE2, d)
        assert apply(H2, inverse(d)) == FREE2
        assert inverse(d) in set(forward_switchings(H2, 4))


def test_inverse_closure_exhaustive_small():
    """Every forward descriptor's inverse appears among the image's reverse switchings."""
    H = build(7, 3, [(1, 2, 3), (1, 2, 4), (5, 6, 7)])
    cache = {}
    for d in forward_switchings(H, 4):
        H2 = apply(H, d)
        if H2 not in cache:
            cache[H2] = set(reverse_switchings(H2, 4))
        assert inverse(d) in cache[H2]


def test_stale_descriptors():
    d = next(iter(forward_switchings(PAIR, 4)))
    with pytest.raises(StaleDescriptor):
        apply(FREE2, d)
    # added edge shares a pair with a kept edge
    H = build(8, 3, [(1, 2, 3), (1, 2, 4), (6, 7, 8)])
    bad = SwitchingDescriptor(SwitchKind.TYPE4, ((1, 2, 3), (1, 2, 4)), ((1, 6, 7), (2, 3, 5)))
    with pytest.raises(StaleDescriptor):
        apply(H, bad)


def _brute_patterns(T, r, kind):
    sets = list(combinations(T, r))
    k = 2 if kind == "Type4" else 3
    out = 0
    for es in combinations(sets, k):
        cls = clusters(build(max(T), r, es))
        if len(cls) == 1 and cls[0].kind == kind and len(cls[0].edge_indices) == k:
            out += 1
    return out


@pytest.mark.parametrize("r", [3, 4])
@pytest.mark.parametrize("i", [1, 2, 3, 4])
def test_creation_count_matches_brute_force(r, i):
    t = 2 * r - 2 if i == 4 else 3 * r - 4
    T = tuple(range(1, t + 1))
    assert _brute_patterns(T, r, f"Type{i}") == creation_count(r, i)
    assert len(list(creation_patterns(T, r, i))) == creation_count(r, i)


@pytest.mark.parametrize("r", [3, 4])
def test_one_conflict_creation_count(r):
    t = 2 * r - 2
    T = tuple(range(1, t + 1))
    x, y = 1, 2
    pats = list(creation_patterns(T, r, 4, (x, y)))
    assert len(pats) == creation_count(r, 4, one_conflict=True)
    for a, b in pats:
        assert not ({x, y} <= set(a)) and not ({x, y} <= set(b))


def test_degree_switching_examples():
    H = build(5, 3, [(1, 2, 3)])
    assert degree_switchings(H, 1, "down").count == 4
    assert degree_switchings(H, 4, "down").count == 0
    up = degree_switchings(H, 4, "up")
    assert up.count <= 6
    ups = list(up)
    assert len(ups) == up.count
    assert all(4 in d.added[0] for d in ups)
    assert all(1 not in d.added[0] for d in degree_switchings(H, 1, "down"))


def test_displacement_examples():
    H = build(5, 3, [(1, 2, 3)])
    assert displacement_ops(H, (1, 2, 3), "displace").count == 9
    with pytest.raises(EdgeAbsent):
        displacement_ops(H, (1, 2, 4), "displace")
    assert displacement_ops(build(5, 3, []), (1, 2, 3), "replace").count == 0
    H = build(5, 3, [(1, 2, 3), (1, 4, 5)])
    reps = list(displacement_ops(H, (2, 4, 5), "replace"))
    assert len(reps) == 2
    for d in reps:
        assert d.legal == is_linear(apply(H, d))
    with pytest.raises(EdgePresent):
        displacement_ops(H, (1, 2, 3), "replace")
    prot = displacement_ops(H, (2, 4, 5), "replace", protected=[(1, 2, 3)])
    assert prot.count == 1


def test_displacement_count_is_conflict_free_count():
    H = build(8, 3, [(1, 2, 3), (3, 4, 5), (6, 7, 8)])
    R = build(8, 3, [(3, 4, 5), (6, 7, 8)])
    assert displacement_ops(H, (1, 2, 3)).count == count_conflict_free_sets(R, 3, forbidden=(1, 2, 3))


@pytest.mark.parametrize("H,i", [
    (build(9, 3, [(1, 2, 3), (1, 2, 4), (5, 6, 7)]), 4),
    (build(9, 3, [(1, 2, 3), (1, 2, 4), (2, 3, 5)]), 2),
    (build(9, 3, [(1, 2, 3), (1, 2, 4), (1, 2, 5)]), 3),
])
def test_profile_and_degree_contract(H, i):
    before = cluster_profile(H).as_tuple()
    degs = H.degrees()
    sw = forward_switchings(H, i)
    assert sw.count == len(list(sw)) > 0
    for d in sw:
        H2 = apply(H, d)
        after = cluster_profile(H2).as_tuple()
        if all(len(set(a) & set(b)) <= 1 for a in d.added for b in d.added if a != b):
            want = list(before)
            want[i - 1] -= 1
            assert list(after) == want
        assert all(b - a <= 3 for a, b in zip(degs, H2.degrees()))


def test_forward_count_type4_is_product_of_sequential_counts():
    H = build(9, 3, [(1, 2, 3), (1, 2, 4), (5, 6, 7), (5, 6, 8)])
    total = 0
    for c in clusters(H):
        rest = build(9, 3, [H.edges[j] for j in range(H.m) if j not in c.edge_indices])
        for first in combinations(range(1, 10), 3):
            if all(len(set(first) & set(e)) <= 1 for e in rest.edges):
                total += count_conflict_free_sets(rest.with_edges([first]), 3)
    assert forward_switchings(H, 4).count == total


def test_audit_examples():
    rep = double_count_audit(8, 3, 3, 4, (0, 0, 0, 1))
    assert rep.equal and rep.sandwich_ok
    assert rep.forward_total == rep.reverse_total == 14515200
    empty = double_count_audit(6, 3, 2, 2, (0, 1, 0, 0))
    assert empty.forward_total == empty.reverse_total == 0


def test_audit_to_json_uses_strings():
    js = double_count_audit(8, 3, 3, 4, (0, 0, 0, 1)).to_json()
    assert js["forward_total"] == "14515200"
    assert set(js["ratio_bounds"]) == {"lo", "observed", "hi"}


@settings(max_examples=40, deadline=None)
@given(st.permutations(range(1, 9)))
def test_canonical_key_is_relabeling_invariant(perm):
    edges = [(1, 2, 3), (1, 2, 4), (3, 5, 6)]
    H = build(8, 3, edges)
    G = build(8, 3, [tuple(perm[v - 1] for v in e) for e in edges])
    assert canonical_key(H.masks) == canonical_key(G.masks)


def test_degree_inverse_closure():
    H = build(9, 3, [(1, 2, 3), (1, 2, 4), (1, 5, 6), (7, 8, 9)])
    downs = list(degree_switchings(H, 1, "down"))
    assert downs
    for d in downs:
        H2 = apply(H, d)
        assert H2.degrees()[0] == H.degrees()[0] - len(d.removed)
        assert apply(H2, inverse(d)) == H
        assert inverse(d) in set(degree_switchings(H2, 1, "up"))
