"""Executable switchings on r-graphs.

Forward Type-i switchings delete a cluster and insert new edges one at a
time, each conflict-free against the hypergraph built so far.  Reverse
switchings delete link-free edges and create a cluster inside a target set.
Counts are exact; streams yield every descriptor.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations, permutations
from math import comb, factorial
from typing import Callable, Iterable, Iterator, Sequence

from .core import (
    TYPE1,
    TYPE2,
    TYPE3,
    TYPE4,
    Cluster,
    ClusterProfile,
    Hypergraph,
    _from_canonical,
    classify,
    clusters,
    count_conflict_free_sets,
    count_one_conflict_sets,
    is_linear,
    mask_vertices,
    overlaps,
    popcount,
    profile_of,
    vertex_mask,
)
from .errors import (
    BudgetExceeded,
    EdgeAbsent,
    EdgePresent,
    InputError,
    NoSuchCluster,
    OutOfRange,
    StaleDescriptor,
    TooFewFreeEdges,
    VertexOutOfRange,
)
from .exact import CENSUS_CAP, rsets

KIND_NAME = {1: TYPE1, 2: TYPE2, 3: TYPE3, 4: TYPE4}


class SwitchKind(str, Enum):
    TYPE1 = "Type1"
    TYPE2 = "Type2"
    TYPE3 = "Type3"
    TYPE4 = "Type4"
    TYPE1_REV = "Type1-reverse"
    TYPE2_REV = "Type2-reverse"
    TYPE3_REV = "Type3-reverse"
    TYPE4_REV = "Type4-reverse"
    DEGREE_DOWN = "DegreeDown"
    DEGREE_UP = "DegreeUp"
    DISPLACEMENT = "Displacement"
    REPLACEMENT = "Replacement"


_FORWARD = {1: SwitchKind.TYPE1, 2: SwitchKind.TYPE2, 3: SwitchKind.TYPE3, 4: SwitchKind.TYPE4}
_REVERSE = {1: SwitchKind.TYPE1_REV, 2: SwitchKind.TYPE2_REV, 3: SwitchKind.TYPE3_REV, 4: SwitchKind.TYPE4_REV}
_KIND_OF = {**{v: k for k, v in _FORWARD.items()}, **{v: k for k, v in _REVERSE.items()}}

Edge = tuple[int, ...]


@dataclass(frozen=True)
class SwitchingDescriptor:
    kind: SwitchKind
    removed: tuple[Edge, ...]
    added: tuple[Edge, ...]
    anchor: int | Edge | None = None
    target_set: tuple[int, ...] | None = None
    legal: bool | None = None


class Switchings:
    """An exact count plus a lazily produced descriptor stream."""

    def __init__(self, count: int, stream: Callable[[], Iterator[SwitchingDescriptor]]):
        self.count = count
        self._stream = stream

    def __iter__(self) -> Iterator[SwitchingDescriptor]:
        return self._stream()

    def __len__(self) -> int:
        return self.count


def _check_kind(i: int) -> int:
    if i not in KIND_NAME:
        raise OutOfRange(f"switching kind must be 1..4, got {i}")
    return i


def n_edges_of(i: int) -> int:
    return 2 if i == 4 else 3


def span_size(r: int, i: int) -> int:
    return 2 * r - 2 if i == 4 else 3 * r - 4


def creation_count(r: int, i: int, one_conflict: bool = False) -> int:
    """Number of kind-i clusters spanning a fixed target set.

    For Type 4 with one_conflict=True the target meets one outside edge in a
    pair {x, y}; only clusters with x and y split between the two private parts
    remain clusters after insertion.
    """
    _check_kind(i)
    if i == 1:
        return comb(3 * r - 4, r) * comb(r, 4) * 3 * comb(2 * r - 4, r - 2)
    if i == 2:
        return 3 * comb(3 * r - 4, r) * comb(r, 3) * comb(2 * r - 4, r - 2)
    if i == 3:
        return comb(3 * r - 4, r) * comb(r, 2) * comb(2 * r - 4, r - 2) // 6
    if one_conflict:
        return comb(2 * r - 4, 2) * comb(2 * r - 6, r - 3)
    return comb(2 * r - 2, 2) * comb(2 * r - 4, r - 2) // 2


def _splits(items: tuple[int, ...], size: int, parts: int) -> Iterator[list[tuple[int, ...]]]:
    """Unordered partitions of items into `parts` blocks of equal `size`."""
    if parts == 0:
        yield []
        return
    head, rest = items[0], items[1:]
    for comp in combinations(rest, size - 1):
        block = (head, *comp)
        left = tuple(x for x in rest if x not in comp)
        for tail in _splits(left, size, parts - 1):
            yield [block, *tail]


def _edge(*parts: Iterable[int]) -> Edge:
    return tuple(sorted(v for p in parts for v in p))


def creation_patterns(T: Sequence[int], r: int, i: int,
                      conflict_pair: tuple[int, int] | None = None) -> Iterator[tuple[Edge, ...]]:
    """Every kind-i cluster with vertex set exactly T, as a sorted tuple of edges."""
    T = tuple(sorted(T))
    if len(T) != span_size(r, i):
        raise OutOfRange(f"target has {len(T)} vertices, expected {span_size(r, i)}")
    if i == 4:
        if conflict_pair is None:
            for P in combinations(T, 2):
                rest = tuple(v for v in T if v not in P)
                for a, b in _splits(rest, r - 2, 2):
                    yield tuple(sorted((_edge(P, a), _edge(P, b))))
        else:
            x, y = conflict_pair
            for P in combinations([v for v in T if v not in (x, y)], 2):
                rest = tuple(v for v in T if v not in P and v not in (x, y))
                for a in combinations(rest, r - 3):
                    b = tuple(v for v in rest if v not in a)
                    yield tuple(sorted((_edge(P, a, (x,)), _edge(P, b, (y,)))))
        return
    if i == 3:
        for P in combinations(T, 2):
            rest = tuple(v for v in T if v not in P)
            for a, b, c in _splits(rest, r - 2, 3):
                yield tuple(sorted((_edge(P, a), _edge(P, b), _edge(P, c))))
        return
    for f in combinations(T, r):
        rest = tuple(v for v in T if v not in f)
        if i == 1:
            for p, q in combinations(combinations(f, 2), 2):
                if set(p) & set(q):
                    continue
                for a in combinations(rest, r - 2):
                    b = tuple(v for v in rest if v not in a)
                    yield tuple(sorted((_edge(p, a), f, _edge(q, b))))
        else:
            for x in f:
                others = [v for v in f if v != x]
                for a_, b_ in combinations(others, 2):
                    for a in combinations(rest, r - 2):
                        b = tuple(v for v in rest if v not in a)
                        yield tuple(sorted((_edge((x, a_), a), f, _edge((x, b_), b))))


# --- helpers on masks ------------------------------------------------------------------

def _cf_against(mask: int, masks: Iterable[int]) -> bool:
    return all(popcount(mask & x) <= 1 for x in masks)


def _cf_rsets(n: int, r: int, masks: Sequence[int]) -> list[int]:
    return [em for em in _rset_masks(n, r) if _cf_against(em, masks)]


_RSET_MASKS: dict[tuple[int, int], tuple[int, ...]] = {}


def _rset_masks(n: int, r: int) -> tuple[int, ...]:
    key = (n, r)
    if key not in _RSET_MASKS:
        _RSET_MASKS[key] = tuple(vertex_mask(e) for e in rsets(n, r))
    return _RSET_MASKS[key]


def _hg(n: int, r: int, masks: Iterable[int]) -> Hypergraph:
    return _from_canonical(n, r, sorted(mask_vertices(x) for x in masks))


def canonical_key(masks: Sequence[int]) -> tuple:
    """Isomorphism invariant of a small edge set: the Venn-region sizes minimised over edge orders."""
    k = len(masks)
    union = 0
    for x in masks:
        union |= x
    regions: Counter[int] = Counter()
    v = 0
    while union >> v:
        if union >> v & 1:
            pat = 0
            for j, x in enumerate(masks):
                if x >> v & 1:
                    pat |= 1 << j
            regions[pat] += 1
        v += 1
    best = None
    for perm in permutations(range(k)):
        key = []
        for pat, c in regions.items():
            q = 0
            for j in range(k):
                if pat >> j & 1:
                    q |= 1 << perm[j]
            key.append((q, c))
        key = tuple(sorted(key))
        if best is None or key < best:
            best = key
    return (k, best)


class SequenceCounter:
    """Number of ordered k-sequences of r-sets, each conflict-free against R plus its predecessors."""

    def __init__(self, n: int, r: int):
        self.n, self.r = n, r
        self.memo: dict[tuple, int] = {}

    def __call__(self, masks: Sequence[int], k: int) -> int:
        if k == 0:
            return 1
        key = (canonical_key(masks), k)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if k == 1:
            val = count_conflict_free_sets(_hg(self.n, self.r, masks), self.r)
        else:
            base = list(masks)
            val = 0
            for f in _cf_rsets(self.n, self.r, base):
                val += self(base + [f], k - 1)
        self.memo[key] = val
        return val


def _sequences(n: int, r: int, masks: list[int], k: int) -> Iterator[tuple[int, ...]]:
    if k == 0:
        yield ()
        return
    for f in _cf_rsets(n, r, masks):
        for tail in _sequences(n, r, masks + [f], k - 1):
            yield (f, *tail)


def _target_valid(span: int, rest: Sequence[int], i: int, members: Sequence[int] = ()) -> bool:
    """Is the cluster span an admissible reverse target against the remaining edges?"""
    hits = [popcount(span & x) for x in rest]
    if i != 4:
        return all(h <= 1 for h in hits)
    if any(h >= 3 for h in hits) or sum(h == 2 for h in hits) > 1:
        return False
    for x, h in zip(rest, hits):
        if h == 2 and any(popcount(span & x & e) == 2 for e in members):
            return False
    return True


def _conflict_pair(T: int, rest: Sequence[int]) -> tuple[int, int] | None:
    for x in rest:
        inter = T & x
        if popcount(inter) == 2:
            a, b = mask_vertices(inter)
            return a, b
    return None


# --- forward / reverse -----------------------------------------------------------------

def _clusters_of_kind(H: Hypergraph, i: int) -> list[Cluster]:
    name = KIND_NAME[i]
    return [c for c in clusters(H) if c.kind == name]


def forward_switchings(H: Hypergraph, i: int, strict: bool = False) -> Switchings:
    """Type-i switchings: remove a kind-i cluster, then add 3 (Type 4: 2) edges in order."""
    _check_kind(i)
    found = _clusters_of_kind(H, i)
    if strict and not found:
        raise NoSuchCluster(f"H has no {KIND_NAME[i]} cluster")
    k = n_edges_of(i)
    seq = SequenceCounter(H.n, H.r)
    total = 0
    for c in found:
        rest = [H.masks[j] for j in range(H.m) if j not in c.edge_indices]
        total += seq(rest, k)

    def stream() -> Iterator[SwitchingDescriptor]:
        for c in found:
            removed = tuple(H.edges[j] for j in c.edge_indices)
            rest = [H.masks[j] for j in range(H.m) if j not in c.edge_indices]
            for s in _sequences(H.n, H.r, rest, k):
                yield SwitchingDescriptor(_FORWARD[i], removed, tuple(mask_vertices(x) for x in s),
                                          target_set=mask_vertices(c.vertex_mask))

    return Switchings(total, stream)


def link_free_edges(H: Hypergraph) -> list[int]:
    """Indices of edges meeting every other edge in at most one vertex."""
    linked = set()
    for (a, b) in overlaps(H):
        linked.add(a)
        linked.add(b)
    return [j for j in range(H.m) if j not in linked]


def _creation_total(R: Hypergraph, i: int) -> int:
    t = span_size(R.r, i)
    if R.n < t:
        return 0
    total = creation_count(R.r, i) * count_conflict_free_sets(R, t)
    if i == 4:
        total += creation_count(R.r, 4, one_conflict=True) * count_one_conflict_sets(R)
    return total


def reverse_switchings(H: Hypergraph, i: int) -> Switchings:
    """Reverse Type-i switchings: delete k link-free edges in order, then create a kind-i cluster."""
    _check_kind(i)
    k = n_edges_of(i)
    free = link_free_edges(H)
    if len(free) < k:
        raise TooFewFreeEdges(f"{len(free)} link-free edges, {KIND_NAME[i]} reverse needs {k}")
    per_set = {}
    for S in combinations(free, k):
        R = H.without(S)
        per_set[S] = _creation_total(R, i)
    total = factorial(k) * sum(per_set.values())
    t = span_size(H.r, i)

    def stream() -> Iterator[SwitchingDescriptor]:
        for S in permutations(free, k):
            R = H.without(S)
            removed = tuple(H.edges[j] for j in S)
            for T in combinations(range(1, H.n + 1), t):
                tm = vertex_mask(T)
                hits = [popcount(tm & x) for x in R.masks]
                if all(h <= 1 for h in hits):
                    pats = creation_patterns(T, H.r, i)
                elif i == 4 and max(hits) == 2 and sum(h == 2 for h in hits) == 1:
                    pats = creation_patterns(T, H.r, 4, _conflict_pair(tm, R.masks))
                else:
                    continue
                for p in pats:
                    yield SwitchingDescriptor(_REVERSE[i], removed, p, target_set=T)

    return Switchings(total, stream)


def inverse(d: SwitchingDescriptor) -> SwitchingDescriptor:
    k = d.kind
    if k in _KIND_OF:
        i = _KIND_OF[k]
        forward = k is _FORWARD[i]
        flip = _REVERSE[i] if forward else _FORWARD[i]
        cluster = d.removed if forward else d.added
        span = tuple(sorted({v for e in cluster for v in e}))
        return SwitchingDescriptor(flip, d.added, d.removed, target_set=span)
    if k is SwitchKind.DEGREE_DOWN or k is SwitchKind.DEGREE_UP:
        flip = SwitchKind.DEGREE_UP if k is SwitchKind.DEGREE_DOWN else SwitchKind.DEGREE_DOWN
        span = tuple(sorted({v for e in d.removed for v in e}))
        return SwitchingDescriptor(flip, d.added, d.removed, anchor=d.anchor, target_set=span)
    if k is SwitchKind.DISPLACEMENT:
        return SwitchingDescriptor(k, d.added, d.removed, anchor=d.added[0])
    return SwitchingDescriptor(k, d.added, d.removed, anchor=d.removed[0], legal=d.legal)


def _is_component(masks_in: Sequence[int], rest: Sequence[int]) -> bool:
    return all(popcount(a & b) <= 1 for a in masks_in for b in rest)


def apply(H: Hypergraph, d: SwitchingDescriptor) -> Hypergraph:
    """Perform a switching after re-validating it against H."""
    present = H.edge_set()
    for e in d.removed:
        if e not in present:
            raise StaleDescriptor(f"removed edge {e} is not in H")
    if len(set(d.removed)) != len(d.removed) or len(set(d.added)) != len(d.added):
        raise StaleDescriptor("descriptor repeats an edge")
    for e in d.added:
        if len(e) != H.r or any(not 1 <= v <= H.n for v in e):
            raise StaleDescriptor(f"added edge {e} is not an r-subset of [n]")
    gone = set(d.removed)
    rest = [x for e, x in zip(H.edges, H.masks) if e not in gone]
    rm = [vertex_mask(e) for e in d.removed]
    am = [vertex_mask(e) for e in d.added]
    k = d.kind
    if k in _KIND_OF:
        i = _KIND_OF[k]
        if len(d.removed) != n_edges_of(i) or len(d.added) != n_edges_of(i):
            raise StaleDescriptor(f"{k.value} moves {n_edges_of(i)} edges")
        if k is _FORWARD[i]:
            if classify(rm, H.r) != KIND_NAME[i] or not _is_component(rm, rest):
                raise NoSuchCluster(f"removed edges are not a {KIND_NAME[i]} cluster of H")
            built = list(rest)
            for x in am:
                if not _cf_against(x, built):
                    raise StaleDescriptor(f"added edge {mask_vertices(x)} has a conflict")
                built.append(x)
        else:
            free = set(link_free_edges(H))
            idx = {e: j for j, e in enumerate(H.edges)}
            if any(idx[e] not in free for e in d.removed):
                raise StaleDescriptor("reverse switchings delete link-free edges only")
            if classify(am, H.r) != KIND_NAME[i] or not _is_component(am, rest):
                raise StaleDescriptor(f"added edges do not form a {KIND_NAME[i]} cluster")
    elif k in (SwitchKind.DEGREE_DOWN, SwitchKind.DEGREE_UP):
        _validate_degree(H, d, rm, am, rest)
    elif k is SwitchKind.DISPLACEMENT:
        if len(rm) != 1 or len(am) != 1 or d.added[0] == d.removed[0] or not _cf_against(am[0], rest):
            raise StaleDescriptor("displacement must land on a conflict-free r-set")
    elif k is SwitchKind.REPLACEMENT:
        if len(rm) != 1 or len(am) != 1 or d.added[0] in present - gone:
            raise StaleDescriptor("replacement must insert an absent edge")
    return _hg(H.n, H.r, rest + am)


# --- degree switchings -----------------------------------------------------------------

def _movable(H: Hypergraph) -> list[tuple[tuple[int, ...], int]]:
    """(edge indices, span mask) for every clusterless edge and every Type-1..4 cluster."""
    cls = clusters(H)
    inside = set()
    out = []
    for c in cls:
        inside.update(c.edge_indices)
        if c.kind in (TYPE1, TYPE2, TYPE3, TYPE4):
            out.append((c.edge_indices, c.vertex_mask))
    for j in range(H.m):
        if j not in inside:
            out.append(((j,), H.masks[j]))
    return out


def _relabel(edges: Sequence[Edge], src: Sequence[int], dst: Sequence[int]) -> tuple[Edge, ...]:
    mp = dict(zip(src, dst))
    return tuple(tuple(sorted(mp[v] for v in e)) for e in edges)


def _validate_degree(H, d, rm, am, rest) -> None:
    v = d.anchor
    down = d.kind is SwitchKind.DEGREE_DOWN
    span = 0
    for x in rm:
        span |= x
    has_v = bool(span >> (v - 1) & 1)
    T = vertex_mask(d.target_set or ())
    if has_v != down or bool(T >> (v - 1) & 1) == down:
        raise StaleDescriptor("degree switching moves the object to the wrong side of v")
    if popcount(T) != popcount(span) or not _cf_against(T, rest):
        raise StaleDescriptor("landing set must be conflict-free against the rest of H")
    src = mask_vertices(span)
    if tuple(vertex_mask(e) for e in _relabel(d.removed, src, mask_vertices(T))) != tuple(am):
        raise StaleDescriptor("added edges are not the relabelled object")


def degree_switchings(H: Hypergraph, v: int, direction: str = "down") -> Switchings:
    """Move an edge or cluster containing v (down) or avoiding v (up) onto a conflict-free landing set."""
    if not 1 <= v <= H.n:
        raise VertexOutOfRange(f"vertex {v} outside 1..{H.n}")
    if direction not in ("down", "up"):
        raise OutOfRange(f"direction must be down or up, got {direction!r}")
    down = direction == "down"
    bit = 1 << (v - 1)
    objs = [(idx, span) for idx, span in _movable(H) if bool(span & bit) == down]
    others = [u for u in range(1, H.n + 1) if u != v]
    plan = []
    for idx, span in objs:
        rest = [H.masks[j] for j in range(H.m) if j not in idx]
        size = popcount(span)
        plan.append((idx, span, rest, size))

    def landings(rest, size):
        if down:
            for T in combinations(others, size):
                tm = vertex_mask(T)
                if _cf_against(tm, rest):
                    yield T
        else:
            for S in combinations(others, size - 1):
                T = tuple(sorted((*S, v)))
                if _cf_against(vertex_mask(T), rest):
                    yield T

    total = 0
    for idx, span, rest, size in plan:
        total += _cf_count_with(_hg(H.n, H.r, rest), size, v, containing=not down)

    def stream() -> Iterator[SwitchingDescriptor]:
        kind = SwitchKind.DEGREE_DOWN if down else SwitchKind.DEGREE_UP
        for idx, span, rest, size in plan:
            removed = tuple(H.edges[j] for j in idx)
            src = mask_vertices(span)
            for T in landings(rest, size):
                yield SwitchingDescriptor(kind, removed, _relabel(removed, src, T), anchor=v, target_set=T)

    return Switchings(total, stream)


def _cf_count_with(R: Hypergraph, t: int, v: int, containing: bool) -> int:
    """Conflict-free t-sets of R that contain (or avoid) vertex v."""
    if t > R.n:
        return 0
    # sets avoiding v: count on [n] - {v}, where each edge keeps its other vertices
    keep = [u for u in range(1, R.n + 1) if u != v]
    pos = {u: j + 1 for j, u in enumerate(keep)}
    red = []
    for e in R.edges:
        f = tuple(pos[u] for u in e if u != v)
        red.append(f)
    avoid = _cf_general(R.n - 1, red, t)
    if not containing:
        return avoid
    return count_conflict_free_sets(R, t) - avoid


def _cf_general(n: int, edges: Sequence[Sequence[int]], t: int) -> int:
    """Conflict-free t-sets of [n] for an edge list of mixed sizes (only pairs inside edges matter)."""
    if t > n:
        return 0
    inc = [0] * n
    for j, e in enumerate(edges):
        if len(e) < 2:
            continue
        for u in e:
            inc[u - 1] |= 1 << j
    touched = [x for x in inc if x]
    iso = n - len(touched)
    counts = [0] * (t + 1)

    def rec(start: int, used: int, size: int) -> None:
        counts[size] += 1
        if size == t:
            return
        for j in range(start, len(touched)):
            em = touched[j]
            if not used & em:
                rec(j + 1, used | em, size + 1)

    rec(0, 0, 0)
    return sum(c * comb(iso, t - s) for s, c in enumerate(counts))


# --- displacements ---------------------------------------------------------------------

def displacement_ops(H: Hypergraph, e_i: Sequence[int], direction: str = "displace",
                     protected: Iterable[Sequence[int]] = ()) -> Switchings:
    """e_i-displacements (move e_i to a conflict-free r-set) or e_i-replacements (swap another edge for e_i)."""
    e = tuple(sorted(e_i))
    if len(e) != H.r or any(not 1 <= v <= H.n for v in e):
        raise InputError(f"{e} is not an r-subset of [n]")
    if direction == "displace":
        if not H.contains_edge(e):
            raise EdgeAbsent(f"{e} is not an edge of H")
        j = H.edges.index(e)
        R = H.without([j])
        total = count_conflict_free_sets(R, H.r, forbidden=e)

        def stream() -> Iterator[SwitchingDescriptor]:
            for fm in _cf_rsets(H.n, H.r, list(R.masks)):
                f = mask_vertices(fm)
                if f != e:
                    yield SwitchingDescriptor(SwitchKind.DISPLACEMENT, (e,), (f,), anchor=e)

        return Switchings(total, stream)
    if direction == "replace":
        if H.contains_edge(e):
            raise EdgePresent(f"{e} is already an edge of H")
        prot = {tuple(sorted(p)) for p in protected}
        choices = [j for j, g in enumerate(H.edges) if g not in prot]

        def stream() -> Iterator[SwitchingDescriptor]:
            for j in choices:
                G = H.without([j]).with_edges([e])
                yield SwitchingDescriptor(SwitchKind.REPLACEMENT, (H.edges[j],), (e,), anchor=e,
                                          legal=is_linear(G))

        return Switchings(len(choices), stream)
    raise OutOfRange(f"direction must be displace or replace, got {direction!r}")


# --- double-counting audit -------------------------------------------------------------

@dataclass(frozen=True)
class AuditReport:
    n: int
    r: int
    m: int
    kind: int
    profile: ClusterProfile
    forward_total: Fraction
    reverse_total: Fraction
    raw_forward_total: Fraction
    size_a: Fraction
    size_b: Fraction
    deg_a: tuple[int, int] | None
    deg_b: tuple[int, int] | None
    lo: float | None
    observed: float | None
    hi: float | None

    @property
    def equal(self) -> bool:
        return self.forward_total == self.reverse_total

    @property
    def sandwich_ok(self) -> bool:
        if self.observed is None:
            return True
        lo = self.lo if self.lo is not None else 0.0
        hi = self.hi if self.hi is not None else float("inf")
        return lo * (1 - 1e-12) <= self.observed <= hi * (1 + 1e-12)

    def to_json(self) -> dict:
        def big(x: Fraction) -> str:
            return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"

        return {
            "forward_total": big(self.forward_total),
            "reverse_total": big(self.reverse_total),
            "equal": self.equal,
            "raw_forward_total": big(self.raw_forward_total),
            "ratio_bounds": {"lo": self.lo, "observed": self.observed, "hi": self.hi},
            "class_sizes": {"A": big(self.size_a), "B": big(self.size_b)},
            "degrees": {"A": list(self.deg_a) if self.deg_a else None,
                        "B": list(self.deg_b) if self.deg_b else None},
            "sandwich_ok": self.sandwich_ok,
        }


def forward_degree(H: Hypergraph, cls: list[Cluster], i: int, seq: SequenceCounter) -> tuple[int, int]:
    """(switchings whose image admits the matching reverse switching, all forward switchings)."""
    name = KIND_NAME[i]
    k = n_edges_of(i)
    deg = raw = 0
    for c in cls:
        if c.kind != name:
            continue
        members = [H.masks[j] for j in c.edge_indices]
        rest = [H.masks[j] for j in range(H.m) if j not in c.edge_indices]
        y = seq(rest, k)
        raw += y
        if _target_valid(c.vertex_mask, rest, i, members):
            deg += y
    return deg, raw


class _CreationCounter:
    def __init__(self, n: int, r: int, i: int):
        self.n, self.r, self.i = n, r, i
        self.memo: dict[tuple, int] = {}

    def __call__(self, masks: Sequence[int]) -> int:
        key = canonical_key(masks)
        if key not in self.memo:
            self.memo[key] = _creation_total(_hg(self.n, self.r, masks), self.i)
        return self.memo[key]


def reverse_degree(H: Hypergraph, i: int, create: _CreationCounter) -> int:
    k = n_edges_of(i)
    free = link_free_edges(H)
    deg = 0
    for S in permutations(free, k):
        rest = [H.masks[j] for j in range(H.m) if j not in S]
        deg += create(rest)
    return deg


def double_count_audit(n: int, r: int, m: int, i: int, profile: Sequence[int],
                       cap: int = CENSUS_CAP) -> AuditReport:
    """Exact forward/reverse edge totals of the Type-i switching graph between profile classes.

    Both classes are closed under relabelling, so it suffices to scan the
    hypergraphs containing the fixed edge {1..r}; totals scale by C(n,r)/m.
    """
    _check_kind(i)
    if len(profile) != 4:
        raise InputError("profile must be h1,h2,h3,h4")
    P = ClusterProfile(*profile, 0)
    if P.count(i) < 1:
        raise InputError(f"profile needs h{i} >= 1")
    Pb = P.shifted(i, -1)
    if r < 3 or n < r:
        raise OutOfRange(f"need 3 <= r <= n, got n={n}, r={r}")
    N = comb(n, r)
    if not 1 <= m <= N:
        raise OutOfRange(f"m={m} outside 1..{N}")
    if comb(N - 1, m - 1) > cap:
        raise BudgetExceeded(f"C({N - 1},{m - 1}) hypergraphs exceed census cap {cap}")
    all_sets = rsets(n, r)
    e0, others = all_sets[0], all_sets[1:]
    seq = SequenceCounter(n, r)
    create = _CreationCounter(n, r, i)
    fa = fraw = rb = na = nb = 0
    da: list[int] = []
    db: list[int] = []
    for combo in combinations(others, m - 1):
        H = _from_canonical(n, r, (e0, *combo))
        cls = clusters(H)
        prof = profile_of(cls)
        if prof == P:
            d, y = forward_degree(H, cls, i, seq)
            fa += d
            fraw += y
            na += 1
            da.append(d)
        elif prof == Pb:
            d = reverse_degree(H, i, create)
            rb += d
            nb += 1
            db.append(d)
    scale = Fraction(N, m)
    deg_a = (min(da), max(da)) if da else None
    deg_b = (min(db), max(db)) if db else None
    lo = observed = hi = None
    if nb:
        observed = na / nb
        if deg_a and deg_b:
            lo = deg_b[0] / deg_a[1] if deg_a[1] else None
            hi = deg_b[1] / deg_a[0] if deg_a[0] else None
    return AuditReport(n, r, m, i, P, fa * scale, rb * scale, fraw * scale, na * scale, nb * scale,
                       deg_a, deg_b, lo, observed, hi)
