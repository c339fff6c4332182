"""Hypergraph representation, cluster analysis and property-class reports.

Vertices are 1-based at the API boundary.  Each edge is stored as a sorted
tuple plus a Python int bit mask (bit v-1 set for vertex v).
"""

from __future__ import annotations

import decimal
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

from .errors import (
    BadSetSize,
    DuplicateEdge,
    LoadError,
    OutOfRange,
    RegimeMismatch,
    TooFewVertices,
    VertexOutOfRange,
    WrongEdgeSize,
)

TYPE1, TYPE2, TYPE3, TYPE4, OTHER = "Type1", "Type2", "Type3", "Type4", "Other"
KINDS = (TYPE1, TYPE2, TYPE3, TYPE4, OTHER)


def popcount(x: int) -> int:
    return bin(x).count("1")


def vertex_mask(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << (v - 1)
    return mask


def mask_vertices(mask: int) -> tuple[int, ...]:
    out = []
    v = 1
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


def pair_index(a: int, b: int, n: int) -> int:
    """Index of the 2-set {a, b} (1-based vertices) in the pair bit mask."""
    lo, hi = (a, b) if a < b else (b, a)
    return (lo - 1) * (2 * n - lo) // 2 + (hi - lo) - 1


def pair_mask(edge: Sequence[int], n: int) -> int:
    mask = 0
    for a, b in combinations(edge, 2):
        mask |= 1 << pair_index(a, b, n)
    return mask


@dataclass(frozen=True, slots=True)
class Hypergraph:
    n: int
    r: int
    edges: tuple[tuple[int, ...], ...]
    masks: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        """deg(v) for v = 1..n, as a list indexed by v-1."""
        deg = [0] * self.n
        for e in self.edges:
            for v in e:
                deg[v - 1] += 1
        return deg

    def max_degree(self) -> int:
        return max(self.degrees(), default=0)

    def edge_set(self) -> frozenset[tuple[int, ...]]:
        return frozenset(self.edges)

    def contains_edge(self, edge: Iterable[int]) -> bool:
        return tuple(sorted(edge)) in self.edge_set()

    def without(self, indices: Iterable[int]) -> "Hypergraph":
        drop = set(indices)
        keep = [e for i, e in enumerate(self.edges) if i not in drop]
        return _from_canonical(self.n, self.r, keep)

    def with_edges(self, extra: Iterable[Sequence[int]]) -> "Hypergraph":
        return build(self.n, self.r, list(self.edges) + [tuple(e) for e in extra])

    def __str__(self) -> str:
        body = ", ".join("{" + ",".join(map(str, e)) + "}" for e in self.edges)
        return f"Hypergraph(n={self.n}, r={self.r}, m={self.m}, [{body}])"


def _from_canonical(n: int, r: int, edges: Iterable[tuple[int, ...]]) -> Hypergraph:
    es = tuple(sorted(edges))
    return Hypergraph(n, r, es, tuple(vertex_mask(e) for e in es))


def build(n: int, r: int, edges: Iterable[Iterable[int]]) -> Hypergraph:
    """Validate and canonicalize an r-uniform hypergraph on {1..n}."""
    if not (isinstance(n, int) and isinstance(r, int)) or r < 1 or n < r:
        raise OutOfRange(f"need 1 <= r <= n, got n={n}, r={r}")
    seen: dict[tuple[int, ...], int] = {}
    canon = []
    for idx, raw in enumerate(edges):
        verts = list(raw)
        edge = tuple(sorted(set(verts)))
        if len(verts) != r or len(edge) != r:
            raise WrongEdgeSize(f"edge {idx} has {len(edge)} distinct vertices, expected {r}")
        for v in edge:
            if not isinstance(v, int) or v < 1 or v > n:
                raise VertexOutOfRange(f"edge {idx} has vertex {v} outside 1..{n}")
        if edge in seen:
            raise DuplicateEdge(f"edge {idx} duplicates edge {seen[edge]}")
        seen[edge] = idx
        canon.append(edge)
    return _from_canonical(n, r, canon)


def _check_vertices(H: Hypergraph, U: Iterable[int]) -> tuple[int, ...]:
    U = tuple(sorted(set(U)))
    for v in U:
        if not isinstance(v, int) or v < 1 or v > H.n:
            raise VertexOutOfRange(f"vertex {v} outside 1..{H.n}")
    return U


def codegree(H: Hypergraph, U: Iterable[int]) -> int:
    U = _check_vertices(H, U)
    if not U:
        raise OutOfRange("U must be nonempty")
    um = vertex_mask(U)
    return sum(1 for em in H.masks if em & um == um)


def is_linear(H: Hypergraph) -> bool:
    seen = set()
    for e in H.edges:
        for pr in combinations(e, 2):
            if pr in seen:
                return False
            seen.add(pr)
    return True


def overlaps(H: Hypergraph) -> dict[tuple[int, int], int]:
    """Edge index pairs (i < j) whose intersection has size >= 2, with that size."""
    by_pair: dict[tuple[int, int], list[int]] = {}
    for i, e in enumerate(H.edges):
        for pr in combinations(e, 2):
            by_pair.setdefault(pr, []).append(i)
    out: dict[tuple[int, int], int] = {}
    for idxs in by_pair.values():
        if len(idxs) < 2:
            continue
        for i, j in combinations(idxs, 2):
            if (i, j) not in out:
                out[(i, j)] = popcount(H.masks[i] & H.masks[j])
    return out


@dataclass(frozen=True, slots=True)
class Cluster:
    edge_indices: tuple[int, ...]
    kind: str
    vertex_span: int
    vertex_mask: int = field(repr=False)


def classify(masks: Sequence[int], r: int) -> str:
    """Cluster kind of a connected component given its edge masks."""
    k = len(masks)
    sizes = {(a, b): popcount(masks[a] & masks[b]) for a, b in combinations(range(k), 2)}
    if any(s >= 3 for s in sizes.values()):
        return OTHER
    span = popcount(_union(masks))
    if k == 2:
        return TYPE4 if span == 2 * r - 2 else OTHER
    if k != 3 or span != 3 * r - 4:
        return OTHER
    sig = sorted(sizes.values())
    twos = [masks[a] & masks[b] for (a, b), s in sizes.items() if s == 2]
    if sig == [0, 2, 2]:
        return TYPE1
    if sig == [1, 2, 2] and popcount(twos[0] & twos[1]) == 1:
        return TYPE2
    if sig == [2, 2, 2] and twos[0] == twos[1] == twos[2]:
        return TYPE3
    return OTHER


def _union(masks: Iterable[int]) -> int:
    u = 0
    for x in masks:
        u |= x
    return u


def clusters(H: Hypergraph) -> list[Cluster]:
    parent = list(range(H.m))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    ov = overlaps(H)
    for i, j in ov:
        a, b = find(i), find(j)
        if a != b:
            parent[max(a, b)] = min(a, b)
    comps: dict[int, set[int]] = {}
    for pair in ov:
        for x in pair:
            comps.setdefault(find(x), set()).add(x)
    out = []
    for root in sorted(comps):
        idx = tuple(sorted(comps[root]))
        ms = [H.masks[i] for i in idx]
        um = _union(ms)
        out.append(Cluster(idx, classify(ms, H.r), popcount(um), um))
    return out


@dataclass(frozen=True, slots=True)
class ClusterProfile:
    h1: int = 0
    h2: int = 0
    h3: int = 0
    h4: int = 0
    other: int = 0

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.h1, self.h2, self.h3, self.h4, self.other)

    def is_zero(self) -> bool:
        return self.as_tuple() == (0, 0, 0, 0, 0)

    def count(self, kind: int) -> int:
        return self.as_tuple()[kind - 1]

    def shifted(self, kind: int, delta: int) -> "ClusterProfile":
        vals = list(self.as_tuple())
        vals[kind - 1] += delta
        return ClusterProfile(*vals)


def profile_of(cls: Iterable[Cluster]) -> ClusterProfile:
    tally = dict.fromkeys(KINDS, 0)
    for c in cls:
        tally[c.kind] += 1
    return ClusterProfile(*(tally[k] for k in KINDS))


def cluster_profile(H: Hypergraph) -> ClusterProfile:
    return profile_of(clusters(H))


class Regime(str, Enum):
    DENSE = "Dense"
    MID = "Mid"
    SPARSE = "Sparse"


_CTX = decimal.Context(prec=60)


def _ln_ratio(n: int, r: int) -> decimal.Decimal:
    return _CTX.ln(_CTX.divide(decimal.Decimal(n), decimal.Decimal(r * r)))


def _ceil(x: decimal.Decimal) -> int:
    return int(x.to_integral_value(rounding=decimal.ROUND_CEILING, context=_CTX))


def _dec(q: Fraction) -> decimal.Decimal:
    return _CTX.divide(decimal.Decimal(q.numerator), decimal.Decimal(q.denominator))


def auto_regime(n: int, r: int, m: int) -> Regime:
    """Dense if m >= n/r^2, Mid if m >= ln(n/r^2), else Sparse (finite-n heuristic)."""
    if m * r * r >= n:
        return Regime.DENSE
    if decimal.Decimal(m) >= _ln_ratio(n, r):
        return Regime.MID
    return Regime.SPARSE


@dataclass(frozen=True, slots=True)
class ThresholdSet:
    regime: Regime
    m0_star: int
    m0_cap: int
    m1: int
    m2: int
    m3: int
    m4: int

    def cap(self, kind: int) -> int:
        return (self.m1, self.m2, self.m3, self.m4)[kind - 1]

    def raised(self, by: int) -> "ThresholdSet":
        return ThresholdSet(self.regime, self.m0_star + by, self.m0_cap + by,
                            self.m1 + by, self.m2 + by, self.m3 + by, self.m4 + by)


def thresholds(n: int, r: int, m: int, regime: Regime | None = None) -> ThresholdSet:
    """Regime caps with ceilings taken on a 60-digit evaluation of ln plus an exact rational."""
    regime = Regime(regime) if regime is not None else auto_regime(n, r, m)
    base = _ln_ratio(n, r)
    if regime is Regime.DENSE:
        m0s = _ceil(base + _dec(Fraction(81 * r * r * m, n)))
        caps = [_ceil(base + _dec(Fraction(81 * r**p * m**3, 2 * n**4))) for p in (8, 7, 6)]
        m4 = _ceil(base + _dec(Fraction(81 * r**4 * m * m, 2 * n * n)))
        return ThresholdSet(regime, m0s, m0s + 3, caps[0], caps[1], caps[2], m4)
    if regime is Regime.MID:
        m0s = _ceil(base)
        return ThresholdSet(regime, m0s, m0s + 2, 0, 0, 0, m0s)
    return ThresholdSet(regime, 0, 0, 0, 0, 0, 2)


@dataclass(frozen=True, slots=True)
class PropertyReport:
    regime: Regime
    properties: dict[str, bool]
    in_plus: bool
    in_plusplus: bool
    profile: ClusterProfile


PLUS_KEYS = {
    Regime.DENSE: ("a", "b", "c", "d", "e", "f", "g"),
    Regime.MID: ("a", "b", "c", "d", "e"),
    Regime.SPARSE: ("a", "b", "c", "d"),
}
STAR_KEY = {Regime.DENSE: "g*", Regime.MID: "e*"}


def _triples_ok(cls: list[Cluster], floor: int) -> bool:
    """Every three distinct clusters in cls cover at least `floor` vertices.

    Triples of pairwise-disjoint clusters are skipped only when their span
    sum already reaches the floor.
    """
    k = len(cls)
    if k < 3:
        return True
    spans = sorted(c.vertex_span for c in cls)
    if spans[0] + spans[1] + spans[2] >= floor:
        touching = {(a, b) for a, b in combinations(range(k), 2)
                    if cls[a].vertex_mask & cls[b].vertex_mask}
        if not touching:
            return True
        candidates = set()
        for a, b in touching:
            for c in range(k):
                if c != a and c != b:
                    candidates.add(tuple(sorted((a, b, c))))
        triples = candidates
    else:
        triples = combinations(range(k), 3)
    for a, b, c in triples:
        if popcount(cls[a].vertex_mask | cls[b].vertex_mask | cls[c].vertex_mask) < floor:
            return False
    return True


def property_report(H: Hypergraph, regime: Regime, ts: ThresholdSet) -> PropertyReport:
    regime = Regime(regime)
    if ts.regime is not regime:
        raise RegimeMismatch(f"thresholds are for {ts.regime.value}, report asked for {regime.value}")
    r = H.r
    ov = overlaps(H)
    cls = clusters(H)
    prof = profile_of(cls)
    maxdeg = H.max_degree()
    p: dict[str, bool] = {}
    p["a"] = all(s <= 2 for s in ov.values())
    pairwise_ok = all(popcount(x.vertex_mask & y.vertex_mask) <= 1 for x, y in combinations(cls, 2))
    if regime is Regime.DENSE:
        p["b"] = all(c.kind != OTHER for c in cls)
        p["c"] = pairwise_ok
        p["d"] = _triples_ok([c for c in cls if c.kind in (TYPE1, TYPE2, TYPE3)], 9 * r - 13)
        p["e"] = _triples_ok([c for c in cls if c.kind == TYPE4], 6 * r - 8)
        p["f"] = all(prof.count(i) <= ts.cap(i) for i in (1, 2, 3, 4))
        p["g"] = maxdeg <= ts.m0_cap
        p["g*"] = maxdeg <= ts.m0_star
    else:
        p["b"] = all(c.kind == TYPE4 for c in cls)
        p["c"] = all(not (x.vertex_mask & y.vertex_mask) for x, y in combinations(cls, 2))
        p["d"] = prof.h4 <= ts.m4
        if regime is Regime.MID:
            p["e"] = maxdeg <= ts.m0_cap
            p["e*"] = maxdeg <= ts.m0_star
    in_plus = all(p[k] for k in PLUS_KEYS[regime])
    star = STAR_KEY.get(regime)
    in_pp = in_plus and (p[star] if star else True)
    return PropertyReport(regime, p, in_plus, in_pp, prof)


# --- exact conflict-free counters ---------------------------------------------------

def _incidence(H: Hypergraph) -> tuple[list[int], int]:
    """Per-vertex edge-incidence masks for incident vertices, and the isolated-vertex count."""
    inc = [0] * H.n
    for i, e in enumerate(H.edges):
        for v in e:
            inc[v - 1] |= 1 << i
    touched = [x for x in inc if x]
    return touched, H.n - len(touched)


def _cf_by_size(inc: list[int], t: int) -> list[int]:
    """counts[s] = number of s-subsets of the incident vertices touching every edge at most once."""
    counts = [0] * (t + 1)
    k = len(inc)

    def rec(start: int, used: int, size: int) -> None:
        counts[size] += 1
        if size == t:
            return
        for j in range(start, k):
            em = inc[j]
            if not used & em:
                rec(j + 1, used | em, size + 1)

    rec(0, 0, 0)
    return counts


def count_conflict_free_sets(H: Hypergraph, t: int, forbidden: Iterable[int] | None = None) -> int:
    """Exact number of t-subsets of [n] with no two vertices inside one edge of H.

    When `forbidden` (an r-set) is supplied, that set itself is excluded.
    """
    if forbidden is not None and t != H.r:
        raise BadSetSize(f"forbidden set given with t={t} != r={H.r}")
    if t < 0 or t > H.n:
        raise OutOfRange(f"t={t} outside 0..{H.n}")
    inc, iso = _incidence(H)
    counts = _cf_by_size(inc, t)
    total = sum(c * comb(iso, t - s) for s, c in enumerate(counts))
    if forbidden is not None:
        f = _check_vertices(H, forbidden)
        if len(f) != H.r:
            raise BadSetSize(f"forbidden set has {len(f)} vertices, expected {H.r}")
        fm = vertex_mask(f)
        if all(popcount(fm & em) <= 1 for em in H.masks):
            total -= 1
    return total


def count_one_conflict_sets(H: Hypergraph) -> int:
    """Exact number of (2r-2)-subsets meeting exactly one edge in two vertices and every other edge in at most one."""
    t = 2 * H.r - 2
    if H.n < t:
        raise TooFewVertices(f"n={H.n} < 2r-2={t}")
    inc, iso = _incidence(H)
    k = len(inc)
    counts = [0] * (t + 1)

    def rec(start: int, once: int, twice: int, size: int) -> None:
        if twice:
            counts[size] += 1
        if size == t:
            return
        for j in range(start, k):
            em = inc[j]
            hit = once & em
            if not hit:
                rec(j + 1, once | em, twice, size + 1)
            elif not twice and not hit & (hit - 1):
                rec(j + 1, once | em, hit, size + 1)
            # a second doubled edge, or a third vertex in the doubled edge, is pruned

    rec(0, 0, 0, 0)
    return sum(c * comb(iso, t - s) for s, c in enumerate(counts))


# --- .lh text format -------------------------------------------------------------------

_INT = re.compile(r"0|[1-9][0-9]*")


def _ints(line: str, lineno: int) -> list[int]:
    toks = line.split(" ")
    if not all(_INT.fullmatch(t) for t in toks):
        raise LoadError(f"line {lineno}: expected integers separated by single spaces")
    return [int(t) for t in toks]


def loads_lh(text: str) -> Hypergraph:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    body = [(i + 1, ln) for i, ln in enumerate(lines) if not ln.startswith("#")]
    if not body:
        raise LoadError("line 1: missing header 'n r m'")
    hno, header = body[0]
    head = _ints(header, hno)
    if len(head) != 3:
        raise LoadError(f"line {hno}: header must be 'n r m'")
    n, r, m = head
    if r < 1 or n < r:
        raise LoadError(f"line {hno}: need 1 <= r <= n")
    rows = body[1:]
    if len(rows) != m:
        where = rows[m][0] if len(rows) > m else (rows[-1][0] + 1 if rows else hno + 1)
        raise LoadError(f"line {where}: expected {m} edge lines, found {len(rows)}")
    edges = []
    for lineno, ln in rows:
        vs = _ints(ln, lineno)
        if len(vs) != r:
            raise LoadError(f"line {lineno}: expected {r} vertices")
        if any(b <= a for a, b in zip(vs, vs[1:])):
            raise LoadError(f"line {lineno}: vertices must be strictly increasing")
        if vs[0] < 1 or vs[-1] > n:
            raise LoadError(f"line {lineno}: vertex outside 1..{n}")
        edges.append(tuple(vs))
    try:
        return build(n, r, edges)
    except DuplicateEdge as exc:
        raise LoadError(f"duplicate edge: {exc}") from exc


def load_lh(path: str) -> Hypergraph:
    with open(path, "r", encoding="ascii", newline="") as fh:
        return loads_lh(fh.read())


def dumps_lh(H: Hypergraph) -> str:
    out = [f"{H.n} {H.r} {H.m}"]
    out.extend(" ".join(map(str, e)) for e in H.edges)
    return "\n".join(out) + "\n"
