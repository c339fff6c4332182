"""Exhaustive counting over labeled r-graphs at desk scale.

Everything here returns exact Python integers (or Fractions).  Work is
capped by node/census budgets; exceeding a cap raises BudgetExceeded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb

from .core import (
    ClusterProfile,
    Hypergraph,
    Regime,
    ThresholdSet,
    _from_canonical,
    is_linear,
    pair_mask,
    popcount,
    property_report,
    thresholds,
    vertex_mask,
)
from .errors import BudgetExceeded, NotLinearK, OutOfRange
from .parallel import pmap

DFS_NODE_CAP = 10**9
CENSUS_CAP = 10**8


@lru_cache(maxsize=64)
def rsets(n: int, r: int) -> tuple[tuple[int, ...], ...]:
    """All r-subsets of [n] in lexicographic order."""
    return tuple(combinations(range(1, n + 1), r))


@lru_cache(maxsize=64)
def rset_pair_masks(n: int, r: int) -> tuple[int, ...]:
    return tuple(pair_mask(e, n) for e in rsets(n, r))


def _check_m(n: int, r: int, m: int) -> int:
    if r < 1 or n < r:
        raise OutOfRange(f"need 1 <= r <= n, got n={n}, r={r}")
    N = comb(n, r)
    if m < 0 or m > N:
        raise OutOfRange(f"m={m} outside 0..C({n},{r})={N}")
    return N


def count_all(n: int, r: int, m: int) -> int:
    return comb(_check_m(n, r, m), m)


class _Budget:
    __slots__ = ("cap", "used")

    def __init__(self, cap: int):
        self.cap = cap
        self.used = 0

    def spend(self, k: int) -> None:
        self.used += k
        if self.used > self.cap:
            raise BudgetExceeded(f"DFS node count exceeded cap {self.cap}")


def _dfs_count(cands: list[int], k: int, budget: _Budget) -> int:
    """Number of k-subsets of cands (pair masks, in order) with pairwise disjoint masks."""
    if k == 0:
        return 1
    if k == 1:
        budget.spend(len(cands))
        return len(cands)
    total = 0
    last = len(cands) - k
    for i, c in enumerate(cands):
        if i > last:
            break
        budget.spend(1)
        sub = [d for d in cands[i + 1:] if not d & c]
        if len(sub) >= k - 1:
            total += _dfs_count(sub, k - 1, budget)
    return total


def _branch(args: tuple[list[int], int, int, int]) -> int:
    cands, i, k, cap = args
    c = cands[i]
    sub = [d for d in cands[i + 1:] if not d & c]
    return _dfs_count(sub, k - 1, _Budget(cap))


def _count_compatible(cands: list[int], k: int, node_cap: int, threads: int | None) -> int:
    if k <= 1 or threads is None or threads <= 1:
        return _dfs_count(cands, k, _Budget(node_cap))
    jobs = [(cands, i, k, node_cap) for i in range(len(cands) - k + 1)]
    parts = pmap(_branch, jobs, threads)
    return sum(parts)


def count_linear(n: int, r: int, m: int, node_cap: int = DFS_NODE_CAP, threads: int | None = None) -> int:
    """|L_r(n,m)| by DFS over lexicographically increasing edge lists with a pair-occupancy mask."""
    _check_m(n, r, m)
    return _count_compatible(list(rset_pair_masks(n, r)), m, node_cap, threads)


def count_linear_vector(n: int, r: int, m_max: int | None = None, node_cap: int = DFS_NODE_CAP) -> list[int]:
    """[|L_r(n,0)|, |L_r(n,1)|, ...] from a single DFS, up to m_max or until no linear r-graph exists."""
    cands = list(rset_pair_masks(n, r))
    limit = len(cands) if m_max is None else m_max
    counts = [0] * (limit + 1)
    budget = _Budget(node_cap)

    def rec(cs: list[int], depth: int) -> None:
        counts[depth] += 1
        if depth == limit:
            return
        budget.spend(len(cs))
        if depth + 1 == limit:
            counts[depth + 1] += len(cs)
            return
        for i, c in enumerate(cs):
            sub = [d for d in cs[i + 1:] if not d & c]
            if sub:
                rec(sub, depth + 1)
            else:
                counts[depth + 1] += 1

    rec(cands, 0)
    while len(counts) > 1 and counts[-1] == 0 and m_max is None:
        counts.pop()
    return counts


def count_linear_bruteforce(n: int, r: int, m: int, cap: int = CENSUS_CAP) -> int:
    """Independent subset filter: test every m-subset of r-sets for pairwise overlap <= 1."""
    N = _check_m(n, r, m)
    if comb(N, m) > cap:
        raise BudgetExceeded(f"C({N},{m}) exceeds census cap {cap}")
    sets = [vertex_mask(e) for e in rsets(n, r)]
    total = 0
    for combo in combinations(sets, m):
        if all(popcount(a & b) <= 1 for a, b in combinations(combo, 2)):
            total += 1
    return total


@dataclass(frozen=True)
class CensusTable:
    n: int
    r: int
    m: int
    regime: Regime
    counts: dict[tuple[ClusterProfile, bool, bool], int]
    total: int

    def linear(self) -> int:
        return sum(v for (p, _, _), v in self.counts.items() if p.is_zero())

    def by_profile(self) -> dict[ClusterProfile, int]:
        out: dict[ClusterProfile, int] = {}
        for (p, _, _), v in self.counts.items():
            out[p] = out.get(p, 0) + v
        return out

    def rows(self) -> list[tuple]:
        """(h1,h2,h3,h4,other,in_plus,in_plusplus,count) sorted for stable output."""
        keyed = sorted(self.counts.items(), key=lambda kv: (kv[0][0].as_tuple(), kv[0][1], kv[0][2]))
        return [(*p.as_tuple(), a, b, v) for (p, a, b), v in keyed]


def profile_census(n: int, r: int, m: int, regime: Regime | None = None,
                   ts: ThresholdSet | None = None, cap: int = CENSUS_CAP) -> CensusTable:
    N = _check_m(n, r, m)
    if comb(N, m) > cap:
        raise BudgetExceeded(f"C({N},{m}) = {comb(N, m)} exceeds census cap {cap}")
    if ts is None:
        ts = thresholds(n, r, m, regime)
    regime = ts.regime if regime is None else Regime(regime)
    counts: dict[tuple[ClusterProfile, bool, bool], int] = {}
    total = 0
    for combo in combinations(rsets(n, r), m):
        H = _from_canonical(n, r, combo)
        rep = property_report(H, regime, ts)
        key = (rep.profile, rep.in_plus, rep.in_plusplus)
        counts[key] = counts.get(key, 0) + 1
        total += 1
    return CensusTable(n, r, m, regime, counts, total)


def count_linear_containing(n: int, r: int, m: int, K: Hypergraph,
                            node_cap: int = DFS_NODE_CAP, threads: int | None = None) -> int:
    """Number of H in L_r(n,m) with K a sub-hypergraph (K's edges pre-placed)."""
    _check_m(n, r, m)
    if K.n != n or K.r != r:
        raise OutOfRange("K must live on the same [n] with the same r")
    if not is_linear(K):
        raise NotLinearK("K is not linear")
    k = K.m
    if k > m:
        return 0
    used = 0
    for e in K.edges:
        used |= pair_mask(e, n)
    kset = K.edge_set()
    cands = [pm for e, pm in zip(rsets(n, r), rset_pair_masks(n, r)) if e not in kset and not pm & used]
    return _count_compatible(cands, m - k, node_cap, threads)


def edge_set_probability(N: int, m: int, t: int) -> Fraction:
    """P[t fixed edges all present] in H_r(n,m) with N = C(n,r): [m]_t / [N]_t."""
    num = den = 1
    for i in range(t):
        num *= m - i
        den *= N - i
    return Fraction(num, den)


def count_small_unions(n: int, r: int, t: int, alpha: int) -> int:
    """Number of t-sets of r-sets whose union has at most r*t - alpha vertices (pruned DFS)."""
    sets = [vertex_mask(e) for e in rsets(n, r)]
    bound = r * t - alpha
    total = 0

    def rec(start: int, depth: int, union: int) -> None:
        nonlocal total
        if popcount(union) > bound:
            return
        if depth == t:
            total += 1
            return
        for i in range(start, len(sets)):
            rec(i + 1, depth + 1, union | sets[i])

    rec(0, 0, 0)
    return total


def chernoff_tail_bound(N: int, p: float, m_cut: int) -> float:
    """Upper bound on P[X > m_cut], X ~ Bin(N,p), from 2 exp(-t^2/(3Np)) with 0 < t <= Np."""
    mu = N * p
    if m_cut >= N:
        return 0.0
    t = m_cut - mu
    if t <= 0 or mu <= 0:
        return 1.0
    t = min(t, mu)
    return min(1.0, 2.0 * math.exp(-t * t / (3.0 * mu)))


@dataclass(frozen=True)
class BinomialLinearity:
    probability: float
    exact: Fraction | None
    truncated: bool
    m_cut: int
    tail_bound: float


def exact_binomial_linearity(n: int, r: int, p, m_cut: int | None = None,
                             node_cap: int = DFS_NODE_CAP) -> BinomialLinearity:
    """P[H_r(n,p) linear] = sum_m |L_r(n,m)| p^m (1-p)^(N-m); optionally truncated at m_cut."""
    pf = Fraction(p) if not isinstance(p, Fraction) else p
    if pf < 0 or pf > 1:
        raise OutOfRange(f"p={p} outside [0,1]")
    N = comb(n, r)
    if m_cut is None:
        try:
            L = count_linear_vector(n, r, None, node_cap)
        except BudgetExceeded:
            m_cut = min(N, math.ceil(2 * N * float(pf)) + 1)
            L = count_linear_vector(n, r, m_cut, node_cap)
    else:
        L = count_linear_vector(n, r, min(m_cut, N), node_cap)
    q = 1 - pf
    s = Fraction(0)
    for mm, cnt in enumerate(L):
        if cnt:
            s += cnt * pf**mm * q ** (N - mm)
    complete = m_cut is None or m_cut >= N or L[-1] == 0
    tail = 0.0 if complete else chernoff_tail_bound(N, float(pf), m_cut)
    return BinomialLinearity(float(s), s, not complete, len(L) - 1, tail)
