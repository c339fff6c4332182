"""Seeded generation of H_r(n,m) and H_r(n,p) plus Bernoulli / moment estimators.

Trial t always draws from the Philox stream with key = seed and counter
word 2 = t, so an estimate depends only on (seed, trials), never on how
trials are split across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .asymptotics import linear_count_exponent, binomial_linear_log_prob
from .core import (
    ClusterProfile,
    Hypergraph,
    Regime,
    _from_canonical,
    is_linear,
    property_report,
    thresholds,
)
from .errors import AcceptanceTooLow, NotLinearK, OutOfRange, ZeroTrials
from .parallel import default_threads, pmap

BATCH = 4096
MIN_ACCEPTANCE = 1e-4
Z95 = 1.96
_MASK64 = (1 << 64) - 1
_MAX_N = (1 << 62)


@dataclass(frozen=True)
class Estimate:
    point: float
    stderr: float
    ci95: tuple[float, float]
    trials: int
    successes: int | None
    seed: int

    def to_json(self) -> dict:
        out = {"point": self.point, "stderr": self.stderr, "ci95": list(self.ci95),
               "trials": self.trials, "seed": self.seed}
        if self.successes is not None:
            out["successes"] = self.successes
        return out


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    n = trials
    ph = successes / n
    den = 1 + z * z / n
    centre = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


def bernoulli_estimate(successes: int, trials: int, seed: int) -> Estimate:
    if trials < 1:
        raise ZeroTrials("trials must be >= 1")
    ph = successes / trials
    se = math.sqrt(ph * (1 - ph) / trials)
    if successes in (0, trials):
        ci = wilson_interval(successes, trials)
    else:
        ci = (ph - Z95 * se, ph + Z95 * se)
    return Estimate(ph, se, ci, trials, successes, seed)


def _mean_estimate(point: float, se: float, count: int, seed: int) -> Estimate:
    return Estimate(point, se, (point - Z95 * se, point + Z95 * se), count, None, seed)


# --- per-trial streams -----------------------------------------------------------------

class TrialStreams:
    """Generator for trial t: Philox(key=seed, counter=[0, 0, t, 0]), reset in place."""

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self._bg = np.random.Philox(key=self.seed)
        self._gen = np.random.Generator(self._bg)
        self._key = np.array([self.seed, 0], dtype=np.uint64)

    def at(self, t: int) -> np.random.Generator:
        self._bg.state = {
            "bit_generator": "Philox",
            "state": {"counter": np.array([0, 0, t, 0], dtype=np.uint64), "key": self._key},
            "buffer": np.zeros(4, dtype=np.uint64),
            "buffer_pos": 4,
            "has_uint32": 0,
            "uinteger": 0,
        }
        return self._gen


def trial_generator(seed: int, t: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & _MASK64, counter=[0, 0, t, 0]))


def _space(n: int, r: int) -> int:
    if r < 1 or n < r:
        raise OutOfRange(f"need 1 <= r <= n, got n={n}, r={r}")
    N = comb(n, r)
    if N >= _MAX_N:
        raise OutOfRange(f"C({n},{r}) is too large for the sampler")
    return N


def _floyd(g: np.random.Generator, N: int, m: int) -> np.ndarray:
    """Floyd's algorithm: m distinct ranks in [0, N)."""
    if m == 0:
        return np.empty(0, dtype=np.int64)
    highs = np.arange(N - m + 1, N + 1, dtype=np.int64)
    t = g.integers(0, highs)
    u = np.unique(t)
    if len(u) == m and u[-1] < N - m:
        return u
    chosen: set[int] = set()
    for j, tj in zip(range(N - m, N), t.tolist()):
        chosen.add(j if tj in chosen else tj)
    return np.array(sorted(chosen), dtype=np.int64)


def _skips(g: np.random.Generator, N: int, p: float) -> np.ndarray:
    """Ranks kept independently with probability p, by geometric skips."""
    if p <= 0:
        return np.empty(0, dtype=np.int64)
    if p >= 1:
        return np.arange(N, dtype=np.int64)
    mu = N * p
    chunk = int(min(N, mu + 10 * math.sqrt(mu) + 16))
    parts = []
    pos = -1
    while True:
        steps = np.cumsum(g.geometric(p, size=chunk)) + pos
        if steps[-1] >= N:
            parts.append(steps[steps < N])
            break
        parts.append(steps)
        pos = int(steps[-1])
    return np.concatenate(parts).astype(np.int64)


class Colex:
    """Colexicographic rank/unrank of r-subsets of [n] via cumulative binomial tables."""

    def __init__(self, n: int, r: int):
        self.n, self.r = n, r
        self.tables = [np.array([comb(c, i) for c in range(n)], dtype=np.int64) for i in range(1, r + 1)]

    def unrank(self, ranks: np.ndarray) -> np.ndarray:
        """(len(ranks), r) array of 1-based vertices, each row increasing."""
        x = np.asarray(ranks, dtype=np.int64).copy()
        out = np.empty((len(x), self.r), dtype=np.int64)
        top = self.n - 1
        for i in range(self.r, 0, -1):
            tab = self.tables[i - 1]
            # c = largest index with C(c, i) <= x: start from the real-root estimate, then step
            guess = (x.astype(np.float64) * math.factorial(i)) ** (1.0 / i) + (i - 1) / 2.0
            c = np.clip(guess.astype(np.int64), 0, top)
            while True:
                hi = tab[c] > x
                if not hi.any():
                    break
                c[hi] -= 1
            while True:
                lo = (c < top) & (tab[np.minimum(c + 1, top)] <= x)
                if not lo.any():
                    break
                c[lo] += 1
            x -= tab[c]
            out[:, i - 1] = c + 1
        return out

    def rank(self, edge: Sequence[int]) -> int:
        return sum(comb(v - 1, i + 1) for i, v in enumerate(sorted(edge)))


def _to_hypergraph(n: int, r: int, verts: np.ndarray) -> Hypergraph:
    return _from_canonical(n, r, sorted(tuple(row) for row in verts.tolist()))


def _check_m(n: int, r: int, m: int) -> int:
    N = _space(n, r)
    if m < 0 or m > N:
        raise OutOfRange(f"m={m} outside 0..{N}")
    return N


def _check_p(p) -> float:
    p = float(p)
    if not 0 <= p <= 1:
        raise OutOfRange(f"p={p} outside [0,1]")
    return p


def sample_fixed(n: int, r: int, m: int, seed: int, trial: int = 0) -> Hypergraph:
    """Uniform member of H_r(n,m) from stream (seed, trial)."""
    N = _check_m(n, r, m)
    ranks = _floyd(trial_generator(seed, trial), N, m)
    return _to_hypergraph(n, r, Colex(n, r).unrank(ranks))


def sample_binomial(n: int, r: int, p, seed: int, trial: int = 0) -> Hypergraph:
    """H_r(n,p) from stream (seed, trial)."""
    N = _space(n, r)
    ranks = _skips(trial_generator(seed, trial), N, _check_p(p))
    return _to_hypergraph(n, r, Colex(n, r).unrank(ranks))


# --- batched trial evaluation ----------------------------------------------------------

@dataclass(frozen=True)
class _Model:
    n: int
    r: int
    m: int | None
    p: float | None

    def ranks(self, streams: TrialStreams, t: int, N: int) -> np.ndarray:
        g = streams.at(t)
        if self.m is not None:
            return _floyd(g, N, self.m)
        return _skips(g, N, self.p)


class _Batch:
    """Vertex rows of a block of trials, flattened with a row index per edge."""

    def __init__(self, model: _Model, colex: Colex, rank_lists: list[np.ndarray]):
        self.n, self.r = model.n, model.r
        self.rows = len(rank_lists)
        self.sizes = np.array([len(x) for x in rank_lists], dtype=np.int64)
        self.ranks = np.concatenate(rank_lists) if rank_lists else np.empty(0, dtype=np.int64)
        self.row_of = np.repeat(np.arange(self.rows, dtype=np.int64), self.sizes)
        self.offsets = np.concatenate([[0], np.cumsum(self.sizes)])
        self.verts = colex.unrank(self.ranks)

    def nonlinear_rows(self) -> np.ndarray:
        """Boolean per row: some vertex pair lies in two edges."""
        bad = np.zeros(self.rows, dtype=bool)
        if self.r < 2 or len(self.ranks) == 0:
            return bad
        n = self.n
        keys = []
        for a in range(self.r):
            for b in range(a + 1, self.r):
                keys.append(self.row_of * (n * n) + (self.verts[:, a] - 1) * n + (self.verts[:, b] - 1))
        k = np.sort(np.concatenate(keys))
        dup = k[1:] == k[:-1]
        if dup.any():
            bad[np.unique(k[1:][dup] // (n * n))] = True
        return bad

    def max_degree(self) -> np.ndarray:
        n = self.n
        if len(self.ranks) == 0:
            return np.zeros(self.rows, dtype=np.int64)
        keys, counts = np.unique((self.row_of[:, None] * n + (self.verts - 1)).ravel(), return_counts=True)
        out = np.zeros(self.rows, dtype=np.int64)
        np.maximum.at(out, keys // n, counts)
        return out

    def row_vertices(self, i: int) -> np.ndarray:
        return self.verts[int(self.offsets[i]):int(self.offsets[i + 1])]


def _blocks(trials: int) -> list[tuple[int, int]]:
    return [(a, min(trials, a + BATCH)) for a in range(0, trials, BATCH)]


def _run(fn, args_of, trials: int, threads: int | None):
    if trials < 1:
        raise ZeroTrials("trials must be >= 1")
    threads = default_threads() if threads is None else threads
    jobs = [args_of(a, b) for a, b in _blocks(trials)]
    return pmap(fn, jobs, threads if len(jobs) > 1 else 1)


def _make_batch(model: _Model, seed: int, a: int, b: int) -> _Batch:
    N = comb(model.n, model.r)
    streams = TrialStreams(seed)
    return _Batch(model, Colex(model.n, model.r), [model.ranks(streams, t, N) for t in range(a, b)])


def _linear_block(job: tuple[_Model, int, int, int]) -> int:
    model, seed, a, b = job
    batch = _make_batch(model, seed, a, b)
    return int(batch.rows - batch.nonlinear_rows().sum())


def estimate_linearity(n: int, r: int, m: int | None = None, p=None, trials: int = 10**4,
                       seed: int = 0, threads: int | None = None) -> Estimate:
    """Fraction of sampled H_r(n,m) (or H_r(n,p)) that are linear."""
    if (m is None) == (p is None):
        raise OutOfRange("give exactly one of m, p")
    if m is not None:
        _check_m(n, r, m)
    else:
        _space(n, r)
        p = _check_p(p)
    model = _Model(n, r, m, p)
    hits = _run(_linear_block, lambda a, b: (model, seed, a, b), trials, threads)
    return bernoulli_estimate(sum(hits), trials, seed)


@dataclass(frozen=True)
class ProfileEstimates:
    profiles: dict[ClusterProfile, Estimate]
    plus: Estimate
    plusplus: Estimate
    regime: Regime


def _profile_block(job) -> tuple[dict, int, int]:
    model, seed, a, b, regime = job
    ts = thresholds(model.n, model.r, model.m, regime)
    batch = _make_batch(model, seed, a, b)
    bad = batch.nonlinear_rows()
    maxdeg = batch.max_degree()
    tally: dict[tuple, int] = {}
    plus = pp = 0
    zero = ClusterProfile().as_tuple()
    for i in range(batch.rows):
        if not bad[i]:
            d = int(maxdeg[i])
            if regime is Regime.SPARSE:
                ip = ipp = True
            else:
                ip, ipp = d <= ts.m0_cap, d <= ts.m0_star
            key = zero
        else:
            H = _to_hypergraph(model.n, model.r, batch.row_vertices(i))
            rep = property_report(H, regime, ts)
            ip, ipp, key = rep.in_plus, rep.in_plusplus, rep.profile.as_tuple()
        tally[key] = tally.get(key, 0) + 1
        plus += ip
        pp += ipp
    return tally, plus, pp


def estimate_profile_distribution(n: int, r: int, m: int, trials: int, seed: int = 0,
                                  regime: Regime | None = None, threads: int | None = None) -> ProfileEstimates:
    """Empirical cluster-profile frequencies and plus / plusplus membership over H_r(n,m)."""
    _check_m(n, r, m)
    regime = thresholds(n, r, m, regime).regime
    model = _Model(n, r, m, None)
    parts = _run(_profile_block, lambda a, b: (model, seed, a, b, regime), trials, threads)
    tally: dict[tuple, int] = {}
    plus = pp = 0
    for t, a, b in parts:
        for k, v in t.items():
            tally[k] = tally.get(k, 0) + v
        plus += a
        pp += b
    profiles = {ClusterProfile(*k): bernoulli_estimate(v, trials, seed) for k, v in sorted(tally.items())}
    return ProfileEstimates(profiles, bernoulli_estimate(plus, trials, seed),
                            bernoulli_estimate(pp, trials, seed), regime)


def _moment_block(job) -> tuple[int, int, int, int, int]:
    model, seed, a, b = job
    batch = _make_batch(model, seed, a, b)
    ok = ~batch.nonlinear_rows()
    x = [int(s) for s in batch.sizes[ok].tolist()]
    return len(x), sum(x), sum(v * v for v in x), sum(v**3 for v in x), sum(v**4 for v in x)


@dataclass(frozen=True)
class ConditionalMoments:
    mean: Estimate
    variance: Estimate
    acceptance_rate: float
    accepted: int


def estimate_conditional_moments(n: int, r: int, p, trials: int, seed: int = 0,
                                 threads: int | None = None,
                                 min_acceptance: float = MIN_ACCEPTANCE) -> ConditionalMoments:
    """Mean and variance of the edge count of H_r(n,p) given that it is linear (rejection sampling)."""
    _space(n, r)
    p = _check_p(p)
    if r >= 3 and binomial_linear_log_prob(n, r, p)[0] < math.log(min_acceptance):
        raise AcceptanceTooLow(f"predicted linearity probability below {min_acceptance}")
    model = _Model(n, r, None, p)
    parts = _run(_moment_block, lambda a, b: (model, seed, a, b), trials, threads)
    k = sum(q[0] for q in parts)
    if k == 0 or k < min_acceptance * trials:
        raise AcceptanceTooLow(f"{k} of {trials} samples linear, below acceptance floor {min_acceptance}")
    s1, s2, s3, s4 = (sum(q[i] for q in parts) for i in range(1, 5))
    mean = s1 / k
    # exact integer sums, then central moments
    var = (s2 - s1 * s1 / k) / (k - 1) if k > 1 else 0.0
    m2 = s2 / k - mean**2
    m4 = s4 / k - 4 * mean * s3 / k + 6 * mean**2 * s2 / k - 3 * mean**4
    se_mean = math.sqrt(var / k) if k > 1 else 0.0
    se_var = math.sqrt(max(m4 - m2 * m2, 0.0) / k)
    return ConditionalMoments(_mean_estimate(mean, se_mean, k, seed), _mean_estimate(var, se_var, k, seed),
                              k / trials, k)


def _contain_block(job) -> tuple[int, int]:
    model, seed, a, b, kranks = job
    batch = _make_batch(model, seed, a, b)
    ok = ~batch.nonlinear_rows()
    N = comb(model.n, model.r)
    keys = np.sort(batch.row_of * N + batch.ranks)
    hit = np.ones(batch.rows, dtype=bool)
    rows = np.arange(batch.rows, dtype=np.int64)
    for kr in kranks:
        want = rows * N + kr
        pos = np.searchsorted(keys, want)
        pos = np.minimum(pos, len(keys) - 1) if len(keys) else pos
        hit &= (keys[pos] == want) if len(keys) else np.zeros(batch.rows, dtype=bool)
    return int(ok.sum()), int((ok & hit).sum())


def estimate_containment(n: int, r: int, m: int, K: Hypergraph, trials: int, seed: int = 0,
                         threads: int | None = None, min_acceptance: float = MIN_ACCEPTANCE) -> Estimate:
    """P[K subset of H] for H uniform in L_r(n,m), by rejection from H_r(n,m)."""
    _check_m(n, r, m)
    if not is_linear(K):
        raise NotLinearK("K is not linear")
    if K.n != n or K.r != r:
        raise OutOfRange("K must live on the same [n] with the same r")
    if r >= 3 and linear_count_exponent(n, r, m)[0] < math.log(min_acceptance):
        raise AcceptanceTooLow(f"predicted linearity probability below {min_acceptance}")
    if K.m == 0:
        return bernoulli_estimate(trials, trials, seed) if trials >= 1 else bernoulli_estimate(0, 0, seed)
    colex = Colex(n, r)
    kranks = [colex.rank(e) for e in K.edges]
    model = _Model(n, r, m, None)
    parts = _run(_contain_block, lambda a, b: (model, seed, a, b, kranks), trials, threads)
    acc = sum(q[0] for q in parts)
    if acc == 0 or acc < min_acceptance * trials:
        raise AcceptanceTooLow(f"{acc} of {trials} samples linear, below acceptance floor {min_acceptance}")
    return bernoulli_estimate(sum(q[1] for q in parts), acc, seed)


def sample_many(n: int, r: int, seed: int, count: int, m: int | None = None, p=None,
                linear_only: bool = False, max_attempts: int | None = None) -> Iterable[tuple[int, Hypergraph]]:
    """(trial index, hypergraph) pairs for trials 0, 1, ...; with linear_only, skip nonlinear draws."""
    if (m is None) == (p is None):
        raise OutOfRange("give exactly one of m, p")
    N = _check_m(n, r, m) if m is not None else _space(n, r)
    if p is not None:
        p = _check_p(p)
    model = _Model(n, r, m, p)
    streams = TrialStreams(seed)
    colex = Colex(n, r)
    limit = max_attempts if max_attempts is not None else 1000 * max(count, 1)
    made = 0
    t = 0
    while made < count:
        if t >= limit:
            raise AcceptanceTooLow(f"only {made} linear samples in {limit} attempts")
        H = _to_hypergraph(n, r, colex.unrank(model.ranks(streams, t, N)))
        t += 1
        if linear_only and not is_linear(H):
            continue
        made += 1
        yield t - 1, H
