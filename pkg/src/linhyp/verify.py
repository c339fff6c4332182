"""The acceptance battery, shared by `linhyp verify` and the test suite.

Each criterion returns a CriterionResult made of named checks.  Reports
carry no timings so that equal seeds give byte-identical JSON.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Callable

import numpy as np

from . import asymptotics as asy
from .config import RunConfig
from .core import build, count_conflict_free_sets, popcount, vertex_mask
from .exact import (
    count_all,
    count_linear,
    count_linear_bruteforce,
    count_linear_containing,
    count_linear_vector,
    edge_set_probability,
    profile_census,
    rsets,
)
from .montecarlo import (
    estimate_conditional_moments,
    estimate_containment,
    estimate_linearity,
    estimate_profile_distribution,
    sample_fixed,
)
from .switching import double_count_audit


@dataclass
class Check:
    name: str
    passed: bool
    observed: object = None
    predicted: object = None
    tolerance: object = None
    note: str = ""

    def to_json(self) -> dict:
        out = {"name": self.name, "passed": bool(self.passed)}
        for key in ("observed", "predicted", "tolerance"):
            val = getattr(self, key)
            if val is not None:
                out[key] = _plain(val)
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class CriterionResult:
    id: int
    title: str
    checks: list[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"id": self.id, "title": self.title, "passed": self.passed,
                "checks": [c.to_json() for c in self.checks]}

    def line(self) -> str:
        failed = [c.name for c in self.checks if not c.passed]
        tail = f" (failed: {', '.join(failed)})" if failed else ""
        return f"{'PASS' if self.passed else 'FAIL'} criterion {self.id}: {self.title}{tail}"


def _plain(v):
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, int) and not isinstance(v, bool) and abs(v) >= 2**53:
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def _agree(obs: float, pred: float, es: float, se: float, cfg: RunConfig) -> tuple[bool, float]:
    tol = cfg.tolerance_multiplier * es + cfg.z * se
    return abs(obs - pred) <= tol, tol


# --- criteria --------------------------------------------------------------------------

def c1_oracle(cfg: RunConfig, full: bool = True) -> CriterionResult:
    res = CriterionResult(1, "exact oracle correctness")
    res.checks.append(Check("count_linear(5,3,2)", count_linear(5, 3, 2) == 15, count_linear(5, 3, 2), 15))
    res.checks.append(Check("count_all(5,3,2)", count_all(5, 3, 2) == 45, count_all(5, 3, 2), 45))
    cen = profile_census(5, 3, 2).by_profile()
    got = {"".join(map(str, p.as_tuple())): v for p, v in cen.items()}
    res.checks.append(Check("profile_census(5,3,2)", got == {"00000": 15, "00010": 30}, got,
                            {"00000": 15, "00010": 30}))
    bad = []
    for n in range(3, 8):
        for m in range(0, 4):
            if m > comb(n, 3):
                continue
            a, b = count_linear(n, 3, m), count_linear_bruteforce(n, 3, m)
            if a != b:
                bad.append([n, m, a, b])
    res.checks.append(Check("DFS == subset filter, n<=7, r=3, m<=3", not bad, bad or "all equal"))
    return res


def c2_monotone(cfg: RunConfig, grids=((5, 3), (6, 3), (7, 3), (8, 3), (9, 4))) -> CriterionResult:
    res = CriterionResult(2, "P_r(n,m) non-increasing in m")
    for n, r in grids:
        N = comb(n, r)
        L = count_linear_vector(n, r, None, cfg.dfs_node_cap)
        L = L + [0] * (N + 1 - len(L))
        P = [Fraction(L[m], comb(N, m)) for m in range(N + 1)]
        ok = all(P[m + 1] <= P[m] for m in range(N))
        res.checks.append(Check(f"({n},{r}) over m=0..{N}", ok, len([1 for x in L if x])))
        res.data[f"{n},{r}"] = [float(x) for x in P]
    return res


def c3_fixed_m_mc(cfg: RunConfig, n=1000, r=3, m=150, trials=10**6) -> CriterionResult:
    res = CriterionResult(3, "fixed-m linearity probability vs exp(E)")
    E, _ = asy.linear_count_exponent(n, r, m)
    es = asy.linear_count_error_scale(n, r, m).value
    est = estimate_linearity(n, r, m=m, trials=trials, seed=cfg.seed + 3, threads=cfg.threads)
    ok, tol = _agree(est.point, math.exp(E), es, est.stderr, cfg)
    res.checks.append(Check(f"|freq - exp(E)| at ({n},{r},{m})", ok, est.point, math.exp(E), tol))
    res.data.update(freq=est.point, stderr=est.stderr, predicted=math.exp(E), es=es)
    return res


def c4_trend(cfg: RunConfig, ns=(200, 500, 1000), r=3, c=0.15, trials=200_000) -> CriterionResult:
    res = CriterionResult(4, "fixed-m trend: normalised error does not grow with n")
    ratios = []
    for k, n in enumerate(ns):
        m = int(c * n)
        E, _ = asy.linear_count_exponent(n, r, m)
        es = asy.linear_count_error_scale(n, r, m).value
        est = estimate_linearity(n, r, m=m, trials=trials, seed=cfg.seed + 40 + k, threads=cfg.threads)
        ratio = abs(math.log(est.point) - E) / es
        se = est.stderr / est.point / es
        ratios.append((n, m, ratio, se))
        ok = ratio <= cfg.tolerance_multiplier + cfg.z * se
        res.checks.append(Check(f"n={n}: |ln freq - E|/ES <= multiplier", ok, ratio,
                                tolerance=cfg.tolerance_multiplier + cfg.z * se))
    (_, _, r0, s0), (_, _, r1, s1) = ratios[0], ratios[-1]
    lim = r0 + cfg.z * math.hypot(s0, s1)
    res.checks.append(Check(f"ratio(n={ns[-1]}) <= ratio(n={ns[0]}) + z se", r1 <= lim, r1, r0, lim))
    res.data["ratios"] = [list(x) for x in ratios]
    return res


def c5_binomial_mc(cfg: RunConfig, n=1000, r=3, m0=150, trials=10**6) -> CriterionResult:
    res = CriterionResult(5, "binomial-model linearity probability vs case formula")
    p = m0 / comb(n, r)
    val, es, case = asy.binomial_linear_log_prob(n, r, p)
    est = estimate_linearity(n, r, p=p, trials=trials, seed=cfg.seed + 5, threads=cfg.threads)
    ok, tol = _agree(est.point, math.exp(val), es.value, est.stderr, cfg)
    res.checks.append(Check(f"|freq - exp(formula)| ({case})", ok, est.point, math.exp(val), tol))
    res.data.update(freq=est.point, stderr=est.stderr, predicted=math.exp(val), es=es.value, case=case)
    return res


def c6_conditional(cfg: RunConfig, n=1000, r=3, m0=150, trials=130_000) -> CriterionResult:
    res = CriterionResult(6, "edge count conditioned on linearity")
    p = m0 / comb(n, r)
    mean_pred, var_pred = asy.conditional_edge_params(n, r, p)
    cm = estimate_conditional_moments(n, r, p, trials, seed=cfg.seed + 6, threads=cfg.threads)
    mu, smu = cm.mean.point, cm.mean.stderr
    res.checks.append(Check("accepted >= 1e5", cm.accepted >= 100_000, cm.accepted, 100_000))
    res.checks.append(Check("mean within 3 sigma of prediction", abs(mu - mean_pred) <= 3 * smu,
                            mu, mean_pred, 3 * smu))
    zshift = (m0 - mu) / smu
    res.checks.append(Check("shift below m0 detected at z > 3", zshift > 3, zshift, 3))
    v, sv = cm.variance.point, cm.variance.stderr
    res.checks.append(Check("variance within 5 sigma of m0", abs(v - var_pred) <= 5 * sv, v, var_pred, 5 * sv))
    res.data.update(mean=mu, se_mean=smu, var=v, se_var=sv, acceptance=cm.acceptance_rate)
    return res


def c7_containment(cfg: RunConfig, trials=200_000) -> CriterionResult:
    res = CriterionResult(7, "containment probability at (5,3,2), K={{1,2,3}}")
    K = build(5, 3, [(1, 2, 3)])
    exact = Fraction(count_linear_containing(5, 3, 2, K), count_linear(5, 3, 2))
    res.checks.append(Check("exact ratio == 1/5", exact == Fraction(1, 5), exact, Fraction(1, 5)))
    val, es = asy.containment_log_prob(5, 3, 2, 1)
    formula = math.exp(val)
    rel = abs(formula - 0.2) / 0.2
    res.checks.append(Check("formula within 1% of 0.2", rel <= 0.01, formula, 0.2, 0.01,
                            note="exponent [r]_2^2 k^2/(4n^2) is 0.36 at n=5"))
    ok_es = abs(val - math.log(0.2)) <= cfg.tolerance_multiplier * es.value
    res.checks.append(Check("formula within multiplier x ErrorScale (log scale)", ok_es, val, math.log(0.2),
                            cfg.tolerance_multiplier * es.value))
    est = estimate_containment(5, 3, 2, K, trials, seed=cfg.seed + 7, threads=cfg.threads)
    res.checks.append(Check("MC within 4 sigma of 0.2", abs(est.point - 0.2) <= 4 * est.stderr,
                            est.point, 0.2, 4 * est.stderr))
    return res


AUDIT_GRID = ((8, 3, 3, 4, (0, 0, 0, 1)), (12, 4, 3, 2, (0, 1, 0, 0)),
              (12, 4, 3, 3, (0, 0, 1, 0)), (12, 4, 3, 4, (0, 0, 0, 1)))


def c8_audit(cfg: RunConfig, grid=AUDIT_GRID) -> CriterionResult:
    res = CriterionResult(8, "switching double count and ratio sandwich")
    for n, r, m, i, prof in grid:
        rep = double_count_audit(n, r, m, i, prof, cap=cfg.census_cap)
        tag = f"({n},{r},{m}) Type-{i}"
        res.checks.append(Check(f"{tag} forward == reverse", rep.equal, rep.to_json()["forward_total"],
                                rep.to_json()["reverse_total"]))
        rb = rep.to_json()["ratio_bounds"]
        res.checks.append(Check(f"{tag} sandwich", rep.sandwich_ok, rb["observed"], [rb["lo"], rb["hi"]]))
    return res


CF_GRIDS = ((5, 3, 1), (5, 3, 2), (5, 3, 3), (6, 3, 2), (7, 3, 2), (8, 3, 2), (8, 3, 3), (9, 4, 2))


def _cf_filter_counts(n: int, r: int, m: int, ts: list[int]) -> dict[int, np.ndarray]:
    """Subset-filter counts of conflict-free t-sets for every H in H_r(n,m), in census order."""
    emasks = np.array([vertex_mask(e) for e in rsets(n, r)], dtype=np.int64)
    combos = np.array(list(combinations(range(len(emasks)), m)), dtype=np.int64).reshape(-1, m)
    H = emasks[combos]
    out = {}
    for t in ts:
        subs = np.array([vertex_mask(s) for s in combinations(range(1, n + 1), t)], dtype=np.int64)
        ok = np.ones((len(H), len(subs)), dtype=bool)
        for j in range(m):
            ok &= np.bitwise_count(H[:, j:j + 1] & subs[None, :]) <= 1
        out[t] = ok.sum(axis=1)
    return out


def c9_conflict_free(cfg: RunConfig, grids=CF_GRIDS) -> CriterionResult:
    res = CriterionResult(9, "conflict-free counters")
    for n, r, m in grids:
        ts = list(range(r, min(n, 3 * r - 4) + 1))
        brute = _cf_filter_counts(n, r, m, ts)
        mism = 0
        for idx, combo in enumerate(combinations(rsets(n, r), m)):
            H = build(n, r, combo)
            for t in ts:
                if count_conflict_free_sets(H, t) != int(brute[t][idx]):
                    mism += 1
        res.checks.append(Check(f"({n},{r},{m}) all H, t={ts[0]}..{ts[-1]}", mism == 0, mism, 0))
    H = sample_fixed(100, 3, 10, seed=cfg.seed + 9)
    exact = count_conflict_free_sets(H, 3)
    lead = asy.expected_conflict_free_sets(100, 3, 10, 3)
    rel = abs(lead - exact) / exact
    res.checks.append(Check("leading term within 1% at (100,3,10,t=3)", rel <= 0.01, exact, lead, 0.01))
    return res


def random_spec_simple(rng: np.random.Generator) -> asy.SummationSpec:
    N = int(rng.integers(2, 61))
    chat = float(rng.uniform(1e-3, 1 / 3 - 1e-3))
    A, B = [], []
    for i in range(1, N + 1):
        a = 0.0 if rng.random() < 0.02 else float(rng.uniform(0, chat * N))
        c = float(rng.uniform(-chat, chat))
        b = c / a if a > 0 else 0.0
        if i > 1 and b > 1 / (i - 1):
            b = 1 / (i - 1) if rng.random() < 0.5 else float(rng.uniform(0, 1 / (i - 1)))
            if abs(a * b) > chat:
                b = chat / a
        A.append(a)
        B.append(b)
    return asy.SummationSpec(N, A, B, chat=chat)


def random_spec_perturbed(rng: np.random.Generator) -> asy.SummationSpec:
    N = int(rng.integers(2, 41))
    K = int(rng.integers(0, min(N, 3) + 1))
    w = rng.uniform(0, 1, K + 1)
    gamma = [0.199 * float(w[j]) / ((K + 1) * math.perm(N, j)) for j in range(K + 1)]
    g = [math.fsum(gj * math.perm(i, j) for j, gj in enumerate(gamma)) for i in range(N + 1)]
    delta, run = [], 0.0
    for i in range(1, N + 1):
        d = float(rng.uniform(0, 1)) * (g[i] - run)
        run += d
        delta.append(d if rng.random() < 0.5 else -d)
    c = 2 * math.e + float(rng.uniform(1e-6, 10))
    amax = (N - K + 1) / c
    A = [0.0 if rng.random() < 0.02 else float(rng.uniform(0, amax * 0.999999)) for _ in range(N)]
    B = [float(rng.uniform(-0.999, 0.999)) / N for _ in range(N)]
    return asy.SummationSpec(N, A, B, delta=delta, gamma=gamma, c=c)


def c10_bounds(cfg: RunConfig, n_ff=10_000, n_specs=1000, n_chern=30) -> CriterionResult:
    res = CriterionResult(10, "bound suites")
    rng = np.random.default_rng(cfg.seed + 10)
    viol = 0
    for _ in range(n_ff):
        N = int(rng.integers(1, 2000))
        m = int(rng.integers(0, N + 1))
        t = int(rng.integers(0, min(m, 30) + 1))
        if edge_set_probability(N, m, t) > Fraction(m, N) ** t:
            viol += 1
    res.checks.append(Check(f"[m]_t/[N]_t <= (m/N)^t on {n_ff} triples", viol == 0, viol, 0))
    viol = 0
    cases = 0
    for N in range(1, n_chern + 1):
        for tenth in range(1, 10):
            p = Fraction(tenth, 10)
            mu = N * p
            for t in range(1, math.floor(mu) + 1):
                cases += 1
                if float(asy.binomial_two_sided_tail(N, p, t)) > asy.chernoff_bound(N, float(p), t):
                    viol += 1
    res.checks.append(Check(f"Chernoff >= exact tail ({cases} cases, N<={n_chern})", viol == 0, viol, 0))
    for variant, gen in (("perturbed", random_spec_perturbed), ("simple", random_spec_simple)):
        viol = 0
        for _ in range(n_specs):
            if not asy.summation_bounds(gen(rng), variant).ok:
                viol += 1
        res.checks.append(Check(f"{variant} summation sandwich on {n_specs} random specs", viol == 0, viol, 0))
    return res


def c11_class_mass(cfg: RunConfig, n=500, r=3, m=100, trials=100_000) -> CriterionResult:
    res = CriterionResult(11, "plusplus class mass")
    pe = estimate_profile_distribution(n, r, m, trials, seed=cfg.seed + 11, threads=cfg.threads)
    miss = 1 - pe.plusplus.point
    es = r**6 * m * m / n**3
    tol = cfg.tolerance_multiplier * es + cfg.z * pe.plusplus.stderr
    res.checks.append(Check("1 - plusplus frequency <= multiplier x ES + z se", miss <= tol, miss, es, tol))
    res.data.update(miss=miss, es=es, regime=pe.regime.value)
    return res


def c12_determinism(cfg: RunConfig, runner: Callable[[int], str] | None = None) -> CriterionResult:
    """Byte-compare quick-suite reports produced with 1 and 2 worker threads."""
    from dataclasses import replace
    import json

    res = CriterionResult(12, "determinism across thread counts")
    if runner is None:
        def runner(threads: int) -> str:
            rep = run_suite("quick", replace(cfg, threads=threads))
            return json.dumps(report_json(rep, cfg), sort_keys=True, indent=2)
    a, b = runner(1), runner(2)
    res.checks.append(Check("quick report identical for threads=1 and threads=2", a == b))
    return res


# --- suites ----------------------------------------------------------------------------

def _quick_suite(cfg: RunConfig) -> list[CriterionResult]:
    out = [c1_oracle(cfg), c2_monotone(cfg, grids=((5, 3), (6, 3), (7, 3)))]
    c3 = c3_fixed_m_mc(cfg, trials=20_000)
    c3.title += " (reduced trials)"
    out.append(c3)
    out.append(c7_containment(cfg, trials=20_000))
    out.append(c8_audit(cfg, grid=AUDIT_GRID[:1]))
    out.append(c9_conflict_free(cfg, grids=((5, 3, 2), (6, 3, 2))))
    out.append(c10_bounds(cfg, n_ff=1000, n_specs=100, n_chern=12))
    return out


def _all_suite(cfg: RunConfig) -> list[CriterionResult]:
    return [c1_oracle(cfg), c2_monotone(cfg), c3_fixed_m_mc(cfg), c4_trend(cfg), c5_binomial_mc(cfg),
            c6_conditional(cfg), c7_containment(cfg), c8_audit(cfg), c9_conflict_free(cfg), c10_bounds(cfg),
            c11_class_mass(cfg), c12_determinism(cfg)]


SUITES = {"quick": _quick_suite, "all": _all_suite}


def run_suite(name: str, cfg: RunConfig) -> list[CriterionResult]:
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](cfg)


def report_json(results: list[CriterionResult], cfg: RunConfig, suite: str = "quick") -> dict:
    return {
        "suite": suite,
        "seed": cfg.seed,
        "tolerance_multiplier": cfg.tolerance_multiplier,
        "z": cfg.z,
        "passed": all(r.passed for r in results),
        "criteria": [r.to_json() for r in results],
    }


def report_rows(results: list[CriterionResult]) -> list[list]:
    rows = [["criterion", "check", "passed", "observed", "predicted", "tolerance"]]
    for res in results:
        for c in res.checks:
            rows.append([res.id, c.name, c.passed, _plain(c.observed), _plain(c.predicted), _plain(c.tolerance)])
    return rows
