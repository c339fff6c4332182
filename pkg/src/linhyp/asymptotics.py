"""Log-space evaluation of the closed-form enumeration formulas.

Every evaluator returns its value together with an ErrorScale: the size of
the O(.) argument with implied constant 1, so comparisons are always made
against a multiple of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

from .core import Regime, auto_regime
from .errors import NegativeT, OutOfRange, PreconditionFailed

EXACT_BINOMIAL_LIMIT = 10**6


@dataclass(frozen=True, slots=True)
class LogNumber:
    """sign * exp(ln_mag); sign 0 means the value is exactly zero."""

    sign: int
    ln_mag: float

    @staticmethod
    def zero() -> "LogNumber":
        return LogNumber(0, -math.inf)

    @staticmethod
    def one() -> "LogNumber":
        return LogNumber(1, 0.0)

    @staticmethod
    def of(x) -> "LogNumber":
        if x == 0:
            return LogNumber.zero()
        sign = 1 if x > 0 else -1
        ax = abs(x)
        ln = math.log(ax) if not isinstance(ax, Fraction) else math.log(ax.numerator) - math.log(ax.denominator)
        return LogNumber(sign, ln)

    def __mul__(self, other: "LogNumber") -> "LogNumber":
        if self.sign == 0 or other.sign == 0:
            return LogNumber.zero()
        return LogNumber(self.sign * other.sign, self.ln_mag + other.ln_mag)

    def __truediv__(self, other: "LogNumber") -> "LogNumber":
        if other.sign == 0:
            raise ZeroDivisionError("LogNumber division by zero")
        if self.sign == 0:
            return LogNumber.zero()
        return LogNumber(self.sign * other.sign, self.ln_mag - other.ln_mag)

    def __pow__(self, k: int) -> "LogNumber":
        if k == 0:
            return LogNumber.one()
        if self.sign == 0:
            if k < 0:
                raise ZeroDivisionError("zero to a negative power")
            return LogNumber.zero()
        sign = self.sign if k % 2 else 1
        return LogNumber(sign, self.ln_mag * k)

    def __add__(self, other: "LogNumber") -> "LogNumber":
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        hi, lo = (self, other) if self.ln_mag >= other.ln_mag else (other, self)
        d = math.exp(lo.ln_mag - hi.ln_mag)
        if hi.sign == lo.sign:
            return LogNumber(hi.sign, hi.ln_mag + math.log1p(d))
        if d == 1.0:
            return LogNumber.zero()
        return LogNumber(hi.sign, hi.ln_mag + math.log1p(-d))

    def __neg__(self) -> "LogNumber":
        return LogNumber(-self.sign, self.ln_mag)

    def __sub__(self, other: "LogNumber") -> "LogNumber":
        return self + (-other)

    def mul_exp(self, x: float) -> "LogNumber":
        """self * e^x."""
        if self.sign == 0:
            return self
        return LogNumber(self.sign, self.ln_mag + x)

    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.ln_mag)


@dataclass(frozen=True)
class ErrorScale:
    value: float
    terms: dict[str, float] = field(default_factory=dict)

    @staticmethod
    def of(**terms: float) -> "ErrorScale":
        return ErrorScale(math.fsum(terms.values()), dict(terms))


def _fall(r: int) -> int:
    return r * (r - 1)


def log_falling_factorial(x, t: int) -> LogNumber:
    """[x]_t = x(x-1)...(x-t+1) in log space, with sign."""
    if t < 0:
        raise NegativeT(f"t={t} < 0")
    if t == 0:
        return LogNumber.one()
    if isinstance(x, int) or (isinstance(x, float) and x.is_integer()):
        xi = int(x)
        if 0 <= xi < t:
            return LogNumber.zero()
        if xi >= t:
            if t <= 10**5:
                return LogNumber(1, math.fsum(math.log(xi - i) for i in range(t)))
            return LogNumber(1, math.lgamma(xi + 1) - math.lgamma(xi - t + 1))
    sign = 1
    logs = []
    for i in range(t):
        f = x - i
        if f == 0:
            return LogNumber.zero()
        if f < 0:
            sign = -sign
        logs.append(math.log(abs(f)))
    return LogNumber(sign, math.fsum(logs))


def log_binomial(a: int, b: int) -> LogNumber:
    if b < 0 or a < 0 or b > a:
        raise OutOfRange(f"need 0 <= b <= a, got a={a}, b={b}")
    if a <= EXACT_BINOMIAL_LIMIT:
        return LogNumber(1, math.log(comb(a, b)))
    b = min(b, a - b)
    if b <= 10**5:
        num = math.fsum(math.log(a - i) for i in range(b))
        return LogNumber(1, num - math.lgamma(b + 1))
    return LogNumber(1, math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1))


def _check_nrm(n: int, r: int, m: int) -> int:
    if r < 3 or n < r:
        raise OutOfRange(f"need 3 <= r <= n, got n={n}, r={r}")
    N = comb(n, r)
    if m < 0 or m > N:
        raise OutOfRange(f"m={m} outside 0..{N}")
    return N


def linear_count_exponent(n: int, r: int, m: int) -> tuple[float, dict[str, float]]:
    """E = -[r]_2^2 [m]_2/(4n^2) - [r]_2^3 (3r^2-15r+20) m^3/(24 n^4): the fixed-m linearity exponent."""
    _check_nrm(n, r, m)
    f = _fall(r)
    pair = -float(Fraction(f * f * m * (m - 1), 4 * n * n))
    cubic = -float(Fraction(f**3 * (3 * r * r - 15 * r + 20) * m**3, 24 * n**4))
    return pair + cubic, {"pair": pair, "cubic": cubic}


def linear_count_error_scale(n: int, r: int, m: int) -> ErrorScale:
    return ErrorScale.of(**{"r^6 m^2/n^3": float(Fraction(r**6 * m * m, n**3))})


def linear_log_count(n: int, r: int, m: int, form: str = "binomial") -> tuple[LogNumber, ErrorScale]:
    """ln |L_r(n,m)| ~ ln C(N,m) + E (binomial form) or ln(N^m/m!) + E (poisson form)."""
    N = _check_nrm(n, r, m)
    E, _ = linear_count_exponent(n, r, m)
    if form == "binomial":
        base = log_binomial(N, m)
    elif form == "poisson":
        base = LogNumber(1, m * math.log(N) - math.lgamma(m + 1))
    else:
        raise OutOfRange(f"unknown form {form!r}")
    return base.mul_exp(E), linear_count_error_scale(n, r, m)


def _refined_parts(n: int, r: int, m: int) -> dict[str, Fraction]:
    N = comb(n, r)
    D = N - comb(r, 2) * m * comb(n - 2, r - 2)
    return {"N": Fraction(N), "D": Fraction(D)}


def refined_inverse_prob(n: int, r: int, m: int, regime: Regime | None = None) -> float:
    """ln(1/P_r(n,m)) from the pre-simplification exponent of the regime's final summation.

    Dense uses all three displayed terms (Type-4 pair, its square correction,
    and the three-edge cluster term); Mid and Sparse use the single Type-4 term
    with [m]_2.
    """
    _check_nrm(n, r, m)
    regime = auto_regime(n, r, m) if regime is None else Regime(regime)
    D = _refined_parts(n, r, m)["D"]
    if D <= 0:
        raise OutOfRange("N - C(r,2) m C(n-2,r-2) must be positive")
    a = comb(2 * r - 2, 2) * comb(2 * r - 4, r - 2)
    cr2 = comb(r, 2)
    if regime is Regime.DENSE:
        fac = Fraction(r * r - r - 1, (r - 1) * (2 * r - 3))
        T4 = comb(n, 2 * r - 2) - fac * cr2 * m * comb(n - 2, 2 * r - 4)
        T3 = comb(n, 3 * r - 4) - cr2 * m * comb(n - 2, 3 * r - 6)
        bracket = 6 * comb(r, 4) + 3 * comb(r, 3) + Fraction(cr2, 6)
        t1 = Fraction(a * m * m) * T4 / (2 * D * D)
        t2 = -Fraction(a * a * m**3) * T4 * T4 / (2 * D**4)
        t3 = bracket * comb(3 * r - 4, r) * comb(2 * r - 4, r - 2) * m**3 * T3 / D**3
        return float(t1 + t2 + t3)
    T = comb(n, 2 * r - 2) - cr2 * m * comb(n - 2, 2 * r - 4)
    return float(Fraction(m * (m - 1) * a) * T / (2 * D * D))


def _m0(n: int, r: int, p) -> float:
    if p < 0 or p > 1:
        raise OutOfRange(f"p={p} outside [0,1]")
    return float(Fraction(p) * comb(n, r))


def binomial_linear_values(n: int, r: int, p) -> dict[str, tuple[float, ErrorScale]]:
    """Both case formulas for ln P[H_r(n,p) linear], keyed small_m0 / large_m0."""
    if r < 3 or n < r:
        raise OutOfRange(f"need 3 <= r <= n, got n={n}, r={r}")
    m0 = _m0(n, r, p)
    f = _fall(r)
    lead = -f * f * m0 * m0 / (4.0 * n * n)
    corr = f**3 * (3 * r - 5) * m0**3 / (6.0 * n**4)
    es_pair = r**6 * m0 * m0 / float(n) ** 3
    small = (lead, ErrorScale.of(**{"r^6 m0^2/n^3": es_pair}))
    big_es = {"r^6 m0^2/n^3": es_pair}
    big_es["ln^3(n/r^2)/sqrt(m0)"] = (abs(math.log(n / (r * r))) ** 3 / math.sqrt(m0)) if m0 > 0 else 0.0
    large = (lead + corr, ErrorScale.of(**big_es))
    return {"small_m0": small, "large_m0": large}


def binomial_case(n: int, r: int, p) -> str:
    return "large_m0" if _m0(n, r, p) * r * r >= n else "small_m0"


def binomial_linear_log_prob(n: int, r: int, p, case: str | None = None) -> tuple[float, ErrorScale, str]:
    vals = binomial_linear_values(n, r, p)
    case = binomial_case(n, r, p) if case is None else case
    if case not in vals:
        raise OutOfRange(f"unknown case {case!r}")
    v, es = vals[case]
    return v, es, case


def conditional_edge_params(n: int, r: int, p) -> tuple[float, float]:
    """Mean m0 - [r]_2^2 m0^2/(2n^2) and variance m0 of the edge count conditioned on linearity."""
    if r < 3 or n < r:
        raise OutOfRange(f"need 3 <= r <= n, got n={n}, r={r}")
    m0 = _m0(n, r, p)
    f = _fall(r)
    return m0 - f * f * m0 * m0 / (2.0 * n * n), m0


def containment_log_prob(n: int, r: int, m: int, k: int) -> tuple[float, ErrorScale]:
    """ln P[K subset H] ~ ln([m]_k/N^k) + [r]_2^2 k^2/(4n^2) for a fixed linear K with k edges."""
    N = _check_nrm(n, r, m)
    if k < 0:
        raise OutOfRange(f"k={k} < 0")
    es = ErrorScale.of(**{
        "r^4 k/n^2": r**4 * k / float(n) ** 2,
        "min(r^6 m^2 k/n^3, r^5 m k/n^2)": min(r**6 * m * m * k / float(n) ** 3, r**5 * m * k / float(n) ** 2),
    })
    if k == 0:
        return 0.0, es
    fall = log_falling_factorial(m, k)
    if fall.sign == 0:
        return -math.inf, es
    f = _fall(r)
    return fall.ln_mag - k * math.log(N) + f * f * k * k / (4.0 * n * n), es


def expected_conflict_free_sets(n: int, r: int, m: int, t: int, strict: bool = False) -> int:
    """Leading inclusion-exclusion term C(n,t) - C(r,2) m C(n-2,t-2)."""
    if t < 2 or t > n:
        raise OutOfRange(f"t={t} outside 2..{n}")
    if strict and not (r <= t <= 3 * r - 4):
        raise OutOfRange(f"t={t} outside r..3r-4")
    return comb(n, t) - comb(r, 2) * m * comb(n - 2, t - 2)


def in_conflict_free_range(r: int, t: int) -> bool:
    return r <= t <= 3 * r - 4


def expected_one_conflict_sets(n: int, r: int, m: int) -> int:
    """Leading term C(r,2) m C(n-2,2r-4) for (2r-2)-sets with exactly one inside-edge pair."""
    return comb(r, 2) * m * comb(n - 2, 2 * r - 4)


# --- summation bounds ------------------------------------------------------------------

@dataclass(frozen=True)
class SummationSpec:
    N: int
    A: Sequence[float]
    B: Sequence[float]
    delta: Sequence[float] | None = None
    gamma: Sequence[float] | None = None
    c: float | None = None
    chat: float | None = None


@dataclass(frozen=True)
class SummationResult:
    sum: float
    sigma1: float
    sigma2: float
    ok: bool
    terms: tuple[float, ...]


def summation_terms(spec: SummationSpec) -> list[float]:
    """n_0..n_N from the ratio recurrence with the zero-propagation rule."""
    N = spec.N
    delta = spec.delta if spec.delta is not None else [0.0] * N
    out = [1.0]
    cur = 1.0
    dead = False
    for i in range(1, N + 1):
        a, b, d = spec.A[i - 1], spec.B[i - 1], delta[i - 1]
        factor = 1 - (i - 1) * b
        if dead or a == 0 or factor == 0:
            dead = True
            out.append(0.0)
            continue
        cur = cur * (a / i) * factor * (1 + d)
        out.append(cur)
    return out


def _fall_int(i: int, j: int) -> int:
    out = 1
    for s in range(j):
        out *= i - s
    return out


def _check_common(spec: SummationSpec) -> None:
    N = spec.N
    if N < 2:
        raise PreconditionFailed("N >= 2")
    if len(spec.A) != N or len(spec.B) != N:
        raise PreconditionFailed("A and B must have length N")
    for i in range(1, N + 1):
        if spec.A[i - 1] < 0:
            raise PreconditionFailed(f"A({i}) >= 0")
        if 1 - (i - 1) * spec.B[i - 1] < 0:
            raise PreconditionFailed(f"1 - ({i}-1) B({i}) >= 0")


def _check_perturbed(spec: SummationSpec) -> None:
    _check_common(spec)
    N = spec.N
    if spec.gamma is None or spec.c is None:
        raise PreconditionFailed("gamma and c are required")
    K = len(spec.gamma) - 1
    if not (0 <= K <= N):
        raise PreconditionFailed("0 <= K <= N")
    delta = spec.delta if spec.delta is not None else [0.0] * N
    if len(delta) != N:
        raise PreconditionFailed("delta must have length N")
    run = 0.0
    for i in range(1, N + 1):
        run += abs(delta[i - 1])
        g = math.fsum(gj * _fall_int(i, j) for j, gj in enumerate(spec.gamma))
        if not run <= g:
            raise PreconditionFailed(f"sum_{{j<={i}}} |delta_j| <= sum_j gamma_j [{i}]_j")
        if not g < 0.2:
            raise PreconditionFailed(f"sum_j gamma_j [{i}]_j < 1/5")
    if not spec.c > 2 * math.e:
        raise PreconditionFailed("c > 2e")
    A1, A2 = min(spec.A), max(spec.A)
    if not (0 <= A1 * spec.c and A2 * spec.c < N - K + 1):
        raise PreconditionFailed("0 <= A c < N - K + 1")
    if not max(abs(b) for b in spec.B) * N < 1:
        raise PreconditionFailed("|B N| < 1")


def _check_simple(spec: SummationSpec) -> None:
    _check_common(spec)
    if spec.chat is None or not (0 < spec.chat < 1 / 3):
        raise PreconditionFailed("0 < chat < 1/3")
    if max(spec.A) / spec.N > spec.chat:
        raise PreconditionFailed("A/N <= chat")
    if max(abs(a * b) for a, b in zip(spec.A, spec.B)) > spec.chat:
        raise PreconditionFailed("|C| <= chat")


def _safe_exp(x: float) -> float:
    return math.exp(x) if x < 700 else math.inf


def summation_bounds(spec: SummationSpec, variant: str = "simple") -> SummationResult:
    """Check sigma1 <= sum n_i <= sigma2 for a spec satisfying the variant's hypotheses.

    "perturbed": ratios n_i/n_{i-1} = (A_i/i)(1-(i-1)B_i)(1+delta_i), delta controlled by gamma and c.
    "simple": delta = 0, with A/N and |A B| bounded by chat.
    """
    N = spec.N
    if variant == "perturbed":
        _check_perturbed(spec)
        A1, A2 = min(spec.A), max(spec.A)
        B1, B2 = min(spec.B), max(spec.B)
        g = spec.gamma
        tail = 0.25 * (2 * math.e / spec.c) ** N
        s1 = _safe_exp(A1 - 0.5 * A1 * A1 * B2 - 4 * math.fsum(gj * (3 * A1) ** j for j, gj in enumerate(g))) - tail
        s2 = _safe_exp(A2 - 0.5 * A2 * A2 * B1 + 0.5 * A2**3 * B1 * B1
                       + 4 * math.fsum(gj * (3 * A2) ** j for j, gj in enumerate(g))) + tail
    elif variant == "simple":
        _check_simple(spec)
        A1, A2 = min(spec.A), max(spec.A)
        C = [a * b for a, b in zip(spec.A, spec.B)]
        C1, C2 = min(C), max(C)
        tail = (2 * math.e * spec.chat) ** N
        s1 = _safe_exp(A1 - 0.5 * A1 * C2) - tail
        s2 = _safe_exp(A2 - 0.5 * A2 * C1 + 0.5 * A2 * C1 * C1) + tail
    else:
        raise OutOfRange(f"unknown variant {variant!r}")
    if variant == "simple" and spec.delta is not None and any(spec.delta):
        raise PreconditionFailed("delta must be zero for the undisturbed recurrence")
    terms = summation_terms(spec)
    total = math.fsum(terms)
    return SummationResult(total, s1, s2, s1 <= total <= s2, tuple(terms))


# --- binomial tools ----------------------------------------------------------------------

def chernoff_bound(N: int, p: float, t: float) -> float:
    mu = N * p
    if not (0 < t <= mu):
        raise OutOfRange(f"need 0 < t <= Np, got t={t}, Np={mu}")
    return 2.0 * math.exp(-t * t / (3.0 * mu))


def binomial_log_pmf(N: int, p: float, k: int) -> float:
    if k < 0 or k > N:
        return -math.inf
    if p == 0:
        return 0.0 if k == 0 else -math.inf
    if p == 1:
        return 0.0 if k == N else -math.inf
    return log_binomial(N, k).ln_mag + k * math.log(p) + (N - k) * math.log1p(-p)


def binomial_two_sided_tail(N: int, p, t) -> Fraction:
    """Exact P[|X - Np| > t] for X ~ Bin(N,p), rational p and t."""
    p = Fraction(p)
    t = Fraction(t)
    mu = N * p
    q = 1 - p
    total = Fraction(0)
    for k in range(N + 1):
        if abs(k - mu) > t:
            total += comb(N, k) * p**k * q ** (N - k)
    return total


def binomial_tools(N: int, p: float, t, which: str) -> float:
    """chernoff: 2exp(-t^2/(3Np)); point_approx: normal leading term at floor(Np)+t;
    point_exact: exact log-pmf at floor(Np)+t; envelope: the upper-envelope shape (a bound, not an estimate)."""
    if not (0 <= p <= 1):
        raise OutOfRange(f"p={p} outside [0,1]")
    mu = N * p
    if which == "chernoff":
        return chernoff_bound(N, p, t)
    if which in ("point_approx", "envelope"):
        if mu <= 0:
            raise OutOfRange("Np must be positive")
        return math.exp(-t * t / (2.0 * mu)) / math.sqrt(2 * math.pi * mu)
    if which == "point_exact":
        return binomial_log_pmf(N, p, int(math.floor(mu)) + int(t))
    raise OutOfRange(f"unknown tool {which!r}")


def formula_json(value_ln: float, es: ErrorScale, case: str | None, terms: dict[str, float]) -> dict:
    return {
        "value_ln": value_ln,
        "error_scale": es.value,
        "case": case,
        "terms": {**terms, **{f"error:{k}": v for k, v in es.terms.items()}},
    }
