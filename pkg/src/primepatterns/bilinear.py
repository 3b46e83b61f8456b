"""
Vaughan's identity and the sums it feeds: the four-way split of
sum_{n<=X} Lambda(n) f(n), Type I and Type II sum evaluators, van der
Corput's inequality, and two diophantine tools (a min-sum evaluator and
rational approximation / equidistribution search).

Sequence arguments named ``f`` are vectorised callables: they take an int64
numpy array of positive integers and return an array of the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .arith import FactorSieve, squarefree_divisors
from .errors import BudgetError, ConsistencyError, DomainError

ArithFn = Callable[[np.ndarray], np.ndarray]

BILINEAR_BUDGET = 1 << 26
SPLIT_RTOL = 1e-6


@dataclass(frozen=True)
class DyadicRange:
    """The integers n ~ 2^exponent, i.e. 2^(exponent-1) <= n < 2^exponent."""

    exponent: int

    def __post_init__(self):
        if self.exponent < 1:
            raise DomainError(f"dyadic exponent must be >= 1, got {self.exponent}")

    @property
    def lo(self) -> int:
        return 1 << (self.exponent - 1)

    @property
    def hi(self) -> int:
        return 1 << self.exponent

    def __len__(self) -> int:
        return self.hi - self.lo

    def values(self) -> np.ndarray:
        return np.arange(self.lo, self.hi, dtype=np.int64)


# -- Vaughan's identity --------------------------------------------------


def integer_root(x: float, k: int) -> float:
    """x^(1/k), snapped to the exact integer root when one exists."""
    r = x ** (1 / k)
    near = round(r)
    return float(near) if near**k == x else r


@dataclass(frozen=True)
class VaughanTerms:
    """The four pieces of Lambda(n) = -sharp_sharp + flat_flat + small + divisor_log."""

    sharp_sharp: float
    flat_flat: float
    small: float
    divisor_log: float

    @property
    def total(self) -> float:
        return -self.sharp_sharp + self.flat_flat + self.small + self.divisor_log


def vaughan_identity_check(sieve: FactorSieve, n: int, U: float) -> VaughanTerms:
    """Evaluate the four terms of Vaughan's identity at n by direct divisor sums.

    sharp_sharp sums Lambda(b) mu(c) over bc | n with b, c < U; flat_flat does the
    same with b, c >= U.
    """
    n = sieve._check(n)
    fac = sieve.factorize(n)
    sharp = flat = 0.0
    for p, e in fac:
        lp = math.log(p)
        for j in range(1, e + 1):
            b = p**j
            rest = n // b
            rest_primes = [q for q, _ in fac if rest % q == 0]
            for c, mu in squarefree_divisors(rest_primes):
                if b < U and c < U:
                    sharp += lp * mu
                elif b >= U and c >= U:
                    flat += lp * mu
    small = 0.0
    if n < U and len(fac) == 1:
        small = math.log(fac[0][0])
    divisor_log = math.fsum(
        mu * math.log(n / c) for c, mu in squarefree_divisors([p for p, _ in fac]) if c < U
    )
    return VaughanTerms(sharp, flat, small, divisor_log)


@dataclass(frozen=True)
class VaughanSplit:
    """S1 + S2 + S3 + S4 = sum_{n<=X} Lambda(n) f(n)."""

    S1: complex
    S2: complex
    S3: complex
    S4: complex
    U: float
    direct: complex

    @property
    def total(self) -> complex:
        return self.S1 + self.S2 + self.S3 + self.S4


def _spread_over_multiples(ms: np.ndarray, ws: np.ndarray, X: int) -> np.ndarray:
    """a[n] = sum over listed m dividing n of w_m, for 0 <= n <= X."""
    out = np.zeros(X + 1)
    if ms.size == 0:
        return out
    counts = X // ms
    idx = np.repeat(ms, counts) * (np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts) + 1)
    return np.bincount(idx, weights=np.repeat(ws, counts), minlength=X + 1)


def _pair_weights(b: np.ndarray, lb: np.ndarray, c: np.ndarray, mc: np.ndarray, X: int):
    """All products m = b*c <= X with weights Lambda(b) mu(c)."""
    ms, ws = [], []
    # c is sorted, so the admissible c for each b form a prefix
    ends = np.searchsorted(c, X // b, side="right")
    for bi, li, end in zip(b.tolist(), lb.tolist(), ends.tolist()):
        if end == 0:
            continue
        ms.append(bi * c[:end])
        ws.append(li * mc[:end])
    if not ms:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    return np.concatenate(ms), np.concatenate(ws)


def vaughan_split(sieve: FactorSieve, f: ArithFn, X: int, U: float | None = None) -> VaughanSplit:
    """Split sum_{n<=X} Lambda(n) f(n) into the four Vaughan sums.

    U defaults to X^(1/3). Each piece is built independently by sieving over
    its own divisor pairs; a mismatch with the direct sum beyond a relative
    1e-6 raises ConsistencyError.
    """
    X = int(X)
    if not 1 <= X <= sieve.limit:
        raise DomainError(f"need 1 <= X <= sieve limit, got X={X}")
    U = integer_root(X, 3) if U is None else float(U)
    if U < 1:
        raise DomainError(f"U must be >= 1, got {U}")
    n = np.arange(1, X + 1, dtype=np.int64)
    fv = np.asarray(f(n))
    lam = sieve.lambda_table[: X + 1]
    mu = sieve.mobius_table(X).astype(np.float64)

    idx = np.arange(X + 1)
    pp = np.flatnonzero(lam > 0)
    sf = np.flatnonzero(mu != 0)
    sf = sf[sf >= 1]
    b_small, b_large = pp[pp < U], pp[pp >= U]
    c_small, c_large = sf[sf < U], sf[sf >= U]

    sharp = _spread_over_multiples(*_pair_weights(b_small, lam[b_small], c_small, mu[c_small], X), X)
    flat = _spread_over_multiples(*_pair_weights(b_large, lam[b_large], c_large, mu[c_large], X), X)
    # sum_{c<U, c|n} mu(c) log(n/c) = log n * sum mu(c) - sum mu(c) log c
    mu_sum = _spread_over_multiples(c_small, mu[c_small], X)
    mu_log = _spread_over_multiples(c_small, mu[c_small] * np.log(c_small), X)
    logs = np.log(np.maximum(idx, 1))
    divisor_log = logs * mu_sum - mu_log

    S1 = -np.dot(sharp[1:], fv)
    S2 = np.dot(flat[1:], fv)
    below = n < U
    S3 = np.dot(lam[1:][below], fv[below])
    S4 = np.dot(divisor_log[1:], fv)
    direct = np.dot(lam[1:], fv)
    split = VaughanSplit(_scalar(S1), _scalar(S2), _scalar(S3), _scalar(S4), U, _scalar(direct))
    scale = max(1.0, float(np.dot(lam[1:], np.abs(fv))))
    if abs(split.total - split.direct) > SPLIT_RTOL * scale:
        raise ConsistencyError(f"Vaughan split drifts from the direct sum by {abs(split.total - split.direct):.3g}")
    return split


def _scalar(z) -> complex | float:
    z = complex(z)
    return z.real if z.imag == 0 else z


# -- Type I / Type II ----------------------------------------------------


def type_i_sum(f: ArithFn, mu_exp: int, intervals) -> float:
    """sum_{m ~ 2^mu} |sum_{n in I_m} f(mn)|.

    ``intervals`` is a DyadicRange (every I_m is the full range) or a sequence
    of half-open (lo, hi) pairs, one per m in increasing order.
    """
    ms = DyadicRange(mu_exp).values()
    if isinstance(intervals, DyadicRange):
        bounds = [(intervals.lo, intervals.hi)] * len(ms)
    else:
        bounds = [(int(lo), int(hi)) for lo, hi in intervals]
        if len(bounds) != len(ms):
            raise DomainError(f"need {len(ms)} intervals, got {len(bounds)}")
    total = 0.0
    for m, (lo, hi) in zip(ms.tolist(), bounds):
        if hi <= lo:
            continue
        total += abs(complex(np.sum(f(m * np.arange(lo, hi, dtype=np.int64)))))
    return total


@dataclass(frozen=True)
class TypeIISum:
    value: complex
    trivial_bound: float

    @property
    def ratio(self) -> float:
        return abs(self.value) / self.trivial_bound


def type_ii_sum(f: ArithFn, a: Sequence[complex], b: Sequence[complex], mu_exp: int, nu_exp: int) -> TypeIISum:
    """sum_{m ~ 2^mu} sum_{n ~ 2^nu} a_m b_n f(mn), with the trivial bound 2^(mu-1) 2^(nu-1)."""
    M, N = DyadicRange(mu_exp), DyadicRange(nu_exp)
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != (len(M),) or b.shape != (len(N),):
        raise DomainError(f"coefficients need lengths {len(M)} and {len(N)}")
    if len(M) * len(N) > BILINEAR_BUDGET:
        raise BudgetError("bilinear sum exceeds the 2^26-term budget")
    if np.max(np.abs(a), initial=0) > 1 + 1e-12 or np.max(np.abs(b), initial=0) > 1 + 1e-12:
        raise DomainError("coefficients must satisfy |a_m|, |b_n| <= 1")
    ns = N.values()
    rows = max(1, (1 << 20) // len(N))
    total = 0j
    ms = M.values()
    for i in range(0, len(ms), rows):
        block = ms[i : i + rows, None] * ns[None, :]
        total += complex(a[i : i + rows] @ (np.asarray(f(block)) @ b))
    return TypeIISum(_scalar(total), float(len(M) * len(N)))


# -- van der Corput ------------------------------------------------------


@dataclass(frozen=True)
class VdcCheck:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12) + 1e-12


def vdc_check(a: Sequence[complex], H: int) -> VdcCheck:
    """Both sides of |sum a_n|^2 <= (N+H)/H sum_{|h|<=H} (1-|h|/H) sum_n a_n conj(a_{n+h})."""
    a = np.asarray(a, dtype=np.complex128)
    H = int(H)
    if H < 1:
        raise DomainError(f"H must be >= 1, got {H}")
    N = a.size
    lhs = abs(a.sum()) ** 2
    # corr[N-1+h] = sum_n a_{n+h} conj(a_n); weights are symmetric in h
    corr = np.correlate(a, a, mode="full")
    h = np.arange(-(N - 1), N)
    w = np.clip(1 - np.abs(h) / H, 0, None)
    rhs = (N + H) / H * float(np.real(np.dot(w, corr)))
    return VdcCheck(float(lhs), rhs)


# -- diophantine tools ---------------------------------------------------


def _dist_to_int(x: np.ndarray) -> np.ndarray:
    frac = np.mod(x, 1.0)
    return np.minimum(frac, 1.0 - frac)


@dataclass(frozen=True)
class MinQSum:
    value: float
    shape: float

    @property
    def constant(self) -> float:
        """value / shape: the fitted constant for this instance."""
        return self.value / self.shape


def min_q_sum(a: int, q: int, beta: float, Q: int, R: int) -> MinQSum:
    """sum_{x=0}^R min(Q, ||ax/q + beta||^-1), with ||0||^-1 = infinity.

    ``shape`` is (Q + q + R + QR/q) log(2 + qQR), the envelope with its
    logarithmic loss made explicit.
    """
    a, q, Q, R = int(a), int(q), int(Q), int(R)
    if q < 1 or Q < 1 or R < 0:
        raise DomainError("need q, Q >= 1 and R >= 0")
    if math.gcd(a, q) != 1:
        raise DomainError(f"gcd(a, q) = {math.gcd(a, q)} != 1")
    x = np.arange(R + 1, dtype=np.int64)
    # reduce ax mod q in integers before mixing in beta
    dist = _dist_to_int((a * x % q) / q + beta)
    with np.errstate(divide="ignore"):
        vals = np.minimum(Q, np.where(dist == 0, np.inf, 1 / np.where(dist == 0, 1, dist)))
    shape = (Q + q + R + Q * R / q) * math.log(2 + q * Q * R)
    return MinQSum(float(vals.sum()), shape)


def dirichlet_approx(alpha: float | Fraction, N: int) -> tuple[int, int]:
    """(a, q) with 1 <= q <= N, gcd(a, q) = 1 and |alpha - a/q| <= 1/(qN).

    Returns the last continued-fraction convergent of alpha with denominator
    <= N; alpha is expanded exactly as a rational.
    """
    N = int(N)
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    x = Fraction(alpha)
    p_prev, p = 1, math.floor(x)
    q_prev, q = 0, 1
    rem = x - p
    while rem:
        x = 1 / rem
        digit = math.floor(x)
        rem = x - digit
        q_next = digit * q + q_prev
        if q_next > N:
            break
        p_prev, p = p, digit * p + p_prev
        q_prev, q = q, q_next
    return p, q


def equidist_find_q(alpha: float, N: int, delta1: float, delta2: float) -> int | None:
    """Least q <= 8/delta2 with ||alpha q|| <= 4 delta1 / (delta2 N), or None.

    None means the hypothesis fails: fewer than delta2*N of n in [1, N] have
    ||alpha n|| <= delta1. When the hypothesis holds the search must succeed;
    failure raises ConsistencyError.
    """
    N = int(N)
    if not delta1 < delta2 / 16:
        raise DomainError(f"need delta1 < delta2/16, got {delta1}, {delta2}")
    if not N >= 8 / delta2:
        raise DomainError(f"need N >= 8/delta2 = {8 / delta2}")
    n = np.arange(1, N + 1, dtype=np.float64)
    hits = int(np.count_nonzero(_dist_to_int(alpha * n) <= delta1))
    if hits < delta2 * N:
        return None
    target = 4 * delta1 / (delta2 * N)
    for q in range(1, math.floor(8 / delta2) + 1):
        if _dist_to_int(np.array(alpha * q))[()] <= target:
            return q
    raise ConsistencyError(f"hypothesis holds for alpha={alpha} but no q <= {8 / delta2} qualifies")


__all__ = [
    "DyadicRange",
    "integer_root",
    "MinQSum",
    "TypeIISum",
    "VaughanSplit",
    "VaughanTerms",
    "VdcCheck",
    "dirichlet_approx",
    "equidist_find_q",
    "min_q_sum",
    "type_i_sum",
    "type_ii_sum",
    "vaughan_identity_check",
    "vaughan_split",
    "vdc_check",
]
