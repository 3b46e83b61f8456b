"""
Smallest-prime-factor sieve and the arithmetic functions built on it.

Provides:
- FactorSieve: immutable spf table over [1, X] with per-n queries
  (factorisation, Mobius, totient, divisor count, von Mangoldt)
- generalized and divisor-truncated von Mangoldt functions
- batch_polynomial_weights: Lambda_{k,R}(F(n)) for F(n) = prod (n + h_i),
  accumulated by sieving over squarefree d <= R

Natural logarithms throughout.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetError, DomainError

DEFAULT_CEILING = 10**8
THREADS_ENV = "PRIMEPATTERNS_THREADS"


@dataclass(frozen=True)
class PrimeTuple:
    """Sorted distinct non-negative offsets h_1 < ... < h_k."""

    offsets: tuple[int, ...]

    def __post_init__(self):
        offs = tuple(int(h) for h in self.offsets)
        if not offs:
            raise DomainError("a prime tuple needs at least one offset")
        if any(h < 0 for h in offs):
            raise DomainError("offsets must be non-negative")
        if any(a >= b for a, b in zip(offs, offs[1:])):
            raise DomainError(f"offsets must be strictly increasing: {offs}")
        object.__setattr__(self, "offsets", offs)

    @classmethod
    def of(cls, offsets: Iterable[int]) -> "PrimeTuple":
        """Build from any iterable of distinct non-negative integers, in any order."""
        offs = sorted(int(h) for h in offsets)
        if len(set(offs)) != len(offs):
            raise DomainError(f"offsets must be distinct: {offs}")
        return cls(tuple(offs))

    def __len__(self) -> int:
        return len(self.offsets)

    def __iter__(self):
        return iter(self.offsets)

    @property
    def k(self) -> int:
        return len(self.offsets)


@dataclass(frozen=True)
class TruncationParams:
    """Power k and real cutoff R of Lambda_{k,R}."""

    k: int
    R: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k}")
        if not self.R >= 1:
            raise DomainError(f"R must be >= 1, got {self.R}")


def _as_tuple(offsets) -> PrimeTuple:
    return offsets if isinstance(offsets, PrimeTuple) else PrimeTuple.of(offsets)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


class FactorSieve:
    """Smallest-prime-factor table for 2 <= n <= limit.

    The table is read-only after construction, so one sieve can be shared
    between threads. Derived tables (Lambda, Lambda', primes) are computed
    lazily and cached; they are also read-only.
    """

    def __init__(self, limit: int, ceiling: int | None = None):
        limit = int(limit)
        ceiling = DEFAULT_CEILING if ceiling is None else int(ceiling)
        if limit < 2:
            raise DomainError(f"sieve limit must be >= 2, got {limit}")
        if limit > ceiling:
            raise BudgetError(f"sieve limit {limit} exceeds ceiling {ceiling}")
        if limit >= 2**31:
            raise BudgetError("sieve limit must fit the int32 spf table")
        self.limit = limit
        spf = np.zeros(limit + 1, dtype=np.int32)
        for p in range(2, math.isqrt(limit) + 1):
            if spf[p] == 0:
                seg = spf[p * p :: p]
                seg[seg == 0] = p
        # everything still unmarked is prime
        unmarked = np.flatnonzero(spf == 0)
        spf[unmarked] = unmarked
        spf[0] = 0
        spf[1] = 1
        spf.setflags(write=False)
        self.spf = spf

    def __repr__(self) -> str:
        return f"FactorSieve(limit={self.limit})"

    def _check(self, n: int) -> int:
        n = int(n)
        if not 1 <= n <= self.limit:
            raise DomainError(f"n={n} outside sieve range [1, {self.limit}]")
        return n

    # -- per-n queries -------------------------------------------------
    def is_prime(self, n: int) -> bool:
        n = self._check(n)
        return n >= 2 and int(self.spf[n]) == n

    def factorize(self, n: int) -> list[tuple[int, int]]:
        """Prime factorisation of n as [(p, e), ...] with p increasing."""
        n = self._check(n)
        out: list[tuple[int, int]] = []
        while n > 1:
            p = int(self.spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        return out

    def prime_divisors(self, n: int) -> list[int]:
        return [p for p, _ in self.factorize(n)]

    def mobius(self, n: int) -> int:
        fac = self.factorize(n)
        if any(e > 1 for _, e in fac):
            return 0
        return -1 if len(fac) % 2 else 1

    def totient(self, n: int) -> int:
        n = self._check(n)
        out = n
        for p, _ in self.factorize(n):
            out -= out // p
        return out

    def divisor_count(self, n: int) -> int:
        return math.prod(e + 1 for _, e in self.factorize(n))

    # -- tables --------------------------------------------------------
    @cached_property
    def primes(self) -> np.ndarray:
        idx = np.arange(self.limit + 1)
        pr = np.flatnonzero((self.spf == idx) & (idx >= 2))
        pr.setflags(write=False)
        return pr

    def primes_upto(self, m: int) -> np.ndarray:
        return self.primes[: np.searchsorted(self.primes, m, side="right")]

    @cached_property
    def lambda_table(self) -> np.ndarray:
        """Lambda(n) for 0 <= n <= limit (Lambda(0) := 0)."""
        lam = np.zeros(self.limit + 1)
        lam[self.primes] = np.log(self.primes)
        for p in self.primes_upto(math.isqrt(self.limit)):
            p = int(p)
            pk = p * p
            lp = math.log(p)
            while pk <= self.limit:
                lam[pk] = lp
                pk *= p
        lam.setflags(write=False)
        return lam

    @cached_property
    def lambda_prime_table(self) -> np.ndarray:
        """Lambda'(n): log n at primes, 0 elsewhere."""
        lam = np.zeros(self.limit + 1)
        lam[self.primes] = np.log(self.primes)
        lam.setflags(write=False)
        return lam

    def mobius_table(self, m: int | None = None) -> np.ndarray:
        """mu(n) for 0 <= n <= m as int8 (mu(0) := 0)."""
        m = self.limit if m is None else int(m)
        if m > self.limit:
            raise DomainError(f"m={m} exceeds sieve limit {self.limit}")
        mu = np.ones(m + 1, dtype=np.int8)
        mu[0] = 0
        rem = np.arange(m + 1, dtype=np.int64)
        idx = np.flatnonzero(rem > 1)
        while idx.size:
            r = rem[idx]
            p = self.spf[r].astype(np.int64)
            q = r // p
            square = q % p == 0
            mu[idx[square]] = 0
            mu[idx[~square]] *= -1
            rem[idx] = np.where(square, 1, q)
            idx = idx[rem[idx] > 1]
        return mu

    def totient_table(self, m: int | None = None) -> np.ndarray:
        m = self.limit if m is None else int(m)
        if m > self.limit:
            raise DomainError(f"m={m} exceeds sieve limit {self.limit}")
        phi = np.arange(m + 1, dtype=np.int64)
        for p in self.primes_upto(m):
            p = int(p)
            phi[p::p] -= phi[p::p] // p
        return phi


def build_sieve(X: int, ceiling: int | None = None) -> FactorSieve:
    """Smallest-prime-factor sieve over [1, X]; ceiling defaults to 10^8."""
    return FactorSieve(X, ceiling=ceiling)


def nu2(n: int) -> int:
    """2-adic valuation of n != 0."""
    n = int(n)
    if n == 0:
        raise DomainError("nu2(0) is undefined")
    return (n & -n).bit_length() - 1


def squarefree_divisors(primes: Sequence[int]) -> list[tuple[int, int]]:
    """All (d, mu(d)) for squarefree d built from the given distinct primes, d ascending."""
    out = [(1, 1)]
    for p in primes:
        out += [(d * p, -m) for d, m in out]
    out.sort()
    return out


def von_mangoldt(sieve: FactorSieve, n: int, restricted: bool = False) -> float:
    """Lambda(n), or Lambda'(n) (primes only) when restricted."""
    fac = sieve.factorize(n)
    if len(fac) != 1:
        return 0.0
    p, e = fac[0]
    if restricted:
        return math.log(p) if e == 1 else 0.0
    return math.log(p)


def generalized_von_mangoldt(sieve: FactorSieve, n: int, k: int) -> float:
    """Lambda_k(n) = sum_{d | n} mu(d) log(n/d)^k by direct divisor sum."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    n = sieve._check(n)
    return math.fsum(mu * math.log(n / d) ** k for d, mu in squarefree_divisors(sieve.prime_divisors(n)))


def generalized_von_mangoldt_table(sieve: FactorSieve, k: int, m: int) -> np.ndarray:
    """Lambda_k(n) for 0 <= n <= m, accumulated over squarefree d by slicing."""
    if m > sieve.limit:
        raise DomainError(f"m={m} exceeds sieve limit {sieve.limit}")
    mu = sieve.mobius_table(m)
    logn = np.log(np.maximum(np.arange(m + 1), 1))
    out = np.zeros(m + 1)
    for d in np.flatnonzero(mu):
        d = int(d)
        out[d::d] += mu[d] * (logn[d::d] - math.log(d)) ** k
    return out


def _coefficient(mu: int, R: float, d: int, k: int) -> float:
    # shared by the per-n and batch paths so both accumulate identical floats
    return mu * math.log(R / d) ** k


def truncated_von_mangoldt(sieve: FactorSieve, n: int, params: TruncationParams) -> float:
    """Lambda_{k,R}(n) = sum_{d | n, d <= R} mu(d) log(R/d)^k."""
    total = 0.0
    for d, mu in squarefree_divisors(sieve.prime_divisors(n)):
        if d > params.R:
            break
        total += _coefficient(mu, params.R, d, params.k)
    return total


def truncated_von_mangoldt_poly(sieve: FactorSieve, value: int, params: TruncationParams) -> float:
    """Lambda_{k,R}(value) for an arbitrary positive integer, by trial division by d <= R.

    Only mu(d) for d <= R is read from the sieve, so value may exceed the
    sieve limit. Summation runs over d ascending, matching the batch kernel.
    """
    Rint = int(math.floor(params.R))
    if Rint > sieve.limit:
        raise DomainError(f"R={params.R} exceeds sieve limit {sieve.limit}")
    total = 0.0
    for d in range(1, Rint + 1):
        mu = sieve.mobius(d)
        if mu and value % d == 0:
            total += _coefficient(mu, params.R, d, params.k)
    return total


def _crt_roots(roots_a: list[int], ma: int, roots_b: list[int], mb: int) -> list[int]:
    inv = pow(ma, -1, mb)
    return [ra + ma * (((rb - ra) * inv) % mb) for ra in roots_a for rb in roots_b]


def polynomial_roots(offsets: Sequence[int], d_primes: Sequence[int]) -> list[int]:
    """Residues n mod d (d = product of the given primes) with d | prod (n + h_i), ascending."""
    roots, mod = [0], 1
    for p in d_primes:
        res = sorted({(-h) % p for h in offsets})
        roots = _crt_roots(roots, mod, res, p)
        mod *= p
    return sorted(roots)


def _weight_plan(sieve: FactorSieve, offsets: Sequence[int], params: TruncationParams):
    """[(d, coefficient, roots mod d)] for squarefree d <= R, d ascending."""
    Rint = int(math.floor(params.R))
    if Rint > sieve.limit:
        raise DomainError(f"R={params.R} exceeds sieve limit {sieve.limit}")
    plan = []
    for d in range(1, Rint + 1):
        fac = sieve.factorize(d) if d > 1 else []
        if any(e > 1 for _, e in fac):
            continue
        mu = -1 if len(fac) % 2 else 1
        coeff = _coefficient(mu, params.R, d, params.k)
        plan.append((d, coeff, polynomial_roots(offsets, [p for p, _ in fac])))
    return plan


def _accumulate(plan, start: int, stop: int) -> np.ndarray:
    out = np.zeros(stop - start)
    for d, coeff, roots in plan:
        for r in roots:
            first = (r - start) % d
            out[first::d] += coeff
    return out


def batch_polynomial_weights(
    sieve: FactorSieve,
    N: int,
    offsets,
    params: TruncationParams,
    stop: int | None = None,
    squared: bool = True,
    workers: int | None = None,
) -> np.ndarray:
    """Lambda_{k,R}(F(n))^2 for n in [N, stop), F(n) = prod (n + h_i); stop defaults to 2N.

    Divisor sieving: each squarefree d <= R adds mu(d) log(R/d)^k to every
    n in the range whose residue mod d is a root of F. Segments may be
    handled by several threads; each n still sees d in ascending order, so
    results are bit-identical to the sequential run.
    """
    tup = _as_tuple(offsets)
    N = int(N)
    stop = 2 * N if stop is None else int(stop)
    if params.R > N:
        raise DomainError(f"truncation R={params.R} exceeds range start N={N}")
    if stop <= N:
        raise DomainError(f"empty range [{N}, {stop})")
    plan = _weight_plan(sieve, tup.offsets, params)
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or stop - N < 2 * workers:
        vals = _accumulate(plan, N, stop)
    else:
        cuts = np.linspace(N, stop, workers + 1).astype(np.int64)
        with ThreadPoolExecutor(workers) as pool:
            parts = pool.map(lambda ab: _accumulate(plan, int(ab[0]), int(ab[1])), zip(cuts[:-1], cuts[1:]))
            vals = np.concatenate(list(parts))
    return np.square(vals) if squared else vals


def gy_weight_sum(sieve: FactorSieve, lo: int, hi: int, R: float) -> np.ndarray:
    """sum_{d | n, d <= R} mu(d) log(R/d)/log R for lo < n <= hi."""
    if R <= 1:
        raise DomainError("GY weights need R > 1 (log R = 0)")
    plan = _weight_plan(sieve, (0,), TruncationParams(1, R))
    return _accumulate(plan, lo + 1, hi + 1) / math.log(R)


def omega_distinct(sieve: FactorSieve, n: int) -> int:
    return len(sieve.factorize(n))


__all__ = [
    "DEFAULT_CEILING",
    "FactorSieve",
    "PrimeTuple",
    "TruncationParams",
    "batch_polynomial_weights",
    "build_sieve",
    "generalized_von_mangoldt",
    "generalized_von_mangoldt_table",
    "gy_weight_sum",
    "nu2",
    "polynomial_roots",
    "squarefree_divisors",
    "truncated_von_mangoldt",
    "truncated_von_mangoldt_poly",
    "von_mangoldt",
]
