"""
Systems of affine-linear forms: complexity, local factors beta_p, the
archimedean factor beta_inf, weighted prime-pattern counts and singular
series of prime tuples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from .arith import FactorSieve, PrimeTuple, _as_tuple
from .errors import BudgetError, DomainError

INFINITE = math.inf
DEFAULT_P_MAX = 10**5
ENUMERATION_BUDGET = 10**8
MC_SAMPLES = 10**6
_CHUNK = 1 << 20


def primes_upto(m: int) -> np.ndarray:
    """Primes <= m by a plain Eratosthenes sieve."""
    m = int(m)
    if m < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(m + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(m) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags)


# -- exact linear algebra ------------------------------------------------


def _rank_and_minor(rows: Sequence[Sequence[int]]) -> tuple[int, int]:
    """Rank over Q and one nonzero maximal minor (as an integer; 1 for rank 0)."""
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return 0, 1
    ncols = len(m[0])
    pivots: list[tuple[int, int]] = []
    used = [False] * len(m)
    work = [r[:] for r in m]
    for c in range(ncols):
        piv = next((i for i in range(len(work)) if not used[i] and work[i][c] != 0), None)
        if piv is None:
            continue
        used[piv] = True
        pivots.append((piv, c))
        for i in range(len(work)):
            if i != piv and work[i][c] != 0:
                f = work[i][c] / work[piv][c]
                work[i] = [a - f * b for a, b in zip(work[i], work[piv])]
    r = len(pivots)
    if r == 0:
        return 0, 1
    sub = [[m[i][c] for _, c in pivots] for i, _ in pivots]
    return r, int(_det(sub))


def _det(a: list[list[Fraction]]) -> Fraction:
    a = [r[:] for r in a]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for i in range(c + 1, n):
            f = a[i][c] / a[c][c]
            a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return det


def _rank_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    work = [[x % p for x in r] for r in rows]
    rank = 0
    ncols = len(work[0]) if work else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(work)) if work[i][c]), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        inv = pow(work[rank][c], -1, p)
        work[rank] = [(x * inv) % p for x in work[rank]]
        for i in range(len(work)):
            if i != rank and work[i][c]:
                f = work[i][c]
                work[i] = [(x - f * y) % p for x, y in zip(work[i], work[rank])]
        rank += 1
    return rank


def _prime_factors(n: int) -> set[int]:
    n = abs(int(n))
    out = set()
    p = 2
    while p * p <= n:
        while n % p == 0:
            out.add(p)
            n //= p
        p += 1
    if n > 1:
        out.add(n)
    return out


# -- systems of forms ----------------------------------------------------


@dataclass(frozen=True)
class LinearFormSystem:
    """t affine-linear forms psi_i(n) = sum_j L[i][j] n_j + b[i] in d variables."""

    L: tuple[tuple[int, ...], ...]
    b: tuple[int, ...]

    def __post_init__(self):
        L = tuple(tuple(int(x) for x in row) for row in self.L)
        b = tuple(int(x) for x in self.b)
        if not L:
            raise DomainError("a system needs at least one form")
        d = len(L[0])
        if d == 0 or any(len(r) != d for r in L):
            raise DomainError("coefficient rows must share a positive length")
        if len(b) != len(L):
            raise DomainError("need one offset per form")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "b", b)
        for i, row in enumerate(L):
            if not any(row):
                raise DomainError(f"form {i} is constant")
        rows = self.affine_rows
        for i, j in combinations(range(len(rows)), 2):
            if _rank_and_minor([rows[i], rows[j]])[0] < 2:
                raise DomainError(f"forms {i} and {j} are rational multiples of one another")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "LinearFormSystem":
        """Each row lists the d coefficients followed by the constant term."""
        return cls(tuple(tuple(r[:-1]) for r in rows), tuple(r[-1] for r in rows))

    @classmethod
    def parse(cls, text: str) -> "LinearFormSystem":
        """Parse "1 0 0; 1 1 0; 1 2 0" (coefficients then constant, rows split by ';')."""
        rows = [[int(tok) for tok in part.replace(",", " ").split()] for part in text.split(";") if part.strip()]
        return cls.from_rows(rows)

    @classmethod
    def from_tuple(cls, tup) -> "LinearFormSystem":
        """The one-variable system {n + h_i}."""
        tup = _as_tuple(tup)
        return cls(tuple((1,) for _ in tup.offsets), tup.offsets)

    @property
    def t(self) -> int:
        return len(self.L)

    @property
    def d(self) -> int:
        return len(self.L[0])

    @property
    def affine_rows(self) -> list[tuple[int, ...]]:
        return [row + (c,) for row, c in zip(self.L, self.b)]

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.array(self.L, dtype=np.int64)

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.array(self.b, dtype=np.int64)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Form values at integer points of shape (..., d); returns shape (..., t)."""
        return points @ self.matrix.T + self.offsets

    def substitute(self, A: Sequence[Sequence[int]], c: Sequence[int]) -> "LinearFormSystem":
        """The system n -> psi(A n + c)."""
        A = np.asarray(A, dtype=np.int64)
        c = np.asarray(c, dtype=np.int64)
        L = self.matrix @ A
        b = self.matrix @ c + self.offsets
        return LinearFormSystem(tuple(map(tuple, L.tolist())), tuple(b.tolist()))

    def permuted(self, order: Sequence[int]) -> "LinearFormSystem":
        return LinearFormSystem(tuple(self.L[i] for i in order), tuple(self.b[i] for i in order))

    # inclusion-exclusion data: sign * p^{-rank} for every consistent subset
    @cached_property
    def _subset_structure(self) -> tuple[dict[int, int], frozenset[int]]:
        rows = self.affine_rows
        coeffs: dict[int, int] = {0: 1}
        bad: set[int] = set()
        for size in range(1, self.t + 1):
            for S in combinations(range(self.t), size):
                lin = [self.L[i] for i in S]
                aff = [rows[i] for i in S]
                rL, mL = _rank_and_minor(lin)
                rA, mA = _rank_and_minor(aff)
                bad |= _prime_factors(mL) | _prime_factors(mA)
                if rL == rA:
                    coeffs[rL] = coeffs.get(rL, 0) + (-1) ** size
        return coeffs, frozenset(bad)


@dataclass(frozen=True)
class Box:
    """Axis-aligned integer box prod_j [lo_j, hi_j] (inclusive); lo_j > hi_j means empty."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        lo = tuple(int(x) for x in self.lo)
        hi = tuple(int(x) for x in self.hi)
        if len(lo) != len(hi) or not lo:
            raise DomainError("box bounds must have equal positive length")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def interval(cls, lo: int, hi: int) -> "Box":
        return cls((lo,), (hi,))

    @classmethod
    def cube(cls, lo: int, hi: int, d: int) -> "Box":
        return cls((lo,) * d, (hi,) * d)

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(max(0, h - l + 1) for l, h in zip(self.lo, self.hi))

    @property
    def empty(self) -> bool:
        return any(w == 0 for w in self.widths)

    @property
    def size(self) -> int:
        return math.prod(self.widths)

    def corners(self) -> np.ndarray:
        pts = np.array(np.meshgrid(*[(l, h) for l, h in zip(self.lo, self.hi)], indexing="ij"))
        return pts.reshape(self.d, -1).T

    def chunks(self, chunk: int = _CHUNK) -> Iterator[np.ndarray]:
        """Lattice points in row-major order, as (m, d) int64 arrays."""
        widths = self.widths
        lo = np.array(self.lo, dtype=np.int64)
        total = self.size
        for start in range(0, total, chunk):
            flat = np.arange(start, min(total, start + chunk), dtype=np.int64)
            idx = np.stack(np.unravel_index(flat, widths), axis=-1)
            yield idx + lo


def _check_system_box(system: LinearFormSystem, box: Box):
    if box.d != system.d:
        raise DomainError(f"box has dimension {box.d}, system has {system.d} variables")


# -- complexity ----------------------------------------------------------


def _set_partitions(items: list[int], blocks: int) -> Iterator[list[list[int]]]:
    """Partitions of items into exactly `blocks` nonempty classes."""
    n = len(items)

    def rec(i: int, parts: list[list[int]]):
        if n - i < blocks - len(parts):
            return
        if i == n:
            if len(parts) == blocks:
                yield [p[:] for p in parts]
            return
        x = items[i]
        for p in parts:
            p.append(x)
            yield from rec(i + 1, parts)
            p.pop()
        if len(parts) < blocks:
            parts.append([x])
            yield from rec(i + 1, parts)
            parts.pop()

    yield from rec(0, [])


def complexity(system: LinearFormSystem) -> float:
    """Least s such that, for every i, the other forms split into s+1 classes none of
    whose affine-linear spans contains psi_i; INFINITE if no such s exists.

    The affine-linear span of a class is the span of its forms together with the
    constant form 1. Membership is decided in exact rational arithmetic.
    """
    if system.t > 10:
        raise BudgetError(f"complexity enumerates set partitions; t={system.t} > 10")
    rows = system.affine_rows
    const = tuple([0] * system.d + [1])
    cache: dict[tuple[int, frozenset[int]], bool] = {}

    def contains(i: int, cls: frozenset[int]) -> bool:
        key = (i, cls)
        if key not in cache:
            base = [rows[j] for j in cls] + [const]
            cache[key] = _rank_and_minor(base)[0] == _rank_and_minor(base + [rows[i]])[0]
        return cache[key]

    if system.t == 1:
        return 0
    worst = 0
    for i in range(system.t):
        others = [j for j in range(system.t) if j != i]
        if any(contains(i, frozenset([j])) for j in others):
            return INFINITE
        for classes in range(1, len(others) + 1):
            if any(
                not any(contains(i, frozenset(part)) for part in parts)
                for parts in _set_partitions(others, classes)
            ):
                worst = max(worst, classes - 1)
                break
    return worst


# -- local factors -------------------------------------------------------


def count_nonvanishing_enumerated(system: LinearFormSystem, p: int) -> int:
    """#{x in (Z/pZ)^d : p does not divide any psi_i(x)}, by enumeration."""
    p = int(p)
    if p ** system.d > ENUMERATION_BUDGET:
        raise BudgetError(f"p^d = {p}^{system.d} exceeds enumeration budget")
    good = 0
    for pts in Box.cube(0, p - 1, system.d).chunks():
        vals = system.evaluate(pts) % p
        good += int(np.count_nonzero(np.all(vals != 0, axis=1)))
    return good


def count_nonvanishing_ie(system: LinearFormSystem, p: int) -> int:
    """Same count by inclusion-exclusion over subsets of forms, with ranks mod p."""
    p = int(p)
    rows = system.affine_rows
    total = p**system.d
    for size in range(1, system.t + 1):
        for S in combinations(range(system.t), size):
            rL = _rank_mod_p([system.L[i] for i in S], p)
            rA = _rank_mod_p([rows[i] for i in S], p)
            if rL == rA:
                total += (-1) ** size * p ** (system.d - rL)
    return total


def local_factor(system: LinearFormSystem, p: int) -> float:
    """beta_p = E_{x in (Z/pZ)^d} prod_i Lambda_{Z/pZ}(psi_i(x)).

    Full enumeration when p^d <= 10^8; otherwise the exact inclusion-exclusion count.
    """
    p = int(p)
    if p ** system.d <= ENUMERATION_BUDGET:
        good = count_nonvanishing_enumerated(system, p)
    else:
        good = count_nonvanishing_ie(system, p)
    return (p / (p - 1)) ** system.t * good / p**system.d


def local_factors(system: LinearFormSystem, primes: np.ndarray) -> np.ndarray:
    """beta_p for an array of primes.

    Primes that divide one of the minors controlling subset ranks are handled
    exactly one at a time; for every other prime the ranks mod p equal those over
    Q and beta_p follows from the rational inclusion-exclusion polynomial.
    """
    coeffs, bad = system._subset_structure
    p = np.asarray(primes, dtype=np.float64)
    density = np.zeros_like(p)
    for r, c in coeffs.items():
        density += c * p ** (-float(r))
    out = (p / (p - 1)) ** system.t * density
    for i, q in enumerate(np.asarray(primes)):
        if int(q) in bad:
            out[i] = local_factor(system, int(q))
    return out


@dataclass
class DicksonPrediction:
    beta_inf: float
    product: float
    prediction: float
    beta_inf_stderr: float = 0.0
    P_max: int = DEFAULT_P_MAX


def _interval_count(system: LinearFormSystem, box: Box) -> int:
    lo, hi = box.lo[0], box.hi[0]
    for (l,), c in zip(system.L, system.b):
        # l n + c >= 0
        if l > 0:
            lo = max(lo, -((c) // l))
        else:
            hi = min(hi, c // (-l))
    return max(0, hi - lo + 1)


def _planar_count(system: LinearFormSystem, box: Box) -> int:
    n1 = np.arange(box.lo[0], box.hi[0] + 1, dtype=np.int64)
    lo = np.full(n1.shape, box.lo[1], dtype=np.int64)
    hi = np.full(n1.shape, box.hi[1], dtype=np.int64)
    ok = np.ones(n1.shape, dtype=bool)
    for (a, b2), c in zip(system.L, system.b):
        rest = a * n1 + c  # need b2 * n2 + rest >= 0
        if b2 > 0:
            lo = np.maximum(lo, -np.floor_divide(rest, b2))
        elif b2 < 0:
            hi = np.minimum(hi, np.floor_divide(rest, -b2))
        else:
            ok &= rest >= 0
    return int(np.sum(np.where(ok, np.maximum(0, hi - lo + 1), 0)))


def beta_infinity(system: LinearFormSystem, box: Box, samples: int = MC_SAMPLES, seed: int = 0) -> tuple[float, float]:
    """Lattice points of the box on which every form is >= 0, with a standard error.

    Exact for d <= 2; fixed-seed Monte Carlo over the box for d >= 3.
    """
    _check_system_box(system, box)
    if box.empty:
        raise DomainError("empty box")
    if system.d == 1:
        return float(_interval_count(system, box)), 0.0
    if system.d == 2:
        return float(_planar_count(system, box)), 0.0
    rng = np.random.default_rng(seed)
    pts = np.stack([rng.integers(l, h + 1, size=samples) for l, h in zip(box.lo, box.hi)], axis=-1)
    frac = float(np.mean(np.all(system.evaluate(pts) >= 0, axis=1)))
    size = box.size
    return size * frac, size * math.sqrt(frac * (1 - frac) / samples)


def dickson_prediction(
    system: LinearFormSystem, box: Box, P_max: int = DEFAULT_P_MAX, seed: int = 0
) -> DicksonPrediction:
    """beta_inf * prod_{p <= P_max} beta_p."""
    beta_inf, err = beta_infinity(system, box, seed=seed)
    product = float(np.prod(local_factors(system, primes_upto(P_max))))
    return DicksonPrediction(beta_inf, product, beta_inf * product, err, P_max)


def weighted_count(sieve: FactorSieve, system: LinearFormSystem, box: Box) -> float:
    """sum over lattice points of the box of prod_i Lambda(psi_i(n)); values < 1 give 0."""
    _check_system_box(system, box)
    if box.empty:
        return 0.0
    extreme = int(np.max(np.abs(system.evaluate(box.corners()))))
    if extreme > sieve.limit:
        raise DomainError(f"form values reach {extreme}, beyond sieve limit {sieve.limit}")
    lam = sieve.lambda_table
    total = 0.0
    for pts in box.chunks():
        vals = system.evaluate(pts)
        w = np.where(vals >= 1, lam[np.clip(vals, 0, None)], 0.0)
        total += float(np.prod(w, axis=1).sum())
    return total


# -- singular series -----------------------------------------------------


def _tuple_factors(offsets: np.ndarray, primes: np.ndarray) -> np.ndarray:
    """(1 - nu_p/p) / (1 - 1/p)^m for each row of offsets (shape (S, m)) and prime."""
    m = offsets.shape[1]
    res = np.sort(offsets[:, :, None] % primes[None, None, :], axis=1)
    nu = 1 + np.count_nonzero(np.diff(res, axis=1), axis=1)
    p = primes.astype(np.float64)
    return (1 - nu / p) / (1 - 1 / p) ** m


def _generic_log_tail(m: int, primes: np.ndarray) -> float:
    p = primes.astype(np.float64)
    return float(np.sum(np.log1p(-m / p) - m * np.log1p(-1 / p)))


def tuple_singular_series(tup, P_max: int = DEFAULT_P_MAX) -> float:
    """prod_{p <= P_max} (1 - nu_p/p)(1 - 1/p)^{-m}, nu_p = #distinct offsets mod p.

    This equals prod_p beta_p for the system {n + h_i}; it vanishes exactly
    when the tuple is inadmissible.
    """
    offs = np.array(sorted(set(int(h) for h in tup)), dtype=np.int64)
    if offs.size == 0:
        raise DomainError("empty tuple")
    return float(np.prod(_tuple_factors(offs[None, :], primes_upto(P_max))[0]))


@dataclass
class GallagherMean:
    mean: float
    stderr: float
    shapes: int
    sampled: bool


def gallagher_mean(
    k: int,
    H: int,
    P_max: int = DEFAULT_P_MAX,
    max_shapes: int = 200_000,
    samples: int = 20_000,
    seed: int = 0,
) -> GallagherMean:
    """Mean of S(h_0, ..., h_k) over distinct h_i in [0, H].

    The series is symmetric and translation invariant, so the ordered mean is a
    weighted mean over shapes {0} + (k-subset of [1, H]), each weighted by the
    number of its translates inside [0, H]. Above max_shapes a fixed-seed
    random sample of (k+1)-subsets is used instead.
    """
    if k < 0 or H < k:
        raise DomainError(f"need 0 <= k <= H, got k={k}, H={H}")
    m = k + 1
    primes = primes_upto(P_max)
    small = primes[primes <= H]
    tail = math.exp(_generic_log_tail(m, primes[primes > H])) if m > 1 else 1.0

    def series(rows: np.ndarray) -> np.ndarray:
        if small.size == 0:
            return np.full(rows.shape[0], tail)
        return np.prod(_tuple_factors(rows, small), axis=1) * tail

    if k == 0:
        return GallagherMean(1.0, 0.0, 1, False)
    n_shapes = math.comb(H, k)
    if n_shapes <= max_shapes:
        num = 0.0
        den = 0
        it = combinations(range(1, H + 1), k)
        while True:
            batch = [c for _, c in zip(range(4096), it)]
            if not batch:
                break
            rows = np.zeros((len(batch), m), dtype=np.int64)
            rows[:, 1:] = np.array(batch, dtype=np.int64)
            w = H + 1 - rows[:, -1]
            num += float(np.dot(w, series(rows)))
            den += int(w.sum())
        return GallagherMean(num / den, 0.0, n_shapes, False)
    rng = np.random.default_rng(seed)
    rows = np.sort(np.array([rng.choice(H + 1, size=m, replace=False) for _ in range(samples)]), axis=1)
    vals = series(rows)
    return GallagherMean(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples)), samples, True)


__all__ = [
    "INFINITE",
    "Box",
    "DicksonPrediction",
    "GallagherMean",
    "LinearFormSystem",
    "beta_infinity",
    "complexity",
    "count_nonvanishing_enumerated",
    "count_nonvanishing_ie",
    "dickson_prediction",
    "gallagher_mean",
    "local_factor",
    "local_factors",
    "primes_upto",
    "tuple_singular_series",
    "weighted_count",
]
