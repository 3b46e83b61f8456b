"""
Small-gaps experiment: admissible tuples, the weighted densities Q1, Q2^(i)
and rho^(i), the odd-divisor main-term sum, the Brun-Titchmarsh majorant
density and the Bombieri-Vinogradov discrepancy sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import (
    FactorSieve,
    PrimeTuple,
    TruncationParams,
    _as_tuple,
    batch_polynomial_weights,
    gy_weight_sum,
)
from .errors import BudgetError, DegenerateWeightsError, DomainError

DEFAULT_P_MAX = 10**5


@dataclass(frozen=True)
class GpyConfig:
    """Range start N, tuple size k, extra power l and R = floor(N^gamma)."""

    N: int
    k: int
    l: int = 0
    gamma: float = 0.25

    def __post_init__(self):
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")
        if self.l < 0:
            raise DomainError(f"l must be >= 0, got {self.l}")
        if not 0 < self.gamma < 0.5:
            raise DomainError(f"gamma must lie in (0, 1/2), got {self.gamma}")
        if self.N < 2:
            raise DomainError(f"N must be >= 2, got {self.N}")

    @property
    def R(self) -> int:
        # N**gamma in floating point can land just below an exact integer power
        r = math.floor(self.N**self.gamma)
        while (r + 1) ** (1 / self.gamma) <= self.N * (1 + 1e-12):
            r += 1
        return r


@dataclass
class GpyDensities:
    Q1: float
    Q2: np.ndarray
    rho: np.ndarray
    R: int


def is_admissible(tup) -> bool:
    """True iff for every prime p <= k the offsets miss some residue class mod p."""
    offs = set(tup.offsets if isinstance(tup, PrimeTuple) else (int(h) for h in tup))
    k = len(offs)
    for p in range(2, k + 1):
        if all(p % q for q in range(2, math.isqrt(p) + 1)):
            if len({h % p for h in offs}) == p:
                return False
    return True


def gpy_densities(sieve: FactorSieve, config: GpyConfig, tup, workers: int | None = None) -> GpyDensities:
    """Q1 = E mu_n, Q2^(i) = E Lambda'(n+h_i) mu_n / log 3N and rho^(i) = Q2^(i)/Q1 over [N, 2N).

    The weights are mu_n = Lambda_{k+l,R}(prod (n + h_i))^2.
    """
    tup = _as_tuple(tup)
    if tup.k != config.k:
        raise DomainError(f"tuple has {tup.k} offsets but config.k = {config.k}")
    if not is_admissible(tup):
        raise DomainError(f"tuple {tup.offsets} is not admissible")
    N = config.N
    if 2 * N + tup.offsets[-1] > sieve.limit:
        raise DomainError(f"need sieve limit >= {2 * N + tup.offsets[-1]}, have {sieve.limit}")
    R = config.R
    weights = batch_polynomial_weights(sieve, N, tup, TruncationParams(config.k + config.l, max(R, 1)), workers=workers)
    Q1 = float(weights.mean())
    if Q1 == 0.0:
        raise DegenerateWeightsError(f"all weights vanish (R={R}); increase N or gamma")
    lam = sieve.lambda_prime_table
    log3N = math.log(3 * N)
    Q2 = np.array([float(np.dot(lam[N + h : 2 * N + h], weights)) / N / log3N for h in tup.offsets])
    return GpyDensities(Q1=Q1, Q2=Q2, rho=Q2 / Q1, R=R)


def rho_predicted(config: GpyConfig, as_displayed: bool = False) -> float:
    """Asymptotic rho^(i) = 2/(k+2l+1) * (2l+1)/(l+1) * log R/log N, with log R/log N = gamma.

    For k, l large with l = o(k) this is about 4 gamma / k, and l = 0 gives
    2 gamma/(k+1). as_displayed=True returns the variant whose leading
    factor is 2k/(k+2l+1), which is k times larger and contradicts both limits.
    """
    k, l = config.k, config.l
    lead = 2 * k if as_displayed else 2
    return lead / (k + 2 * l + 1) * (2 * l + 1) / (l + 1) * config.gamma


@dataclass
class MainTermSum:
    value: float
    asymptotic_ratio: float
    euler_product: float
    P_max: int


def _singular_constant(sieve: FactorSieve, P_max: int) -> tuple[float, float]:
    """(2 prod_{3<=p<=P_max}(1 - 1/(p-1)^2), the odd-prime product alone)."""
    if P_max > sieve.limit:
        raise DomainError(f"P_max={P_max} exceeds sieve limit {sieve.limit}")
    p = sieve.primes_upto(P_max).astype(np.float64)
    p = p[p >= 3]
    odd = float(np.prod(1 - 1 / (p - 1) ** 2))
    return 2 * odd, odd


def main_term_sum(
    sieve: FactorSieve,
    R: float,
    P_max: int = DEFAULT_P_MAX,
    symmetric: bool = False,
    block: int = 512,
) -> MainTermSum:
    """sum over odd d, d' <= R of mu(d)mu(d')/phi([d,d']) log(R/d) log(R/d').

    The Euler product in the asymptotic includes the p = 2 factor: restricting
    to odd divisors doubles the local density there, so the sum behaves like
    2 prod_{p>=3}(1 - 1/(p-1)^2) log R. symmetric=True sums d <= d' and
    doubles the off-diagonal part.
    """
    if R < 1:
        raise DomainError(f"R must be >= 1, got {R}")
    Rint = int(math.floor(R))
    if Rint > 10**5:
        raise BudgetError(f"R={R} exceeds the pair-enumeration budget 10^5")
    const, _ = _singular_constant(sieve, P_max)
    if Rint < 1 or R == 1:
        return MainTermSum(0.0, 0.0, const, P_max)
    mu = sieve.mobius_table(Rint)
    phi = sieve.totient_table(Rint)
    d = np.arange(1, Rint + 1, 2)
    d = d[mu[d] != 0]
    coef = mu[d] * np.log(R / d)
    ph = phi[d].astype(np.float64)
    total = 0.0
    for i in range(0, len(d), block):
        di = d[i : i + block, None]
        g = np.gcd(di, d[None, :])
        # phi([d,d']) = phi(d) phi(d') / phi(gcd) for squarefree d, d'
        phi_lcm = ph[i : i + block, None] * ph[None, :] / phi[g]
        terms = coef[i : i + block, None] * coef[None, :] / phi_lcm
        if symmetric:
            j = np.arange(i, i + terms.shape[0])[:, None]
            cols = np.arange(len(d))[None, :]
            terms = np.where(cols > j, 2 * terms, np.where(cols == j, terms, 0.0))
        total += float(terms.sum())
    ratio = total / (math.log(R) * const)
    return MainTermSum(total, ratio, const, P_max)


@dataclass
class BVDiscrepancy:
    value: float
    trivial_bound: float


def bv_discrepancy(sieve: FactorSieve, N: int, Q: int) -> BVDiscrepancy:
    """sum_{q<=Q} max_{(a,q)=1} |psi(N;a,q) - 1/phi(q)|.

    psi(N;a,q) = (1/N) sum_{n<=N, n = a (q)} Lambda(n), the normalisation under
    which psi(N;a,q) ~ 1/phi(q). Also returns the comparator sum_{q<=Q} 1/phi(q).
    """
    if not 1 <= Q <= N <= sieve.limit:
        raise DomainError(f"need 1 <= Q <= N <= sieve limit, got Q={Q}, N={N}")
    lam = sieve.lambda_table[1 : N + 1]
    n = np.arange(1, N + 1)
    total = 0.0
    trivial = 0.0
    for q in range(1, Q + 1):
        sums = np.bincount(n % q, weights=lam, minlength=q) / N
        a = np.arange(q)
        coprime = np.gcd(a, q) == 1
        phi_q = int(coprime.sum())
        total += float(np.max(np.abs(sums[coprime] - 1 / phi_q)))
        trivial += 1 / phi_q
    return BVDiscrepancy(total, trivial)


def brun_titchmarsh_density(sieve: FactorSieve, x: int, y: int, R: float) -> float:
    """E_{x < n <= x+y} (sum_{d|n, d<=R} mu(d) log(R/d)/log R)^2."""
    if R <= 1:
        raise DomainError("R must exceed 1 (the weights divide by log R)")
    if not R < y:
        raise DomainError(f"need R < y, got R={R}, y={y}")
    if x + y > sieve.limit:
        raise DomainError(f"x+y={x + y} exceeds sieve limit {sieve.limit}")
    s = gy_weight_sum(sieve, x, x + y, R)
    return float(np.mean(s * s))


__all__ = [
    "BVDiscrepancy",
    "GpyConfig",
    "GpyDensities",
    "MainTermSum",
    "PrimeTuple",
    "brun_titchmarsh_density",
    "bv_discrepancy",
    "gpy_densities",
    "is_admissible",
    "main_term_sum",
    "rho_predicted",
]
