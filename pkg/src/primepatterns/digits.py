"""
Binary digit sums, the Fourier spectrum of (-1)^{s_k} on Z/2^kZ, progression
L1 sums of that spectrum, the omega_{r,s} weights and the correlation of the
von Mangoldt function with (-1)^{s(n)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import FactorSieve, nu2
from .errors import DomainError

MAX_SPECTRUM_BITS = 26
OMEGA_BUDGET = 10**8
METHODS = ("product", "direct")


def digit_sum(n: int, k: int | None = None) -> int:
    """Binary digit sum s(n), or s_k(n) over the k lowest bits when k is given."""
    n = int(n)
    if n < 0:
        raise DomainError(f"digit sums need n >= 0, got {n}")
    if k is not None:
        if k < 0:
            raise DomainError(f"bit cutoff must be >= 0, got {k}")
        n &= (1 << k) - 1
    return n.bit_count() if hasattr(n, "bit_count") else bin(n).count("1")


def digit_sign(n: int, k: int | None = None) -> int:
    """f(n) = (-1)^{s(n)}, or f_k(n) = (-1)^{s_k(n)}."""
    return -1 if digit_sum(n, k) & 1 else 1


def digit_signs(n: np.ndarray, k: int | None = None) -> np.ndarray:
    """Vectorised digit_sign over a non-negative integer array (int64 result)."""
    n = np.asarray(n, dtype=np.int64)
    if k is not None:
        n = n & ((1 << k) - 1)
    return 1 - 2 * (np.bitwise_count(n).astype(np.int64) & 1)


@dataclass(frozen=True)
class DigitSpectrum:
    """Values of f_k^(r) = E_{x mod 2^k} f_k(x) e(-rx/2^k) for r = 0..2^k-1."""

    k: int
    values: np.ndarray
    method: str

    @property
    def modulus(self) -> int:
        return 1 << self.k

    def abs(self) -> np.ndarray:
        return np.abs(self.values)


def _check_bits(k: int):
    if not 1 <= k <= MAX_SPECTRUM_BITS:
        raise DomainError(f"spectrum needs 1 <= k <= {MAX_SPECTRUM_BITS}, got {k}")


def _product_spectrum(k: int) -> np.ndarray:
    # 2^-k prod_j (1 - e(-2^j r/2^k)); the factors with j >= 1 form the level
    # k-1 product evaluated at r mod 2^{k-1}, so build level by level
    M = 1 << k
    roots = np.exp(-2j * np.pi * np.arange(M) / M)
    out = np.ones(1, dtype=np.complex128)
    for m in range(1, k + 1):
        out = 0.5 * (1 - roots[:: 1 << (k - m)]) * np.tile(out, 2)
    return out


def _direct_spectrum(k: int) -> np.ndarray:
    M = 1 << k
    return np.fft.fft(digit_signs(np.arange(M)).astype(np.float64)) / M


def spectrum(k: int, method: str = "product") -> DigitSpectrum:
    """Fourier spectrum of f_k.

    "product" evaluates the factorisation 2^-k prod_{j<k} (1 - e(-2^j r/2^k));
    "direct" applies an FFT to the 2^k signs. The minus sign in the exponent
    matches the transform's e(-rx/2^k) kernel, so the two agree entrywise.
    """
    _check_bits(k)
    if method == "product":
        vals = _product_spectrum(k)
    elif method == "direct":
        vals = _direct_spectrum(k)
    else:
        raise DomainError(f"unknown spectrum method {method!r}; choose from {METHODS}")
    vals.setflags(write=False)
    return DigitSpectrum(k, vals, method)


def progression_l1(spec: DigitSpectrum, k_prime: int, a: int) -> float:
    """sum of |f_k^(r)| over r = a (mod 2^k')."""
    if not 0 <= k_prime <= spec.k:
        raise DomainError(f"need 0 <= k' <= k, got k'={k_prime}, k={spec.k}")
    if not 0 <= a < (1 << k_prime):
        raise DomainError(f"residue a={a} outside [0, 2^{k_prime})")
    return float(np.abs(spec.values[a :: 1 << k_prime]).sum())


def progression_l1_table(spec: DigitSpectrum, k_prime: int) -> np.ndarray:
    """progression_l1 for every a in [0, 2^k') at once."""
    if not 0 <= k_prime <= spec.k:
        raise DomainError(f"need 0 <= k' <= k, got k'={k_prime}, k={spec.k}")
    return np.abs(spec.values).reshape(-1, 1 << k_prime).sum(axis=0)


def prime_digit_correlation(sieve: FactorSieve, X: int) -> float:
    """E_{n <= X} Lambda(n) (-1)^{s(n)}."""
    X = int(X)
    if X < 1:
        raise DomainError(f"X must be >= 1, got {X}")
    if X > sieve.limit:
        raise DomainError(f"X={X} exceeds sieve limit {sieve.limit}")
    lam = sieve.lambda_table[1 : X + 1]
    signs = digit_signs(np.arange(1, X + 1))
    return float(np.dot(lam, signs)) / X


@dataclass(frozen=True)
class OmegaWeight:
    value: float
    bound: float
    t: int


def _nearest_int_inverse(num: np.ndarray, k: int, cap: float) -> np.ndarray:
    """min(cap, ||num / 2^k||^-1) with ||0||^-1 = infinity."""
    M = 1 << k
    m = num % M
    dist = np.minimum(m, M - m)
    with np.errstate(divide="ignore"):
        inv = np.where(dist == 0, np.inf, M / np.maximum(dist, 1))
    return np.minimum(cap, inv)


def omega_weight(mu: int, nu: int, rho: int, k: int, r: int, s: int) -> OmegaWeight:
    """omega_{r,s} = 2^{-mu-nu-rho} sum_{n ~ 2^nu} sum_{1<=|h|<=2^rho} min(2^mu, ||(r(n+h)+sn)/2^k||^-1).

    Also returns the envelope 2^-mu + 2^{k-t-mu-nu} + 2^{t-k} with t = nu_2(r+s),
    where t = k when r + s = 0 mod 2^k.
    """
    if min(mu, nu, rho) < 0 or nu < 1 or k < 1:
        raise DomainError("need mu, rho >= 0 and nu, k >= 1")
    if 2 ** (nu + rho) > OMEGA_BUDGET:
        raise DomainError(f"2^(nu+rho) = 2^{nu + rho} exceeds the enumeration budget")
    M = 1 << k
    r %= M
    s %= M
    n = np.arange(1 << (nu - 1), 1 << nu, dtype=np.int64)
    hs = np.arange(1, (1 << rho) + 1, dtype=np.int64)
    h = np.concatenate([-hs[::-1], hs])
    num = (r * (n[:, None] + h[None, :]) + s * n[:, None]) % M
    total = float(_nearest_int_inverse(num, k, float(2**mu)).sum())
    value = total / 2.0 ** (mu + nu + rho)
    total_rs = (r + s) % M
    t = k if total_rs == 0 else min(k, nu2(total_rs))
    bound = 2.0**-mu + 2.0 ** (k - t - mu - nu) + 2.0 ** (t - k)
    return OmegaWeight(value, bound, t)


__all__ = [
    "DigitSpectrum",
    "OmegaWeight",
    "digit_sign",
    "digit_signs",
    "digit_sum",
    "omega_weight",
    "prime_digit_correlation",
    "progression_l1",
    "progression_l1_table",
    "spectrum",
]
