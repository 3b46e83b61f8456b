"""
Functions on Z/NZ: the normalised Fourier transform, Gowers U^k norms, the
U^2 inverse statement, the generalized von Neumann comparison for systems of
linear forms, W-tricked von Mangoldt values and the Heisenberg orbit example.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .arith import FactorSieve
from .dickson import Box, LinearFormSystem, complexity
from .errors import BudgetError, DomainError

DIRECT_BUDGET = {2: 4096, 3: 512, 4: 128}
FOURIER_BUDGET = 1 << 20
GVN_BUDGET = 10**8
BOUNDED_TOL = 1e-12


@dataclass(frozen=True)
class FiniteFunction:
    """A complex-valued function on Z/NZ, stored as its N values."""

    values: np.ndarray
    bounded: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128)
        if vals.ndim != 1 or vals.size == 0:
            raise DomainError("a finite function needs a non-empty 1-d array of values")
        if self.bounded and np.max(np.abs(vals)) > 1 + BOUNDED_TOL:
            raise DomainError("bounded mode requires |f(n)| <= 1")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, N: int, fn: Callable[[np.ndarray], np.ndarray], bounded: bool = False) -> "FiniteFunction":
        return cls(fn(np.arange(int(N), dtype=np.int64)), bounded)

    @classmethod
    def character(cls, N: int, r: int) -> "FiniteFunction":
        """n -> e(rn/N)."""
        n = np.arange(int(N), dtype=np.int64)
        return cls(np.exp(2j * np.pi * ((r * n) % N) / N), True)

    @property
    def N(self) -> int:
        return self.values.size

    def __call__(self, n) -> np.ndarray:
        return self.values[np.asarray(n) % self.N]

    def shifted(self, a: int) -> "FiniteFunction":
        return FiniteFunction(np.roll(self.values, -int(a)), self.bounded)

    def modulated(self, r: int) -> "FiniteFunction":
        return FiniteFunction(self.values * FiniteFunction.character(self.N, r).values, self.bounded)


def e(x) -> np.ndarray:
    """e(x) = exp(2 pi i x)."""
    return np.exp(2j * np.pi * np.asarray(x, dtype=np.float64))


def transform(f: FiniteFunction) -> FiniteFunction:
    """f^(r) = E_n f(n) e(-rn/N)."""
    return FiniteFunction(np.fft.fft(f.values) / f.N)


def _derivative(g: np.ndarray, h: int) -> np.ndarray:
    # Delta_h g(x) = g(x + h) conj(g(x))
    return np.roll(g, -h) * np.conj(g)


def _all_derivatives(g: np.ndarray) -> np.ndarray:
    """Matrix D[h, x] = g(x + h) conj(g(x)) for every shift h."""
    N = g.size
    idx = (np.arange(N)[:, None] + np.arange(N)[None, :]) % N
    return g[idx] * np.conj(g)[None, :]


def _u_power_direct(g: np.ndarray, k: int) -> float:
    """||g||_{U^k}^{2^k} = E_{h_1..h_{k-1}} |E_x Delta_{h_1..h_{k-1}} g(x)|^2."""
    if k == 1:
        return float(abs(g.mean()) ** 2)
    if k == 2:
        return float(np.mean(np.abs(_all_derivatives(g).mean(axis=1)) ** 2))
    return float(np.mean([_u_power_direct(_derivative(g, h), k - 1) for h in range(g.size)]))


def u_norm(f: FiniteFunction, k: int, method: str = "auto") -> float:
    """Gowers U^k norm of f on Z/NZ for k in {2, 3, 4}.

    method "direct" averages iterated multiplicative derivatives; "fourier"
    (k = 2 only) uses ||f||_{U^2}^4 = sum_r |f^(r)|^4. "auto" picks the
    Fourier route for k = 2.
    """
    if k not in DIRECT_BUDGET:
        raise DomainError(f"u_norm supports k in {{2, 3, 4}}, got {k}")
    if method == "auto":
        method = "fourier" if k == 2 else "direct"
    if method == "fourier":
        if k != 2:
            raise DomainError("the Fourier route only computes the U^2 norm")
        if f.N > FOURIER_BUDGET:
            raise BudgetError(f"N={f.N} exceeds the Fourier budget 2^20")
        power = float(np.sum(np.abs(transform(f).values) ** 4))
    elif method == "direct":
        if f.N > DIRECT_BUDGET[k]:
            raise BudgetError(f"direct U^{k} needs N <= {DIRECT_BUDGET[k]}, got {f.N}")
        power = _u_power_direct(f.values, k)
    else:
        raise DomainError(f"unknown method {method!r}")
    return max(power, 0.0) ** (1 / 2**k)


def u2_inverse(f: FiniteFunction) -> tuple[int, float]:
    """(r, |f^(r)|) for the least r maximising |f^(r)|.

    For |f| <= 1, |f^(r)| >= ||f||_{U^2}^2 at this r.
    """
    if np.max(np.abs(f.values)) > 1 + BOUNDED_TOL:
        raise DomainError("u2_inverse requires a bounded function")
    mags = np.abs(transform(f).values)
    r = int(np.argmax(mags))
    return r, float(mags[r])


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % p for p in range(2, math.isqrt(n) + 1))


@dataclass(frozen=True)
class GvnCheck:
    lhs: float
    rhs: float
    norms: tuple[float, ...]

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-9


def multilinear_average(system: LinearFormSystem, fs: Sequence[FiniteFunction]) -> complex:
    """E_{n in (Z/NZ)^d} prod_i f_i(psi_i(n))."""
    N = fs[0].N
    total = 0j
    for pts in Box.cube(0, N - 1, system.d).chunks():
        vals = system.evaluate(pts) % N
        prod = np.ones(len(pts), dtype=np.complex128)
        for i, f in enumerate(fs):
            prod *= f.values[vals[:, i]]
        total += complex(prod.sum())
    return total / N**system.d


def gvn_check(system: LinearFormSystem, fs: Sequence[FiniteFunction], s: int) -> GvnCheck:
    """|E_n prod f_i(psi_i(n))| against min_i ||f_i||_{U^{s+1}}.

    Requires a prime modulus, complexity(system) <= s and N^d <= 10^8.
    """
    if len(fs) != system.t:
        raise DomainError(f"need {system.t} functions, got {len(fs)}")
    N = fs[0].N
    if any(f.N != N for f in fs):
        raise DomainError("all functions must share one modulus")
    if not _is_prime(N):
        raise DomainError(f"modulus N={N} must be prime")
    if any(np.max(np.abs(f.values)) > 1 + BOUNDED_TOL for f in fs):
        raise DomainError("functions must be bounded by 1")
    if N**system.d > GVN_BUDGET:
        raise BudgetError(f"N^d = {N}^{system.d} exceeds 10^8")
    c = complexity(system)
    if c > s:
        raise DomainError(f"system has complexity {c} > s = {s}")
    lhs = abs(multilinear_average(system, fs))
    norms = tuple(u_norm(f, s + 1) for f in fs)
    return GvnCheck(lhs, min(norms), norms)


# -- W-trick -------------------------------------------------------------


def primorial(w: int) -> int:
    """Product of the primes <= w."""
    return math.prod(p for p in range(2, int(w) + 1) if _is_prime(p))


def default_w(N: float) -> int:
    """Largest p in {2, 3, 5} with p <= 2 log log N (at least 2)."""
    if N <= math.e:
        return 2
    cap = 2 * math.log(math.log(N))
    return max([p for p in (2, 3, 5) if p <= cap], default=2)


@dataclass(frozen=True)
class WTrick:
    values: np.ndarray
    mean: float
    W: int
    b: int


def w_tricked_lambda(sieve: FactorSieve, b: int, W: int, M: int) -> WTrick:
    """(phi(W)/W) Lambda(Wn + b) for n = 1..M, with its mean."""
    b, W, M = int(b), int(W), int(M)
    if W < 1 or M < 1:
        raise DomainError("need W, M >= 1")
    if math.gcd(b, W) != 1:
        raise DomainError(f"gcd(b, W) = {math.gcd(b, W)} != 1")
    if W * M + b > sieve.limit:
        raise DomainError(f"W*M + b = {W * M + b} exceeds sieve limit {sieve.limit}")
    phi_w = W
    for p in range(2, W + 1):
        if W % p == 0 and _is_prime(p):
            phi_w -= phi_w // p
    n = np.arange(1, M + 1, dtype=np.int64)
    vals = phi_w / W * sieve.lambda_table[W * n + b]
    vals.setflags(write=False)
    return WTrick(vals, float(vals.mean()), W, b)


# -- Heisenberg example --------------------------------------------------


def heisenberg_matrix(x: float, y: float, z: float) -> np.ndarray:
    """[[1, x, z], [0, 1, y], [0, 0, 1]]."""
    return np.array([[1.0, x, z], [0.0, 1.0, y], [0.0, 0.0, 1.0]])


def _round_half_down(v: float) -> int:
    # nearest integer r with v - r in [-1/2, 1/2)
    return math.floor(v + 0.5)


@dataclass(frozen=True)
class HeisenbergPoint:
    power: np.ndarray
    reduced: tuple[float, float, float]
    lattice: tuple[int, int, int]


def heisenberg_orbit(alpha: float, beta: float, gamma: float, n: int) -> HeisenbergPoint:
    """g^n for g = [[1, alpha, beta], [0, 1, gamma], [0, 0, 1]] and its reduction mod Gamma.

    The power has entries n alpha, n gamma and top-right n beta + n(n-1)/2 alpha gamma.
    Right multiplication by the integer matrix (a, b, c) sends (x, y, z) to
    (x + a, y + b, z + x b + c); a, b, c are chosen to land in [-1/2, 1/2)^3.
    """
    n = int(n)
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    x = n * alpha
    y = n * gamma
    z = n * beta + n * (n - 1) / 2 * alpha * gamma
    a = -_round_half_down(x)
    b = -_round_half_down(y)
    z_shift = z + x * b
    c = -_round_half_down(z_shift)
    reduced = (x + a, y + b, z_shift + c)
    return HeisenbergPoint(heisenberg_matrix(x, y, z), reduced, (a, b, c))


__all__ = [
    "FiniteFunction",
    "GvnCheck",
    "HeisenbergPoint",
    "WTrick",
    "default_w",
    "e",
    "gvn_check",
    "heisenberg_matrix",
    "heisenberg_orbit",
    "multilinear_average",
    "primorial",
    "transform",
    "u2_inverse",
    "u_norm",
    "w_tricked_lambda",
]
