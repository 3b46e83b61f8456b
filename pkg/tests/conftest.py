import math

import pytest

from primepatterns.arith import FactorSieve


@pytest.fixture(scope="session")
def small_sieve():
    return FactorSieve(10**5)


@pytest.fixture(scope="session")
def sieve_2m():
    return FactorSieve(2 * 10**6 + 10)


def trial_division_is_prime(n: int) -> bool:
    return n >= 2 and all(n % p for p in range(2, math.isqrt(n) + 1))


def trial_factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def mobius_oracle(n: int) -> int:
    fac = trial_factor(n)
    if any(e > 1 for e in fac.values()):
        return 0
    return (-1) ** len(fac)


def mangoldt_oracle(n: int) -> float:
    fac = trial_factor(n)
    return math.log(next(iter(fac))) if len(fac) == 1 else 0.0
