import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primepatterns.arith import FactorSieve, PrimeTuple, TruncationParams, truncated_von_mangoldt_poly
from primepatterns.errors import DegenerateWeightsError, DomainError
from primepatterns.gpy import (
    GpyConfig,
    brun_titchmarsh_density,
    bv_discrepancy,
    gpy_densities,
    is_admissible,
    main_term_sum,
    rho_predicted,
)


def test_admissible_examples():
    assert is_admissible(PrimeTuple.of([0, 2]))
    assert not is_admissible(PrimeTuple.of([0, 2, 4]))
    assert is_admissible(PrimeTuple.of([0, 4, 6, 10, 12, 16]))
    assert not is_admissible([0, 1])


def _admissible_bruteforce(offs):
    k = len(offs)
    return all(
        len({h % p for h in offs}) < p
        for p in range(2, k + 1)
        if all(p % q for q in range(2, p))
    )


@settings(max_examples=200, deadline=None)
@given(st.sets(st.integers(0, 60), min_size=1, max_size=8), st.integers(-100, 100))
def test_admissible_translation_invariant(offs, shift):
    offs = sorted(offs)
    assert is_admissible(offs) == is_admissible([h + shift for h in offs]) == _admissible_bruteforce(offs)


def test_config_validation():
    with pytest.raises(DomainError):
        GpyConfig(N=100, k=3, gamma=0.5)
    with pytest.raises(DomainError):
        GpyConfig(N=100, k=0)
    with pytest.raises(DomainError):
        GpyConfig(N=100, k=2, l=-1)
    assert GpyConfig(N=10**4, k=1, gamma=0.25).R == 10
    assert GpyConfig(N=10**8, k=1, gamma=0.25).R == 100


@pytest.fixture(scope="module")
def sieve():
    return FactorSieve(2 * 10**5 + 100)


def test_k1_matches_direct_oracle(sieve):
    N = 1000
    config = GpyConfig(N=N, k=1, l=0, gamma=0.3)
    dens = gpy_densities(sieve, config, [0])
    R = config.R
    w = []
    for n in range(N, 2 * N):
        v = truncated_von_mangoldt_poly(sieve, n, TruncationParams(1, R))
        w.append(v * v)
    w = np.array(w)
    lam = np.array([math.log(n) if sieve.is_prime(n) else 0.0 for n in range(N, 2 * N)])
    assert dens.Q1 == pytest.approx(w.mean(), rel=1e-12)
    rho = (lam @ w / N / math.log(3 * N)) / w.mean()
    assert dens.rho[0] == pytest.approx(rho, rel=1e-12)
    assert dens.rho[0] > 0


@pytest.mark.parametrize(
    "N,k,l,gamma,tup",
    [(10**4, 3, 1, 0.25, (0, 2, 6)), (10**5, 2, 0, 0.3, (0, 2)), (5 * 10**4, 6, 1, 0.25, (0, 4, 6, 10, 12, 16))],
)
def test_rho_bounds(sieve, N, k, l, gamma, tup):
    dens = gpy_densities(sieve, GpyConfig(N=N, k=k, l=l, gamma=gamma), tup)
    assert dens.Q1 > 0
    assert np.all(dens.rho >= 0)
    assert np.all(dens.Q2 / dens.Q1 <= 1 + 1e-9)


def test_degenerate_weights(sieve):
    with pytest.raises(DegenerateWeightsError):
        gpy_densities(sieve, GpyConfig(N=10, k=1, gamma=0.25), [0])


def test_gpy_rejects_bad_inputs(sieve):
    with pytest.raises(DomainError):
        gpy_densities(sieve, GpyConfig(N=1000, k=3), [0, 2, 4])
    with pytest.raises(DomainError):
        gpy_densities(sieve, GpyConfig(N=1000, k=2), [0, 2, 6])
    with pytest.raises(DomainError):
        gpy_densities(sieve, GpyConfig(N=10**6, k=2), [0, 2])


def test_rho_predicted_values():
    assert rho_predicted(GpyConfig(N=10**7, k=3, l=1, gamma=0.25)) == pytest.approx(0.125)
    assert rho_predicted(GpyConfig(N=10**7, k=3, l=1, gamma=0.25), as_displayed=True) == pytest.approx(0.375)
    for g in (0.1, 0.25, 0.4):
        assert rho_predicted(GpyConfig(N=100, k=1, l=0, gamma=g)) == pytest.approx(g)
    # l = 0 reduces to 2 gamma / (k + 1)
    assert rho_predicted(GpyConfig(N=100, k=5, l=0, gamma=0.2)) == pytest.approx(2 * 0.2 / 6)


def test_rho_predicted_large_k_limit():
    errs = []
    for k in (10**2, 10**4, 10**6):
        config = GpyConfig(N=100, k=k, l=math.ceil(math.sqrt(k)), gamma=0.25)
        errs.append(abs(k * rho_predicted(config) - 1))
    assert errs == sorted(errs, reverse=True)
    assert errs[-1] < 0.01


def _eq333_bruteforce(sieve, R):
    total = 0.0
    ds = [d for d in range(1, int(R) + 1, 2) if sieve.mobius(d)]
    for d in ds:
        for e in ds:
            lcm = d * e // math.gcd(d, e)
            total += sieve.mobius(d) * sieve.mobius(e) / sieve.totient(lcm) * math.log(R / d) * math.log(R / e)
    return total


def test_main_term_small_cases(sieve):
    assert main_term_sum(sieve, 2).value == pytest.approx(math.log(2) ** 2)
    assert main_term_sum(sieve, 1).value == 0.0
    for R in (3, 10, 37.5, 60):
        assert main_term_sum(sieve, R).value == pytest.approx(_eq333_bruteforce(sieve, R), rel=1e-10)


def test_main_term_symmetric_route(sieve):
    for R in (5, 20, 77, 100):
        assert main_term_sum(sieve, R, symmetric=True).value == pytest.approx(main_term_sum(sieve, R).value, rel=1e-12)


def test_main_term_trend(sieve):
    ratios = [main_term_sum(sieve, R).asymptotic_ratio for R in (10**2, 10**3, 10**4)]
    assert ratios[0] < ratios[1] < ratios[2] < 1


def _psi_bruteforce(sieve, N, a, q):
    return sum(sieve.lambda_table[n] for n in range(1, N + 1) if n % q == a % q) / N


def test_bv_small_oracle(sieve):
    N, Q = 2000, 12
    res = bv_discrepancy(sieve, N, Q)
    total = 0.0
    for q in range(1, Q + 1):
        units = [a for a in range(q) if math.gcd(a, q) == 1]
        total += max(abs(_psi_bruteforce(sieve, N, a, q) - 1 / len(units)) for a in units)
    assert res.value == pytest.approx(total, rel=1e-12)
    assert res.trivial_bound == pytest.approx(sum(1 / sieve.totient(q) for q in range(1, Q + 1)))


def test_bv_q1(sieve):
    N = 10**5
    res = bv_discrepancy(sieve, N, 1)
    assert res.value == pytest.approx(abs(sieve.lambda_table[1 : N + 1].sum() / N - 1))
    assert res.value < 0.01


def test_bv_decreases_with_N(sieve_2m):
    assert bv_discrepancy(sieve_2m, 10**6, 50).value < bv_discrepancy(sieve_2m, 10**4, 50).value
    res = bv_discrepancy(sieve_2m, 10**6, 100)
    assert res.value < res.trivial_bound


def test_bv_domain(sieve):
    with pytest.raises(DomainError):
        bv_discrepancy(sieve, 10, 11)


def test_brun_titchmarsh(sieve_2m):
    x, y = 10**6, 10**4
    for R in (10, 31.5, 99):
        bound = brun_titchmarsh_density(sieve_2m, x, y, R)
        primes = int(np.count_nonzero(sieve_2m.spf[x + 1 : x + y + 1] == np.arange(x + 1, x + y + 1)))
        small = int(np.count_nonzero(sieve_2m.primes <= R))
        assert bound >= (primes - small) / y
    actual = primes / y
    assert actual <= bound <= 4 * actual


def test_brun_titchmarsh_prime_weight(sieve):
    from primepatterns.arith import gy_weight_sum

    s = gy_weight_sum(sieve, 1000, 1100, 30)
    for i, n in enumerate(range(1001, 1101)):
        if sieve.is_prime(n):
            assert s[i] == pytest.approx(1.0, abs=1e-12)


def test_brun_titchmarsh_errors(sieve):
    with pytest.raises(DomainError):
        brun_titchmarsh_density(sieve, 100, 100, 1)
    with pytest.raises(DomainError):
        brun_titchmarsh_density(sieve, 100, 10, 20)
