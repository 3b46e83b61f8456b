import cmath
import itertools
import math

import numpy as np
import pytest

from primepatterns.arith import FactorSieve
from primepatterns.dickson import LinearFormSystem
from primepatterns.errors import BudgetError, DomainError
from primepatterns.gowers import (
    FiniteFunction,
    default_w,
    gvn_check,
    heisenberg_matrix,
    heisenberg_orbit,
    multilinear_average,
    primorial,
    transform,
    u2_inverse,
    u_norm,
    w_tricked_lambda,
)

AP3 = LinearFormSystem.parse("1 0 0; 1 1 0; 1 2 0")
AP4 = LinearFormSystem.parse("1 0 0; 1 1 0; 1 2 0; 1 3 0")


def _random_function(rng, N, bounded=True):
    vals = rng.random(N) * np.exp(2j * np.pi * rng.random(N))
    return FiniteFunction(vals, bounded)


def _defining_transform(f):
    N = f.N
    return [sum(f.values[n] * cmath.exp(-2j * math.pi * r * n / N) for n in range(N)) / N for r in range(N)]


def _literal_u_power(f, k):
    """Average over x and h_1..h_k of the product over the cube, conjugating odd vertices."""
    N = f.N
    v = f.values
    total = 0j
    for x, *hs in itertools.product(range(N), repeat=k + 1):
        prod = 1 + 0j
        for omega in itertools.product((0, 1), repeat=k):
            val = v[(x + sum(o * h for o, h in zip(omega, hs))) % N]
            prod *= val.conjugate() if sum(omega) % 2 else val
        total += prod
    return (total / N ** (k + 1)).real


def test_transform_examples():
    N = 32
    assert np.allclose(transform(FiniteFunction(np.ones(N))).values, np.eye(N)[0])
    assert np.allclose(transform(FiniteFunction.character(N, 3)).values, np.eye(N)[3])


def test_transform_defining_sum():
    rng = np.random.default_rng(0)
    f = _random_function(rng, 256, bounded=False)
    assert np.max(np.abs(transform(f).values - _defining_transform(f))) <= 1e-10


def test_transform_parseval():
    rng = np.random.default_rng(1)
    for N in (7, 64, 101):
        f = _random_function(rng, N)
        assert np.sum(np.abs(transform(f).values) ** 2) == pytest.approx(np.mean(np.abs(f.values) ** 2))


def test_finite_function_invariants():
    with pytest.raises(DomainError):
        FiniteFunction([2.0, 0.0], bounded=True)
    with pytest.raises(DomainError):
        FiniteFunction([])
    f = FiniteFunction([1, 2, 3])
    with pytest.raises(ValueError):
        f.values[0] = 5
    assert list(f.shifted(1).values) == [2, 3, 1]
    assert f(np.array([4, -1])).tolist() == [2, 3]


def test_u_norm_constant():
    f = FiniteFunction(np.ones(40))
    for k in (2, 3, 4):
        assert u_norm(f, k) == pytest.approx(1.0)


def test_u3_quadratic_phase():
    for N in (p for p in range(3, 129) if all(p % q for q in range(2, math.isqrt(p) + 1))):
        f = FiniteFunction.from_callable(N, lambda n: np.exp(2j * np.pi * (n * n % N) / N), bounded=True)
        assert abs(u_norm(f, 3) - 1) <= 1e-9


@pytest.mark.parametrize("k,N", [(2, 9), (3, 7), (4, 5)])
def test_u_norm_matches_literal_cube(k, N):
    rng = np.random.default_rng(k)
    for _ in range(3):
        f = _random_function(rng, N, bounded=False)
        assert u_norm(f, k, "direct") == pytest.approx(max(_literal_u_power(f, k), 0) ** (1 / 2**k), rel=1e-9)


def test_u2_fourier_identity():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        f = _random_function(rng, 128)
        assert abs(u_norm(f, 2, "direct") - u_norm(f, 2, "fourier")) <= 1e-9


def test_u_norm_monotone():
    rng = np.random.default_rng(3)
    for N in (8, 17, 32, 64):
        for _ in range(5):
            f = _random_function(rng, N)
            assert u_norm(f, 2) <= u_norm(f, 3) + 1e-12
        f = _random_function(rng, min(N, 32))
        assert u_norm(f, 3) <= u_norm(f, 4) + 1e-12


def test_u_norm_invariances():
    rng = np.random.default_rng(4)
    f = _random_function(rng, 48)
    assert u_norm(f.modulated(7), 2) == pytest.approx(u_norm(f, 2))
    for k in (2, 3):
        assert u_norm(f.shifted(11), k) == pytest.approx(u_norm(f, k))


def test_u_norm_errors():
    with pytest.raises(DomainError):
        u_norm(FiniteFunction(np.ones(8)), 5)
    with pytest.raises(BudgetError):
        u_norm(FiniteFunction(np.ones(513)), 3)
    with pytest.raises(DomainError):
        u_norm(FiniteFunction(np.ones(200)), 4)
    with pytest.raises(DomainError):
        u_norm(FiniteFunction(np.ones(8)), 3, "fourier")


def test_u2_inverse_examples():
    N = 64
    r, c = u2_inverse(FiniteFunction.character(N, 5))
    assert r == 5 and c == pytest.approx(1.0)
    rng = np.random.default_rng(0)
    n = np.arange(N)
    vals = 0.5 * np.exp(2j * np.pi * 2 * n / N) + 0.1 * (rng.random(N) - 0.5)
    r, _ = u2_inverse(FiniteFunction(vals, bounded=True))
    assert r == 2
    # ties go to the least frequency
    tie = FiniteFunction.character(N, 9).values + FiniteFunction.character(N, 4).values
    assert u2_inverse(FiniteFunction(tie / 2))[0] == 4
    with pytest.raises(DomainError):
        u2_inverse(FiniteFunction([2.0, 0.0]))


def test_u2_inverse_property():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        f = _random_function(rng, int(rng.integers(2, 80)))
        _, c = u2_inverse(f)
        assert c >= u_norm(f, 2) ** 2 - 1e-9


def test_u2_converse():
    rng = np.random.default_rng(6)
    N = 97
    n = np.arange(N)
    for delta in (0.1, 0.3, 0.6):
        r = int(rng.integers(N))
        noise = (rng.random(N) - 0.5).astype(complex)
        noise -= np.vdot(np.exp(2j * np.pi * r * n / N), noise) / N * np.exp(2j * np.pi * r * n / N)
        vals = delta * np.exp(2j * np.pi * r * n / N) + 0.3 * noise
        f = FiniteFunction(vals)
        assert abs(transform(f).values[r]) == pytest.approx(delta)
        assert u_norm(f, 2) >= delta - 1e-12


def test_multilinear_average_bruteforce():
    rng = np.random.default_rng(7)
    N = 11
    fs = [_random_function(rng, N) for _ in range(3)]
    expected = sum(fs[0].values[a] * fs[1].values[(a + b) % N] * fs[2].values[(a + 2 * b) % N] for a in range(N) for b in range(N)) / N**2
    assert multilinear_average(AP3, fs) == pytest.approx(expected)


def test_gvn_examples():
    ones = [FiniteFunction(np.ones(101), True)] * 3
    res = gvn_check(AP3, ones, 1)
    assert res.lhs == pytest.approx(1) and res.rhs == pytest.approx(1) and res.holds


def test_gvn_3ap_trials():
    rng = np.random.default_rng(8)
    for _ in range(1000):
        assert gvn_check(AP3, [_random_function(rng, 101) for _ in range(3)], 1).holds


def test_gvn_4ap_trials():
    rng = np.random.default_rng(9)
    for _ in range(100):
        assert gvn_check(AP4, [_random_function(rng, 61) for _ in range(4)], 2).holds


def test_gvn_errors():
    rng = np.random.default_rng(10)
    fs = [_random_function(rng, 61) for _ in range(4)]
    with pytest.raises(DomainError):
        gvn_check(AP4, fs, 1)
    with pytest.raises(DomainError):
        gvn_check(AP3, [_random_function(rng, 60) for _ in range(3)], 1)
    with pytest.raises(DomainError):
        gvn_check(AP3, fs[:2], 1)
    with pytest.raises(DomainError):
        gvn_check(AP3, [FiniteFunction([2.0] * 61)] + fs[:2], 1)


@pytest.fixture(scope="module")
def wsieve():
    return FactorSieve(6 * 10**5 + 10)


def test_w_trick_means(wsieve):
    assert 0.95 <= w_tricked_lambda(wsieve, 1, 2, 10**5).mean <= 1.05
    assert 0.9 <= w_tricked_lambda(wsieve, 5, 6, 10**5).mean <= 1.1
    with pytest.raises(DomainError):
        w_tricked_lambda(wsieve, 3, 6, 100)
    with pytest.raises(DomainError):
        w_tricked_lambda(wsieve, 1, 2, 10**6)


def test_w_trick_values(wsieve):
    wt = w_tricked_lambda(wsieve, 1, 6, 20)
    lam = wsieve.lambda_table
    assert wt.values.tolist() == pytest.approx([lam[6 * n + 1] / 3 for n in range(1, 21)])


def test_w_helpers():
    assert primorial(5) == 30 and primorial(1) == 1
    assert default_w(10) == 2
    assert default_w(1e4) == 3
    assert default_w(1e12) == 5


def test_heisenberg_small_powers():
    a, b, c = 0.3, -1.7, 2.2
    assert np.allclose(heisenberg_orbit(a, b, c, 0).power, np.eye(3))
    # heisenberg_matrix takes (x, y, z) with z top-right; the generator has beta there
    g = heisenberg_matrix(a, c, b)
    assert np.allclose(heisenberg_orbit(a, b, c, 1).power, g)
    two = heisenberg_orbit(a, b, c, 2).power
    assert np.allclose(two, g @ g)
    assert two[0, 2] == pytest.approx(2 * b + a * c)
    with pytest.raises(DomainError):
        heisenberg_orbit(a, b, c, -1)


def test_heisenberg_closed_form():
    for params in ((math.sqrt(2), 0.0, 1.0), (0.123, 0.456, 0.789), (-1.3, 2.1, 0.5)):
        alpha, beta, gamma = params
        g = heisenberg_matrix(alpha, gamma, beta)
        acc = np.eye(3)
        for n in range(101):
            assert np.max(np.abs(heisenberg_orbit(*params, n).power - acc)) <= 1e-9 * max(1, np.abs(acc).max())
            acc = acc @ g


def test_heisenberg_reduction():
    for params in ((math.sqrt(2), 0.0, 1.0), (0.31, 0.77, -0.41)):
        for n in range(0, 300, 7):
            pt = heisenberg_orbit(*params, n)
            assert all(-0.5 <= v < 0.5 for v in pt.reduced)
            a, b, c = pt.lattice
            lattice = np.array([[1, a, c], [0, 1, b], [0, 0, 1]], dtype=float)
            assert np.allclose(pt.power @ lattice, heisenberg_matrix(*pt.reduced), atol=1e-6)
