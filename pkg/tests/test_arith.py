import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from barw.arith import (
    Factorization,
    GaussianInteger,
    count_S_upto,
    count_sector_primes,
    factor,
    fix_part,
    gaussian_prime_over,
    is_in_S,
    is_prime,
    kubilius_main_term,
    primes_upto,
)
from barw.spectrum import enumerate_points


def brute_in_S(n):
    r = math.isqrt(n)
    return any(math.isqrt(n - a * a) ** 2 == n - a * a for a in range(r + 1))


def test_is_in_S_examples():
    assert is_in_S(5) and not is_in_S(3) and is_in_S(1105)


def test_is_in_S_matches_brute_force():
    assert all(is_in_S(n) == brute_in_S(n) for n in range(1, 10_001))


@pytest.mark.parametrize(
    "n, expected",
    [(18, ((2, 1), (3, 2))), (32045, ((5, 1), (13, 1), (17, 1), (29, 1))), (7, ((7, 1),))],
)
def test_factor_examples(n, expected):
    assert factor(n).factors == expected


@given(st.integers(min_value=2, max_value=10**12))
@settings(max_examples=200, deadline=None)
def test_factor_product(n):
    f = factor(n)
    assert math.prod(p**e for p, e in f.factors) == n
    assert all(is_prime(p) for p, _ in f.factors)


def test_factor_large_semiprime():
    p, q = 1_000_003, 999_983
    assert factor(p * q).factors == ((q, 1), (p, 1))


def test_factorization_validates():
    with pytest.raises(ValueError):
        Factorization(12, ((2, 1), (3, 1)))
    with pytest.raises(ValueError):
        Factorization(6, ((3, 1), (2, 1)))


def test_is_prime_agrees_with_sieve():
    ps = set(primes_upto(20_000).tolist())
    assert all(is_prime(k) == (k in ps) for k in range(20_001))


@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50))
def test_gaussian_norm_multiplicative(a, b, c, d):
    z, w = GaussianInteger(a, b), GaussianInteger(c, d)
    assert (z * w).norm() == z.norm() * w.norm()


@pytest.mark.parametrize("n, Q, g", [(5, 1, 1), (18, 18, 3), (4, 4, 2), (36, 36, 6)])
def test_fix_part_examples(n, Q, g):
    fp = fix_part(n)
    assert (fp.Q, fp.g) == (Q, g)


def test_fix_part_is_gcd_of_coordinates():
    for n in range(1, 2001):
        if not is_in_S(n):
            continue
        g = 0
        for a, b in enumerate_points(n):
            g = math.gcd(g, math.gcd(abs(a), abs(b)))
        fp = fix_part(n)
        assert fp.g == g, n
        assert n % (fp.g**2) == 0


def test_fix_part_rejects_non_S():
    with pytest.raises(ValueError):
        fix_part(3)


@pytest.mark.parametrize("p, a, b", [(5, 2, 1), (13, 3, 2), (29, 5, 2)])
def test_gaussian_prime_examples(p, a, b):
    assert tuple(gaussian_prime_over(p)) == (a, b)


def test_gaussian_prime_norms():
    for p in primes_upto(100_000).tolist():
        if p % 4 == 1:
            z = gaussian_prime_over(p)
            assert z.norm() == p and z.re >= z.im >= 1


def test_gaussian_prime_rejects():
    with pytest.raises(ValueError):
        gaussian_prime_over(7)
    with pytest.raises(ValueError):
        gaussian_prime_over(21)


def test_count_S_small():
    assert count_S_upto(10)[0] == 7
    assert count_S_upto(100)[0] == 43
    assert count_S_upto(1000)[0] == sum(brute_in_S(n) for n in range(1, 1001))


def test_sector_counts():
    # canonical representatives of 5, 13, 17, 29
    assert count_sector_primes(0, math.pi / 2, 30) == 4
    assert count_sector_primes(0.3, 0.3, 1000) == 0
    # the canonical argument never exceeds pi/4
    assert count_sector_primes(0, math.pi / 4, 10_000) == count_sector_primes(0, math.pi / 2, 10_000)


def test_kubilius_main_term_li():
    # Li(10^6) - Li(2) = 78626.5...
    assert kubilius_main_term(0, math.pi / 2, 10**6) == pytest.approx(78626.504, rel=1e-6)
