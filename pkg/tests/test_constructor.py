import random
from fractions import Fraction

import pytest

from barw.arith import primes_upto
from barw.constructor import (
    NotFound,
    construct,
    correlation_check,
    find_anchor_prime,
    find_split_prime_near_axis,
    is_nondegenerate,
    level_from_primes,
    nu_hat_prime,
    nu_hat_prime_power,
)
from barw.spectrum import enumerate_spectrum

SPLIT = [p for p in primes_upto(500).tolist() if p % 4 == 1]


def test_anchor_examples():
    assert find_anchor_prime(-0.28, 1e-9) == 5
    p = find_anchor_prime(1.0, 0.05)
    assert enumerate_spectrum(p).summary.nu_hat_4 >= Fraction(95, 100)
    q = find_anchor_prime(-1.0, 0.2)
    assert enumerate_spectrum(q).summary.nu_hat_4 <= Fraction(-8, 10)
    with pytest.raises(ValueError):
        find_anchor_prime(2.0, 0.1)


def test_split_prime_examples():
    assert find_split_prime_near_axis(0.13) == 101
    assert find_split_prime_near_axis(0.7854) == 5
    with pytest.raises(NotFound):
        find_split_prime_near_axis(1e-6, bound=1000)


def test_prime_values_match_enumeration():
    for p in SPLIT[:20]:
        assert nu_hat_prime(p) == enumerate_spectrum(p).summary.nu_hat_4
        for m in (2, 3):
            assert nu_hat_prime_power(p, m) == enumerate_spectrum(p**m).summary.nu_hat_4


def test_power_rule_is_not_the_plain_power():
    assert nu_hat_prime_power(13, 2) != nu_hat_prime(13) ** 2


def test_coprime_products():
    rng = random.Random(3)
    for _ in range(50):
        p, q = rng.sample(SPLIT, 2)
        assert enumerate_spectrum(p * q).summary.nu_hat_4 == nu_hat_prime(p) * nu_hat_prime(q)


def test_level_65():
    lvl = level_from_primes(13, 1, 5)
    assert lvl.n == 65 and lvl.achieved == Fraction(833, 4225) and lvl.enumeration_verified


def test_level_cube():
    lvl = level_from_primes(101, 3, 5)
    assert lvl.N == 32 and lvl.enumeration_verified


@pytest.mark.parametrize("a", [-0.5, 0.0, 0.5])
@pytest.mark.parametrize("m", [1, 2])
def test_construct_targets(a, m):
    lvl = construct(a, 0.1, m)
    assert abs(lvl.achieved - Fraction(a)) <= Fraction(1, 10)
    assert lvl.enumeration_verified
    assert lvl.n == lvl.p_split**m * lvl.p_anchor


def test_construct_tight():
    lvl = construct(-0.28, 1e-6, 1)
    assert lvl.p_anchor == 5 and abs(lvl.achieved + Fraction(28, 100)) <= Fraction(1, 10**6)


def test_nondegeneracy():
    assert not is_nondegenerate(5)  # 2 + i: -2 * 1 + 1 * 2 = 0
    assert is_nondegenerate(193)  # 12 + 7i


def test_correlation_check_runs():
    lvl = construct(0.5, 0.1, 1)
    assert correlation_check(lvl, ell=4, eps=0.25) >= 0
