"""Integer and Gaussian-integer arithmetic.

Membership in the set of sums of two squares, factorization, the fix part of
an eigenvalue, canonical Gaussian primes over split rational primes, and two
empirical density counters (sums of two squares up to X, Gaussian primes in a
sector).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import expi

__all__ = [
    "Factorization",
    "GaussianInteger",
    "FixPart",
    "is_prime",
    "primes_upto",
    "factor",
    "is_in_S",
    "fix_part",
    "gaussian_prime_over",
    "count_S_upto",
    "count_sector_primes",
    "kubilius_main_term",
]

_TRIAL_LIMIT = 10**6


@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"malformed factorization {self.factors}")
            last = p
            prod *= p**e
        if prod != self.n:
            raise ValueError(f"factors multiply to {prod}, not {self.n}")

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)


@dataclass(frozen=True)
class GaussianInteger:
    re: int
    im: int

    def norm(self) -> int:
        return self.re * self.re + self.im * self.im

    def conj(self) -> GaussianInteger:
        return GaussianInteger(self.re, -self.im)

    def __mul__(self, other: GaussianInteger) -> GaussianInteger:
        return GaussianInteger(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __pow__(self, k: int) -> GaussianInteger:
        out = GaussianInteger(1, 0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def arg(self) -> float:
        return math.atan2(self.im, self.re)

    def __iter__(self):
        yield self.re
        yield self.im


@dataclass(frozen=True)
class FixPart:
    """The part of ``n`` forced by 2 and by primes 3 mod 4.

    ``Q`` is ``2^a2 * prod q^b`` and ``g = 2^(a2 // 2) * prod q^(b/2)`` is the
    largest integer dividing both coordinates of every lattice point on
    ``|xi|^2 = n``. ``g`` (not ``Q``) is the spacing divisor of the
    deterministic nodal grid.
    """

    n: int
    Q: int
    g: int


# --- primes ---------------------------------------------------------------


@lru_cache(maxsize=4)
def primes_upto(limit: int) -> np.ndarray:
    """All primes <= limit (sieve of Eratosthenes)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).astype(np.int64)


# Deterministic Miller-Rabin witnesses, valid for n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int, rng: random.Random) -> int:
    if n % 2 == 0:
        return 2
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def _split_large(n: int, out: dict[int, int], rng: random.Random) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    r = math.isqrt(n)
    if r * r == n:
        _split_large(r, out, rng)
        _split_large(r, out, rng)
        return
    d = _pollard_brent(n, rng)
    _split_large(d, out, rng)
    _split_large(n // d, out, rng)


def factor(n: int) -> Factorization:
    """Prime factorization: trial division up to 1e6, then Pollard-Brent."""
    n = int(n)
    if n < 1:
        raise ValueError("factor() needs n >= 1")
    found: dict[int, int] = {}
    m = n
    limit = min(_TRIAL_LIMIT, math.isqrt(m))
    for p in primes_upto(limit):
        p = int(p)
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            found[p] = e
    if m > 1:
        # seeded so factor() is a pure function
        _split_large(m, found, random.Random(m))
    return Factorization(n, tuple(sorted(found.items())))


# --- sums of two squares --------------------------------------------------


def is_in_S(n: int) -> bool:
    """True iff n is a sum of two squares."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return True
    return all(e % 2 == 0 for p, e in factor(n).factors if p % 4 == 3)


def fix_part(n: int) -> FixPart:
    n = int(n)
    if not is_in_S(n):
        raise ValueError(f"{n} is not a sum of two squares")
    Q = g = 1
    if n > 1:
        for p, e in factor(n).factors:
            if p == 2:
                Q *= 2**e
                g *= 2 ** (e // 2)
            elif p % 4 == 3:
                Q *= p**e
                g *= p ** (e // 2)
    return FixPart(n, Q, g)


def gaussian_prime_over(p: int) -> GaussianInteger:
    """Canonical Gaussian prime a+bi over a split prime p, with a >= b >= 1."""
    p = int(p)
    if p % 4 != 1 or not is_prime(p):
        raise ValueError(f"{p} is not a prime congruent to 1 mod 4")
    # Cornacchia / Hermite-Serret: x^2 = -1 mod p, then Euclid down to sqrt(p).
    c = 2
    while pow(c, (p - 1) // 2, p) != p - 1:
        c += 1
    x = pow(c, (p - 1) // 4, p)
    a, b = p, x
    r = math.isqrt(p)
    while b > r:
        a, b = b, a % b
    rest = p - b * b
    other = math.isqrt(rest)
    assert other * other == rest
    hi, lo = max(b, other), min(b, other)
    return GaussianInteger(hi, lo)


def count_S_upto(X: int) -> tuple[int, float]:
    """Number of n in [1, X] that are sums of two squares, and count*sqrt(log X)/X."""
    X = int(X)
    if X < 10:
        raise ValueError("X must be >= 10")
    hit = np.zeros(X + 1, dtype=bool)
    r = math.isqrt(X)
    b2 = np.arange(r + 1, dtype=np.int64) ** 2
    for a in range(r + 1):
        v = a * a + b2[a:]
        hit[v[v <= X]] = True
    hit[0] = False
    count = int(hit.sum())
    return count, count * math.sqrt(math.log(X)) / X


def _canonical_gaussian_primes(X: int) -> tuple[np.ndarray, np.ndarray]:
    """(a, b) with a >= b >= 1, a^2 + b^2 <= X a rational prime = 1 mod 4."""
    r = math.isqrt(X)
    is_p = np.zeros(X + 1, dtype=bool)
    is_p[primes_upto(X)] = True
    A, B = [], []
    bs = np.arange(1, r + 1, dtype=np.int64)
    for a in range(1, r + 1):
        b = bs[: a]
        v = a * a + b * b
        keep = v <= X
        b, v = b[keep], v[keep]
        good = is_p[v] & (v % 4 == 1)
        A.append(np.full(int(good.sum()), a, dtype=np.int64))
        B.append(b[good])
    return np.concatenate(A), np.concatenate(B)


def count_sector_primes(theta1: float, theta2: float, X: int) -> int:
    """Canonical Gaussian primes with argument in [theta1, theta2] and norm <= X.

    One representative a+bi (a >= b >= 1) per split rational prime, so all
    arguments lie in (0, pi/4].
    """
    if not 0 <= theta1 <= theta2 <= math.pi / 2:
        raise ValueError("need 0 <= theta1 <= theta2 <= pi/2")
    if X < 10:
        raise ValueError("X must be >= 10")
    if theta1 == theta2:
        return 0
    a, b = _canonical_gaussian_primes(int(X))
    ang = np.arctan2(b, a)
    return int(np.count_nonzero((ang >= theta1) & (ang <= theta2)))


def kubilius_main_term(theta1: float, theta2: float, X: float) -> float:
    """(2/pi) * (theta2 - theta1) * integral_2^X dx / log x."""
    li = expi(math.log(X)) - expi(math.log(2.0))
    return 2.0 / math.pi * (theta2 - theta1) * li
