"""Eigenvalues n = q^m p with a prescribed fourth Fourier coefficient.

A split prime p with canonical Gaussian prime of angle phi has
nu_hat_p(4) = cos(4 phi). The points of q^m carry angles (2j - m) phi_q,
j = 0..m, so

    nu_hat_{q^m}(4) = 1/(m+1) sum_j T_{|2j-m|}(cos 4 phi_q),

and nu_hat is multiplicative over coprime factors. Choosing p with
nu_hat_p close to the target and q with phi_q close to 0 makes
nu_hat_{q^m p} close to the target. All values are exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import _canonical_gaussian_primes, gaussian_prime_over
from .correlations import count_near_semicorrelations
from .spectrum import enumerate_spectrum

__all__ = [
    "NotFound",
    "ConstructedLevel",
    "nu_hat_prime",
    "nu_hat_prime_power",
    "find_anchor_prime",
    "find_split_prime_near_axis",
    "is_nondegenerate",
    "level_from_primes",
    "construct",
    "correlation_check",
]

DEFAULT_BOUND = 10**7
ENUMERATION_LIMIT = 4096


class NotFound(LookupError):
    """No prime below the search bound meets the requirement."""


def nu_hat_prime(p: int) -> Fraction:
    """cos(4 arg pi) for the Gaussian prime over p, exactly."""
    z = gaussian_prime_over(p)
    t = Fraction(z.re * z.re, p)
    return 8 * t * t - 8 * t + 1


def _chebyshev_t(k: int, c: Fraction) -> Fraction:
    t0, t1 = Fraction(1), c
    if k == 0:
        return t0
    for _ in range(k - 1):
        t0, t1 = t1, 2 * c * t1 - t0
    return t1


def nu_hat_prime_power(p: int, m: int) -> Fraction:
    if m < 0:
        raise ValueError("m must be >= 0")
    c = nu_hat_prime(p)
    return sum((_chebyshev_t(abs(2 * j - m), c) for j in range(m + 1)), Fraction(0)) / (m + 1)


def find_anchor_prime(a: float, tol: float, bound: int = DEFAULT_BOUND, exclude=()) -> int:
    """Least split prime p <= bound with |nu_hat_p(4) - a| <= tol."""
    if not -1 <= a <= 1:
        raise ValueError("target must lie in [-1, 1]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    A, B = _canonical_gaussian_primes(int(bound))
    P = A * A + B * B
    order = np.argsort(P, kind="stable")
    A, B, P = A[order], B[order], P[order]
    c4 = 8 * (A / P) ** 2 * A * A - 8 * A * A / P + 1  # float screen
    close = np.flatnonzero(np.abs(c4 - a) <= tol + 1e-9)
    fa, ft = Fraction(a), Fraction(tol)
    for i in close:
        p = int(P[i])
        if p in exclude:
            continue
        if abs(nu_hat_prime(p) - fa) <= ft:
            return p
    raise NotFound(f"no split prime <= {bound} has |nu_hat - {a}| <= {tol}")


def find_split_prime_near_axis(angle_tol: float, bound: int = DEFAULT_BOUND, exclude=()) -> int:
    """Least split prime whose canonical Gaussian angle atan(b/a) is <= angle_tol."""
    if angle_tol <= 0:
        raise ValueError("angle_tol must be positive")
    if angle_tol >= math.pi / 4:
        cands = [5, 13, 17, 29]
        return next(p for p in cands if p not in exclude)
    tan = Fraction(math.tan(angle_tol))
    A, B = _canonical_gaussian_primes(int(bound))
    P = A * A + B * B
    screen = np.flatnonzero(B <= A * float(tan) * (1 + 1e-12))
    for i in screen[np.argsort(P[screen], kind="stable")]:
        p = int(P[i])
        # exact: b / a <= tan  <=>  b * den <= a * num
        if p not in exclude and int(B[i]) * tan.denominator <= int(A[i]) * tan.numerator:
            return p
    raise NotFound(f"no split prime <= {bound} has angle <= {angle_tol}")


def is_nondegenerate(p: int, ell: int = 6) -> bool:
    """a sin(alpha) + b cos(alpha) != 0 for all |a|, |b| <= ell, (a, b) != 0.

    With pi = x + iy this is the integer condition a y + b x != 0.
    """
    z = gaussian_prime_over(p)
    for a in range(-ell, ell + 1):
        for b in range(-ell, ell + 1):
            if (a or b) and a * z.im + b * z.re == 0:
                return False
    return True


@dataclass(frozen=True)
class ConstructedLevel:
    target: float
    tol: float
    m: int
    p_split: int
    p_anchor: int
    n: int
    achieved: Fraction
    convolution_identity_value: Fraction  # nu_hat_q^m * nu_hat_p, the naive power rule
    N: int
    enumeration_verified: bool | None
    nondegenerate: bool

    @property
    def achieved_float(self) -> float:
        return float(self.achieved)

    def as_dict(self) -> dict:
        def frac(x):
            return {"num": x.numerator, "den": x.denominator, "float": float(x)}

        return {
            "target": self.target,
            "tol": self.tol,
            "m": self.m,
            "p_split": self.p_split,
            "p_anchor": self.p_anchor,
            "n": self.n,
            "N": self.N,
            "nu_hat_4": frac(self.achieved),
            "convolution_identity_value": frac(self.convolution_identity_value),
            "enumeration_verified": self.enumeration_verified,
            "nondegenerate": self.nondegenerate,
        }


def level_from_primes(p_split: int, m: int, p_anchor: int, target: float = float("nan"), tol: float = float("nan")):
    """Assemble and check the level q^m p for given distinct split primes."""
    if p_split == p_anchor:
        raise ValueError("the split and anchor primes must differ")
    if m < 1:
        raise ValueError("m must be >= 1")
    achieved = nu_hat_prime_power(p_split, m) * nu_hat_prime(p_anchor)
    naive = nu_hat_prime(p_split) ** m * nu_hat_prime(p_anchor)
    N = 4 * (m + 1) * 2
    n = p_split**m * p_anchor
    verified = None
    if N <= ENUMERATION_LIMIT:
        spec = enumerate_spectrum(n)
        verified = spec.N == N and spec.summary.nu_hat_4 == achieved
    return ConstructedLevel(
        target, tol, m, p_split, p_anchor, n, achieved, naive, N, verified, is_nondegenerate(p_anchor)
    )


def _least_completing_prime(p: int, m: int, a: float, tol: float, bound: int) -> int:
    """Least split prime q != p with |nu_hat_{q^m} nu_hat_p - a| <= tol, exactly."""
    A, B = _canonical_gaussian_primes(int(bound))
    P = A * A + B * B
    phi = np.arctan2(B, A)
    avg = np.mean([np.cos(4 * (2 * j - m) * phi) for j in range(m + 1)], axis=0)
    fp = float(nu_hat_prime(p))
    screen = np.flatnonzero(np.abs(avg * fp - a) <= tol * (1 + 1e-9) + 1e-12)
    fa, ft, vp = Fraction(a), Fraction(tol), nu_hat_prime(p)
    for i in screen[np.argsort(P[screen], kind="stable")]:
        q = int(P[i])
        if q != p and abs(nu_hat_prime_power(q, m) * vp - fa) <= ft:
            return q
    raise NotFound(f"no split prime <= {bound} completes the anchor {p}")


def construct(a: float, tol: float, m: int = 1, bound: int = DEFAULT_BOUND) -> ConstructedLevel:
    """A level n = q^m p with |nu_hat_n(4) - a| <= tol.

    p is the least anchor within tol/2 of a; q is then the least other split
    prime for which the exact value of q^m p lands within tol. Such q exist
    near the real axis, since 1 - nu_hat_{q^m} <= 8 m^2 phi_q^2.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    p = find_anchor_prime(a, tol / 2, bound)
    q = _least_completing_prime(p, m, a, tol, bound)
    lvl = level_from_primes(q, m, p, a, tol)
    if lvl.enumeration_verified is False:
        raise AssertionError(f"enumeration disagrees with the exact value for n={lvl.n}")
    return lvl


def correlation_check(level: ConstructedLevel, ell: int = 4, eps: float = 0.25, t: int = 1, budget: int = 10**9):
    """V^t(n, ell, n^(1/2 - eps)) for the constructed n (0 means empty)."""
    spec = enumerate_spectrum(level.n)
    K = level.n ** (0.5 - eps)
    return count_near_semicorrelations(spec, ell, t, K, budget).count
