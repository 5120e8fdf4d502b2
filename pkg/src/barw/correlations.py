"""Exact counting of (near-)cancelling sums of lattice points.

All counts are over ordered l-tuples drawn from the full point set of
``|xi|^2 = n``. The fast path is a meet-in-the-middle: the multiset of
partial sums of the first ceil(l/2) entries is tabulated (value -> count),
likewise for the remaining floor(l/2), and pairs are range-counted with a
binary search over the sorted second table. ``brute_force_count`` enumerates
every tuple and serves as the oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from .errors import BudgetExceeded
from .spectrum import CircleSpectrum

__all__ = [
    "BudgetExceeded",
    "CorrelationQuery",
    "CorrelationCount",
    "count_semicorrelations",
    "count_near_semicorrelations",
    "count_projected",
    "count_vector",
    "count",
    "brute_force_count",
    "trivial_prediction",
    "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = 10**9

Mode = Literal["axis", "direction", "vector"]


@dataclass(frozen=True)
class CorrelationQuery:
    n: int
    ell: int
    mode: Mode
    axis: int | None = None
    direction: tuple[int, int] | None = None
    K: float = 0.0
    strict_lower: bool = False

    def __post_init__(self):
        if self.ell < 1:
            raise ValueError("ell must be >= 1")
        if self.K < 0:
            raise ValueError("K must be >= 0")
        if self.mode == "axis" and self.axis not in (1, 2):
            raise ValueError("axis must be 1 or 2")
        if self.mode == "direction":
            if self.direction is None or tuple(self.direction) == (0, 0):
                raise ValueError("direction must be a nonzero integer pair")

    @property
    def direction_norm(self) -> float:
        v = self.direction or (0, 0)
        return math.hypot(*v)


@dataclass(frozen=True)
class CorrelationCount:
    query: CorrelationQuery
    count: int
    trivial_prediction: int


def trivial_prediction(ell: int, N: int) -> int:
    """ell! / (2^(ell/2) (ell/2)!) * N^(ell/2): the diagonal (pairing) solutions."""
    if ell % 2:
        raise ValueError("trivial prediction is defined for even ell only")
    h = ell // 2
    return math.factorial(ell) // (2**h * math.factorial(h)) * N**h


def _scalar_keys(spec: CircleSpectrum, q: CorrelationQuery) -> np.ndarray:
    P = spec.points_array
    if q.mode == "axis":
        return P[:, q.axis - 1].copy()
    if q.mode == "direction":
        v = np.array(q.direction, dtype=np.int64)
        return P @ v
    # vector mode: pack (x, y) into one integer; |coordinate sums| <= ell*sqrt(n)
    shift = 2 * q.ell * math.isqrt(spec.n) + 1
    return P[:, 0] * (2 * shift + 1) + P[:, 1]


def _sum_table(keys: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Distinct sums of k entries of ``keys`` (ordered tuples) and multiplicities."""
    vals, cnt = np.unique(keys, return_counts=True)
    big = len(keys) ** max(k, 1) >= 2**62
    cnt = cnt.astype(object) if big else cnt.astype(np.int64)
    tv, tc = np.array([0], dtype=np.int64), np.array([1], dtype=cnt.dtype)
    for _ in range(k):
        s = (tv[:, None] + vals[None, :]).ravel()
        c = (tc[:, None] * cnt[None, :]).ravel()
        order = np.argsort(s, kind="stable")
        s, c = s[order], c[order]
        tv, start = np.unique(s, return_index=True)
        tc = np.add.reduceat(c, start) if len(c) else c
    return tv, tc


def _threshold(q: CorrelationQuery) -> int:
    """Largest integer |S| allowed, where S is the integer statistic being bounded."""
    K = Fraction(q.K)
    if q.mode == "direction":
        v1, v2 = q.direction
        # |<S, v>| / |v| <= K  <=>  <S, v>^2 <= K^2 |v|^2
        bound = K * K * (v1 * v1 + v2 * v2)
        return math.isqrt(math.floor(bound))
    return math.floor(K)


def _check_budget(N: int, ell: int, budget: int) -> None:
    work = N ** math.ceil(ell / 2)
    if work > budget:
        raise BudgetExceeded(f"N^ceil(l/2) = {work} exceeds the work budget {budget}")


def count(spec: CircleSpectrum, q: CorrelationQuery, budget: int = DEFAULT_BUDGET) -> CorrelationCount:
    """Meet-in-the-middle count for an arbitrary query."""
    if q.n != spec.n:
        raise ValueError("query and spectrum disagree on n")
    _check_budget(spec.N, q.ell, budget)
    keys = _scalar_keys(spec, q)
    left_k = (q.ell + 1) // 2
    lv, lc = _sum_table(keys, left_k)
    rv, rc = _sum_table(keys, q.ell - left_k)
    cum = np.concatenate([[0], np.cumsum(rc)]).astype(lc.dtype)

    def in_range(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        # number of right sums r with lo <= r <= hi, for each left sum
        i0 = np.searchsorted(rv, lo, side="left")
        i1 = np.searchsorted(rv, hi, side="right")
        return cum[i1] - cum[i0]

    if q.mode == "vector":
        hits = in_range(-lv, -lv)
    else:
        T = _threshold(q)
        hits = in_range(-lv - T, -lv + T)
        if q.strict_lower:
            hits = hits - in_range(-lv, -lv)
    total = int(np.sum(lc * hits))
    pred = trivial_prediction(q.ell, spec.N) if q.ell % 2 == 0 else 0
    return CorrelationCount(q, total, pred)


def count_semicorrelations(spec, ell, t, budget=DEFAULT_BUDGET) -> CorrelationCount:
    """Ordered tuples whose t-th coordinates sum to exactly 0."""
    if ell < 2:
        raise ValueError("ell must be >= 2")
    return count(spec, CorrelationQuery(spec.n, ell, "axis", axis=t, K=0), budget)


def count_near_semicorrelations(spec, ell, t, K, budget=DEFAULT_BUDGET) -> CorrelationCount:
    """Ordered tuples with 0 < |t-th coordinate sum| <= K."""
    if ell < 2:
        raise ValueError("ell must be >= 2")
    q = CorrelationQuery(spec.n, ell, "axis", axis=t, K=K, strict_lower=True)
    return count(spec, q, budget)


def count_projected(spec, ell, v, K, budget=DEFAULT_BUDGET) -> CorrelationCount:
    """Ordered tuples whose vector sum projects onto direction v with length <= K."""
    q = CorrelationQuery(spec.n, ell, "direction", direction=tuple(int(c) for c in v), K=K)
    return count(spec, q, budget)


def count_vector(spec, ell, budget=DEFAULT_BUDGET) -> CorrelationCount:
    """Ordered tuples whose full 2-d vector sum vanishes."""
    return count(spec, CorrelationQuery(spec.n, ell, "vector"), budget)


def brute_force_count(spec: CircleSpectrum, q: CorrelationQuery, budget: int = DEFAULT_BUDGET) -> int:
    """Enumerate all N^l ordered tuples. Oracle for ``count``."""
    N = spec.N
    if N**q.ell > budget:
        raise BudgetExceeded(f"N^l = {N ** q.ell} exceeds the work budget {budget}")
    P = spec.points_array
    sx = np.zeros(1, dtype=np.int64)
    sy = np.zeros(1, dtype=np.int64)
    for _ in range(q.ell):
        sx = (sx[:, None] + P[None, :, 0]).ravel()
        sy = (sy[:, None] + P[None, :, 1]).ravel()
    if q.mode == "vector":
        return int(np.count_nonzero((sx == 0) & (sy == 0)))
    if q.mode == "axis":
        S = sx if q.axis == 1 else sy
        ok = np.abs(S) <= q.K
        if q.strict_lower:
            ok &= S != 0
        return int(np.count_nonzero(ok))
    v1, v2 = q.direction
    proj = sx * v1 + sy * v2
    # integer <= rational  <=>  integer <= floor(rational)
    bound = math.floor(Fraction(q.K) ** 2 * (v1 * v1 + v2 * v2))
    return int(np.count_nonzero(proj * proj <= bound))
