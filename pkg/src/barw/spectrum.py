"""Lattice points on the circle |xi|^2 = n and their angular statistics.

Points are produced from the Gaussian-integer factorization of n. Everything
that feeds an exact identity (the fourth Fourier coefficient of the spectral
measure, coordinate moments, orbit sums) is kept in rational arithmetic.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np

from .arith import FixPart, GaussianInteger, factor, fix_part, gaussian_prime_over, is_in_S

__all__ = [
    "OrbitClass",
    "CircleSpectrum",
    "SpectralSummary",
    "enumerate_points",
    "enumerate_spectrum",
    "nu_hat_4",
    "min_coordinate_check",
    "orbit_sum",
    "r2",
    "SpectrumCache",
]

_UNITS = (GaussianInteger(1, 0), GaussianInteger(0, 1), GaussianInteger(-1, 0), GaussianInteger(0, -1))


@dataclass(frozen=True)
class OrbitClass:
    """Representative (a, b), a, b >= 0, of the orbit {(+-a, +-b)}."""

    a: int
    b: int

    @property
    def size(self) -> int:
        return 4 if (self.a and self.b) else 2

    @property
    def contributes(self) -> bool:
        # sin(0) = 0: axis classes drop out of the field
        return self.a != 0 and self.b != 0


@dataclass(frozen=True)
class CircleSpectrum:
    n: int
    points: tuple[tuple[int, int], ...]
    classes: tuple[OrbitClass, ...]
    squarefree: bool
    fix: FixPart

    @property
    def N(self) -> int:
        return len(self.points)

    @cached_property
    def points_array(self) -> np.ndarray:
        return np.array(self.points, dtype=np.int64).reshape(-1, 2)

    @cached_property
    def field_classes(self) -> np.ndarray:
        """(C, 2) int array of the classes with both coordinates nonzero."""
        arr = [(c.a, c.b) for c in self.classes if c.contributes]
        return np.array(arr, dtype=np.int64).reshape(-1, 2)

    @cached_property
    def class_array(self) -> np.ndarray:
        return np.array([(c.a, c.b) for c in self.classes], dtype=np.int64).reshape(-1, 2)

    @cached_property
    def class_weights(self) -> np.ndarray:
        """Quarter-orbit weights size/4 (1 for generic classes, 1/2 on the axes)."""
        return np.array([c.size / 4 for c in self.classes], dtype=float)

    @cached_property
    def summary(self) -> SpectralSummary:
        return nu_hat_4(self)


@dataclass(frozen=True)
class SpectralSummary:
    nu_hat_4: Fraction
    mu4: Fraction
    min_coord: int

    @property
    def nu_hat_4_float(self) -> float:
        return float(self.nu_hat_4)


def _gaussian_points(n: int) -> set[tuple[int, int]]:
    if n == 1:
        return {tuple(u) for u in _UNITS}
    fac = factor(n).factors
    base = GaussianInteger(1, 0)
    choices: list[list[GaussianInteger]] = []
    for p, e in fac:
        if p == 2:
            base = base * GaussianInteger(1, 1) ** e
        elif p % 4 == 3:
            base = base * GaussianInteger(p ** (e // 2), 0)
        else:
            pi = gaussian_prime_over(p)
            pib = pi.conj()
            choices.append([pi**j * pib ** (e - j) for j in range(e + 1)])
    out = set()
    for combo in itertools.product(*choices):
        z = base
        for w in combo:
            z = z * w
        for u in _UNITS:
            out.add(tuple(z * u))
    return out


def enumerate_points(n: int) -> list[tuple[int, int]]:
    """All integer (a, b) with a^2 + b^2 = n, sorted."""
    n = int(n)
    if n < 1 or not is_in_S(n):
        raise ValueError(f"{n} is not a sum of two squares")
    pts = sorted(_gaussian_points(n))
    return pts


def enumerate_spectrum(n: int) -> CircleSpectrum:
    pts = enumerate_points(n)
    reps = sorted({(abs(a), abs(b)) for a, b in pts})
    classes = tuple(OrbitClass(a, b) for a, b in reps)
    sqfree = all(e == 1 for _, e in factor(n).factors) if n > 1 else True
    return CircleSpectrum(int(n), tuple(pts), classes, sqfree, fix_part(n))


def nu_hat_4(spec: CircleSpectrum) -> SpectralSummary:
    """Fourth Fourier coefficient of the spectral measure, exactly.

    cos(4 arg xi) = 8 (xi1^2/n)^2 - 8 xi1^2/n + 1 for every point.
    """
    n, N = spec.n, spec.N
    acc = Fraction(0)
    s4 = 0
    for a, _ in spec.points:
        t = Fraction(a * a, n)
        acc += 8 * t * t - 8 * t + 1
        s4 += a**4
    return SpectralSummary(
        nu_hat_4=acc / N,
        mu4=Fraction(s4, n * n * N),
        min_coord=min(min(abs(a), abs(b)) for a, b in spec.points),
    )


def min_coordinate_check(spec: CircleSpectrum, eps: float) -> tuple[int, bool]:
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    m = spec.summary.min_coord
    return m, m >= spec.n ** (0.5 - eps)


def orbit_sum(spec: CircleSpectrum, p: int, q: int) -> Fraction:
    """(1/4) * sum over all points of xi1^p xi2^q."""
    if p < 0 or q < 0:
        raise ValueError("exponents must be nonnegative")
    return Fraction(sum(a**p * b**q for a, b in spec.points), 4)


def r2(n: int) -> int:
    """4 * (d1(n) - d3(n)): number of representations as a sum of two squares."""
    d1 = d3 = 0
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            for e in {d, n // d}:
                if e % 4 == 1:
                    d1 += 1
                elif e % 4 == 3:
                    d3 += 1
    return 4 * (d1 - d3)


@dataclass
class SpectrumCache:
    """Line-delimited JSON store of spectra, one record per n.

    Each record holds ``n``, ``N``, ``g``, ``points`` and ``nu_hat_4`` as
    ``{"num": ..., "den": ...}``. Rationals round-trip exactly.
    """

    path: Path
    _records: dict[int, dict] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.path = Path(self.path)
        if self.path.exists():
            for line in self.path.read_text().splitlines():
                if line.strip():
                    rec = json.loads(line)
                    self._records[int(rec["n"])] = rec

    def __contains__(self, n: int) -> bool:
        return int(n) in self._records

    def get(self, n: int) -> CircleSpectrum:
        n = int(n)
        rec = self._records.get(n)
        if rec is None:
            spec = enumerate_spectrum(n)
            self.put(spec)
            return spec
        pts = tuple(tuple(p) for p in rec["points"])
        reps = sorted({(abs(a), abs(b)) for a, b in pts})
        spec = CircleSpectrum(
            n,
            pts,
            tuple(OrbitClass(a, b) for a, b in reps),
            bool(rec["squarefree"]),
            FixPart(n, int(rec["Q"]), int(rec["g"])),
        )
        nh = Fraction(rec["nu_hat_4"]["num"], rec["nu_hat_4"]["den"])
        if spec.summary.nu_hat_4 != nh:
            raise ValueError(f"cache record for n={n} is inconsistent")
        return spec

    def put(self, spec: CircleSpectrum) -> None:
        nh = spec.summary.nu_hat_4
        rec = {
            "n": spec.n,
            "N": spec.N,
            "g": spec.fix.g,
            "Q": spec.fix.Q,
            "squarefree": spec.squarefree,
            "nu_hat_4": {"num": nh.numerator, "den": nh.denominator},
            "points": [list(p) for p in spec.points],
        }
        self._records[spec.n] = rec
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a") as fh:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
