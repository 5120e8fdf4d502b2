"""The boundary-adapted random wave on [0, 1]^2.

    f(x) = 4/sqrt(N) * sum_classes a_xi sin(pi xi1 x1) sin(pi xi2 x2)

with one real standard normal a_xi per orbit class whose representative has
both coordinates nonzero. Every quantity here is a sum of separable terms
u_c(x1) w_c(x2), so grid evaluations reduce to one matrix product per
quantity.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .spectrum import CircleSpectrum

__all__ = [
    "FieldSample",
    "SecondMoments",
    "class_rng",
    "derive_seed",
    "sample",
    "evaluate",
    "evaluate_grid",
    "covariance",
    "second_moments",
    "moment_grids",
    "write_grid",
    "read_grid",
    "GRID_HEADER",
]


def derive_seed(master: int, index: int) -> int:
    """64-bit child seed for stream ``index`` of ``master`` (counter-based)."""
    ss = np.random.SeedSequence([int(master) & (2**64 - 1), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def class_rng(seed: int, class_index: int) -> np.random.Generator:
    # Philox keyed by (seed, class): the draw for a class does not depend on
    # how many other classes exist or the order they are visited in.
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) & (2**64 - 1), class_index])))


@dataclass(frozen=True)
class FieldSample:
    spectrum: CircleSpectrum
    coefficients: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.shape != (len(self.spectrum.field_classes),):
            raise ValueError(
                f"expected {len(self.spectrum.field_classes)} coefficients, got {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)


@dataclass(frozen=True)
class SecondMoments:
    x: tuple[float, float]
    varF: float
    gradCov: np.ndarray  # 2x2
    crossCov: np.ndarray  # (2,)

    def joint(self) -> np.ndarray:
        """3x3 covariance of (f, d1 f, d2 f)."""
        M = np.empty((3, 3))
        M[0, 0] = self.varF
        M[0, 1:] = M[1:, 0] = self.crossCov
        M[1:, 1:] = self.gradCov
        return M


def sample(spec: CircleSpectrum, seed: int) -> FieldSample:
    C = len(spec.field_classes)
    coeffs = np.array([class_rng(seed, i).standard_normal() for i in range(C)])
    return FieldSample(spec, coeffs, int(seed))


def _trig(freq: np.ndarray, x: np.ndarray):
    """sin and cos of pi*freq*x, shape (C, len(x))."""
    arg = np.pi * np.outer(freq, x)
    return np.sin(arg), np.cos(arg)


def evaluate(fs: FieldSample, x) -> np.ndarray | float:
    """f at points x (shape (..., 2))."""
    x = np.asarray(x, dtype=float)
    xi = fs.spectrum.field_classes
    if len(xi) == 0:
        return np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0
    pts = x.reshape(-1, 2)
    s1 = np.sin(np.pi * pts[:, None, 0] * xi[None, :, 0])
    s2 = np.sin(np.pi * pts[:, None, 1] * xi[None, :, 1])
    val = 4.0 / np.sqrt(fs.spectrum.N) * (s1 * s2) @ fs.coefficients
    return float(val[0]) if x.ndim == 1 else val.reshape(x.shape[:-1])


def evaluate_grid(fs: FieldSample, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """f on the tensor grid, indexed [i1, i2]."""
    xi = fs.spectrum.field_classes
    if len(xi) == 0:
        return np.zeros((len(x1), len(x2)))
    s1, _ = _trig(xi[:, 0], np.asarray(x1, float))
    s2, _ = _trig(xi[:, 1], np.asarray(x2, float))
    return 4.0 / np.sqrt(fs.spectrum.N) * (s1.T * fs.coefficients) @ s2


def covariance(spec: CircleSpectrum, x, y) -> float:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    xi = spec.field_classes.astype(float)
    t = (
        np.sin(np.pi * xi[:, 0] * x[0])
        * np.sin(np.pi * xi[:, 1] * x[1])
        * np.sin(np.pi * xi[:, 0] * y[0])
        * np.sin(np.pi * xi[:, 1] * y[1])
    )
    return 16.0 / spec.N * float(t.sum())


def moment_grids(spec: CircleSpectrum, x1: np.ndarray, x2: np.ndarray) -> dict[str, np.ndarray]:
    """Second moments of (f, grad f) on the tensor grid x1 x x2.

    Keys: ``var``, ``c1``, ``c2`` (Cov(f, d_i f)), ``g11``, ``g12``, ``g22``
    (Cov(d_i f, d_j f)). Arrays are indexed [i1, i2].
    """
    xi = spec.field_classes.astype(float)
    a, b = xi[:, 0], xi[:, 1]
    S1, C1 = _trig(a, np.asarray(x1, float))
    S2, C2 = _trig(b, np.asarray(x2, float))
    k = 16.0 / spec.N
    pi = np.pi

    def sep(u: np.ndarray, w: np.ndarray, weight: np.ndarray | float = 1.0) -> np.ndarray:
        return (u.T * weight) @ w

    SS1, SS2 = S1 * S1, S2 * S2
    return {
        "var": k * sep(SS1, SS2),
        "c1": k * sep(S1 * C1, SS2, pi * a),
        "c2": k * sep(SS1, S2 * C2, pi * b),
        "g11": k * sep(C1 * C1, SS2, (pi * a) ** 2),
        "g12": k * sep(S1 * C1, S2 * C2, pi * pi * a * b),
        "g22": k * sep(SS1, C2 * C2, (pi * b) ** 2),
    }


def second_moments(spec: CircleSpectrum, x) -> SecondMoments:
    x1, x2 = (float(v) for v in x)
    m = {k: float(v[0, 0]) for k, v in moment_grids(spec, np.array([x1]), np.array([x2])).items()}
    G = np.array([[m["g11"], m["g12"]], [m["g12"], m["g22"]]])
    return SecondMoments((x1, x2), m["var"], G, np.array([m["c1"], m["c2"]]))


# --- raw grid dump ---------------------------------------------------------
#
# 32-byte little-endian header, then rows*cols float64 in row-major order:
#   offset 0  uint32  n
#   offset 4  uint64  seed (0 when not applicable)
#   offset 12 uint32  resolution (nodes per unit length)
#   offset 16 float32 box centre x1
#   offset 20 float32 box centre x2
#   offset 24 float32 box side
#   offset 28 uint16  rows
#   offset 30 uint16  cols
# Row r holds x2 = const (row 0 at the smallest x2); column c runs along x1.

GRID_HEADER = struct.Struct("<IQIfffHH")
assert GRID_HEADER.size == 32


def write_grid(path, values: np.ndarray, n: int, seed: int, resolution: int, box) -> None:
    """Write ``values`` (indexed [i1, i2]) with the documented 32-byte header."""
    rows_major = np.ascontiguousarray(np.asarray(values, dtype="<f8").T)
    rows, cols = rows_major.shape
    (z1, z2), s = box.center, box.side
    header = GRID_HEADER.pack(int(n), int(seed or 0) & (2**64 - 1), int(resolution), z1, z2, s, rows, cols)
    with open(Path(path), "wb") as fh:
        fh.write(header)
        fh.write(rows_major.tobytes())


def read_grid(path) -> tuple[dict, np.ndarray]:
    raw = Path(path).read_bytes()
    n, seed, res, z1, z2, s, rows, cols = GRID_HEADER.unpack(raw[:32])
    data = np.frombuffer(raw[32:], dtype="<f8").reshape(rows, cols)
    meta = {"n": n, "seed": seed, "resolution": res, "center": (z1, z2), "side": s}
    return meta, data.T.copy()
