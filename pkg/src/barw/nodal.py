"""Nodal length of sampled fields: contour extraction and Monte Carlo means.

Writing xi = g xi' with g the grid divisor,

    f(x) = sin(pi g x1) sin(pi g x2) H(x),
    H(x) = 4/sqrt(N) sum a_xi U_{xi'_1 - 1}(cos pi g x1) U_{xi'_2 - 1}(cos pi g x2)

with U the Chebyshev polynomials of the second kind. The interior zero set
of f is the deterministic grid {x_i = k/g} together with the zero set of the
smooth factor H, which does not vanish identically on the boundary or on
the grid. Lengths are therefore measured as analytic grid length plus a
marching-squares length of H=0; the boundary of the square (where f = 0
trivially) is reported separately.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .field import FieldSample, derive_seed, evaluate_grid, sample
from .kacrice import Box
from .spectrum import CircleSpectrum

__all__ = [
    "NodalEstimate",
    "DeterministicGrid",
    "nodal_length_marching",
    "reduced_field_grid",
    "grid_nodes",
    "deterministic_grid",
    "boundary_length",
    "trial_length",
    "raw_trial_length",
    "deterministic_length_bound_check",
    "mc_expected_length",
    "write_trials_csv",
    "write_overlay_png",
]


# --- marching squares -------------------------------------------------------------


def _edge_point(v0, v1, p0, p1):
    """Linear-interpolated zero on the edge p0 -> p1 (NaN where no sign change)."""
    cross = (v0 >= 0) != (v1 >= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(cross, v0 / (v0 - v1), np.nan)
    return p0 + t * (p1 - p0)


def _seg(ax, ay, bx, by):
    return np.hypot(ax - bx, ay - by)


def _march_block(v: np.ndarray, x1: np.ndarray, x2: np.ndarray) -> float:
    v00, v10, v01, v11 = v[:-1, :-1], v[1:, :-1], v[:-1, 1:], v[1:, 1:]
    X0, X1 = x1[:-1, None], x1[1:, None]
    Y0, Y1 = x2[None, :-1], x2[None, 1:]
    # crossing points on the four edges: bottom (y=Y0), top, left (x=X0), right
    bx = _edge_point(v00, v10, X0, X1)
    by = np.broadcast_to(Y0, bx.shape)
    tx = _edge_point(v01, v11, X0, X1)
    ty = np.broadcast_to(Y1, tx.shape)
    ly = _edge_point(v00, v01, Y0, Y1)
    lx = np.broadcast_to(X0, ly.shape)
    ry = _edge_point(v10, v11, Y0, Y1)
    rx = np.broadcast_to(X1, ry.shape)

    hb, ht, hl, hr = ~np.isnan(bx), ~np.isnan(tx), ~np.isnan(ly), ~np.isnan(ry)
    k = hb.astype(np.int8) + ht + hl + hr
    two = k == 2
    total = 0.0
    pairs = [
        (hb & ht, (bx, by, tx, ty)),
        (hb & hl, (bx, by, lx, ly)),
        (hb & hr, (bx, by, rx, ry)),
        (ht & hl, (tx, ty, lx, ly)),
        (ht & hr, (tx, ty, rx, ry)),
        (hl & hr, (lx, ly, rx, ry)),
    ]
    for mask, (ax, ay, cx, cy) in pairs:
        m = two & mask
        if m.any():
            total += float(_seg(ax[m], ay[m], cx[m], cy[m]).sum())
    sad = k == 4
    if sad.any():
        centre = 0.25 * (v00 + v10 + v01 + v11)
        # centre shares the sign of v00: the v10 and v01 corners are cut off
        keep = ((centre >= 0) == (v00 >= 0))[sad]
        b = (bx[sad], by[sad])
        t = (tx[sad], ty[sad])
        l_ = (lx[sad], ly[sad])
        r = (rx[sad], ry[sad])
        a = _seg(*b, *r) + _seg(*l_, *t)
        c = _seg(*b, *l_) + _seg(*r, *t)
        total += float(np.where(keep, a, c).sum())
    return total


def nodal_length_marching(values: np.ndarray, cell=None, x1=None, x2=None) -> float:
    """Length of the zero set of a sampled function by marching squares.

    ``values`` is indexed [i1, i2]. Node coordinates come from ``x1``/``x2``
    or, failing that, from a uniform ``cell`` size (scalar or (h1, h2)).
    Nonnegative values count as positive; saddle cells are resolved by the
    sign of the mean of the four corners.
    """
    v = np.asarray(values, float)
    if v.ndim != 2 or min(v.shape) < 2:
        raise ValueError("need at least a 2x2 grid")
    if not np.all(np.isfinite(v)):
        raise ValueError("grid values must be finite")
    if x1 is None or x2 is None:
        if cell is None:
            raise ValueError("give either cell sizes or node coordinates")
        h1, h2 = (cell, cell) if np.isscalar(cell) else cell
        x1 = np.arange(v.shape[0]) * float(h1)
        x2 = np.arange(v.shape[1]) * float(h2)
    x1 = np.asarray(x1, float)
    x2 = np.asarray(x2, float)
    step = max(2, (1 << 20) // v.shape[1])
    total = 0.0
    for i in range(0, v.shape[0] - 1, step - 1):
        j = min(i + step, v.shape[0])
        total += _march_block(v[i:j], x1[i:j], x2)
    return total


# --- the factored field -----------------------------------------------------------


def _chebyshev_u(kmax: int, c: np.ndarray) -> np.ndarray:
    """U_0..U_kmax at c, shape (kmax + 1, len(c)), by the three-term recurrence."""
    U = np.empty((kmax + 1, len(c)))
    U[0] = 1.0
    if kmax >= 1:
        U[1] = 2 * c
    for k in range(2, kmax + 1):
        U[k] = 2 * c * U[k - 1] - U[k - 2]
    return U


def reduced_field_grid(fs: FieldSample, x1, x2) -> np.ndarray:
    """The smooth factor H on the tensor grid, indexed [i1, i2]."""
    spec = fs.spectrum
    g = spec.fix.g
    xi = spec.field_classes
    x1 = np.asarray(x1, float)
    x2 = np.asarray(x2, float)
    if len(xi) == 0:
        return np.zeros((len(x1), len(x2)))
    a = xi[:, 0] // g
    b = xi[:, 1] // g
    U1 = _chebyshev_u(int(a.max()) - 1, np.cos(np.pi * g * x1))[a - 1]
    U2 = _chebyshev_u(int(b.max()) - 1, np.cos(np.pi * g * x2))[b - 1]
    return 4.0 / math.sqrt(spec.N) * (U1.T * fs.coefficients) @ U2


def grid_nodes(box: Box, resolution: float):
    """Nodes including the clipped box edges, about ``resolution`` per unit."""
    lo1, hi1, lo2, hi2 = box.rect
    m1 = max(1, math.ceil((hi1 - lo1) * resolution - 1e-9))
    m2 = max(1, math.ceil((hi2 - lo2) * resolution - 1e-9))
    return np.linspace(lo1, hi1, m1 + 1), np.linspace(lo2, hi2, m2 + 1)


@dataclass(frozen=True)
class DeterministicGrid:
    n: int
    g: int
    lines: tuple[float, ...]  # positions k/g, k = 1..g-1, on both axes

    @property
    def total_length(self) -> float:
        return 2.0 * len(self.lines)

    def length_in(self, box: Box) -> float:
        """Length of the grid lines inside the clipped box."""
        lo1, hi1, lo2, hi2 = box.rect
        v = sum(hi2 - lo2 for p in self.lines if lo1 <= p <= hi1)
        h = sum(hi1 - lo1 for p in self.lines if lo2 <= p <= hi2)
        return float(v + h)


def deterministic_grid(spec: CircleSpectrum) -> DeterministicGrid:
    g = spec.fix.g
    return DeterministicGrid(spec.n, g, tuple(k / g for k in range(1, g)))


def boundary_length(box: Box) -> float:
    """Length of the part of the unit square's boundary inside the clipped box."""
    lo1, hi1, lo2, hi2 = box.rect
    w, h = hi1 - lo1, hi2 - lo2
    return (h if lo1 == 0 else 0.0) + (h if hi1 == 1 else 0.0) + (w if lo2 == 0 else 0.0) + (w if hi2 == 1 else 0.0)


def trial_length(fs: FieldSample, box: Box, resolution: float) -> float:
    """Interior nodal length of one sample inside the box."""
    x1, x2 = grid_nodes(box, resolution)
    H = reduced_field_grid(fs, x1, x2)
    if not np.any(H):
        # f vanishes identically; report the grid only
        return deterministic_grid(fs.spectrum).length_in(box)
    return nodal_length_marching(H, x1=x1, x2=x2) + deterministic_grid(fs.spectrum).length_in(box)


def raw_trial_length(fs: FieldSample, box: Box, resolution: float) -> float:
    """Marching squares on f itself at cell-centred nodes (independent route)."""
    lo1, hi1, lo2, hi2 = box.rect
    m1 = max(2, math.ceil((hi1 - lo1) * resolution))
    m2 = max(2, math.ceil((hi2 - lo2) * resolution))
    x1 = lo1 + (np.arange(m1) + 0.5) * (hi1 - lo1) / m1
    x2 = lo2 + (np.arange(m2) + 0.5) * (hi2 - lo2) / m2
    return nodal_length_marching(evaluate_grid(fs, x1, x2), x1=x1, x2=x2)


def deterministic_length_bound_check(spec: CircleSpectrum, box: Box, length: float, C: float = 10.0) -> bool:
    """length / s <= C (s sqrt(n) + N)."""
    s = box.side
    return length / s <= C * (s * math.sqrt(spec.n) + spec.N)


# --- Monte Carlo ----------------------------------------------------------------


@dataclass(frozen=True)
class NodalEstimate:
    n: int
    box: Box
    trials: int
    resolution: float
    mean_length: float
    std_error: float
    boundary_length: float
    grid_length: float
    seeds: tuple[int, ...] = field(repr=False)
    lengths: tuple[float, ...] = field(repr=False)
    flagged: tuple[bool, ...] = field(repr=False)

    @property
    def n_flagged(self) -> int:
        return sum(self.flagged)

    @property
    def mean_with_boundary(self) -> float:
        return self.mean_length + self.boundary_length


def _one_trial(args):
    spec, seed, box, resolution, C = args
    L = trial_length(sample(spec, seed), box, resolution)
    return L, not deterministic_length_bound_check(spec, box, L, C)


def mc_expected_length(
    spec: CircleSpectrum,
    box: Box,
    trials: int,
    resolution: float | None = None,
    master_seed: int = 0,
    seeds=None,
    workers: int = 1,
    C: float = 10.0,
) -> NodalEstimate:
    """Monte Carlo mean of the interior nodal length in the box.

    Trial i draws its field from ``derive_seed(master_seed, i)`` unless
    explicit ``seeds`` are given. Trials failing the crude length bound are
    flagged and left out of the mean.
    """
    floor_res = 10 * math.sqrt(spec.n)
    if resolution is None:
        resolution = math.ceil(16 * math.sqrt(spec.n))
    if resolution < floor_res - 1e-9:
        raise ValueError(f"resolution {resolution} is below 10 sqrt(n) = {floor_res:.2f}")
    if trials < 2:
        raise ValueError("need at least 2 trials")
    if seeds is None:
        seeds = [derive_seed(master_seed, i) for i in range(trials)]
    seeds = [int(s) for s in seeds]
    if len(seeds) != trials:
        raise ValueError("len(seeds) must equal trials")
    if len(set(seeds)) != len(seeds):
        raise ValueError("trial seeds must be distinct")
    jobs = [(spec, s, box, resolution, C) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            out = list(ex.map(_one_trial, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        out = [_one_trial(j) for j in jobs]
    lengths = np.array([o[0] for o in out])
    flagged = tuple(bool(o[1]) for o in out)
    kept = lengths[~np.array(flagged)]
    if len(kept) < 2:
        raise ValueError("fewer than 2 unflagged trials")
    return NodalEstimate(
        n=spec.n,
        box=box,
        trials=trials,
        resolution=resolution,
        mean_length=float(kept.mean()),
        std_error=float(kept.std(ddof=1) / math.sqrt(len(kept))),
        boundary_length=boundary_length(box),
        grid_length=deterministic_grid(spec).length_in(box),
        seeds=tuple(seeds),
        lengths=tuple(float(v) for v in lengths),
        flagged=flagged,
    )


def write_trials_csv(path, est: NodalEstimate, header_lines=()) -> None:
    with open(Path(path), "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "seed", "length", "flagged"])
        for i, (s, L, f) in enumerate(zip(est.seeds, est.lengths, est.flagged)):
            w.writerow([i, s, f"{L:.17g}", int(f)])


def write_overlay_png(path, fs: FieldSample, box: Box, resolution: float) -> None:
    """8-bit grayscale picture of sign(f) with the nodal set drawn black.

    Row 0 of the image is the top edge of the box (largest x2).
    """
    from PIL import Image

    x1, x2 = grid_nodes(box, resolution)
    H = reduced_field_grid(fs, x1, x2)
    g = fs.spectrum.fix.g
    F = np.sin(np.pi * g * x1)[:, None] * np.sin(np.pi * g * x2)[None, :] * H
    img = np.where(F >= 0, 200, 90).astype(np.uint8)
    sgn = F >= 0
    edge = np.zeros_like(sgn)
    edge[:-1] |= sgn[:-1] != sgn[1:]
    edge[:, :-1] |= sgn[:, :-1] != sgn[:, 1:]
    img[edge] = 0
    Image.fromarray(img.T[::-1].copy(), mode="L").save(Path(path))
