"""Kac-Rice zero density of the boundary-adapted wave and its integrals.

The pointwise density is

    K1(x) = E[|grad f(x)| | f(x) = 0] / sqrt(2 pi Var f(x)),

computed from the conditional gradient covariance
``Sigma_c = Cov(grad f) - Cov(f, grad f) Cov(f, grad f)^T / Var f``. For a
centred 2-d Gaussian with covariance eigenvalues l1 >= l2 >= 0,

    E|Z| = sqrt(2/pi) * sqrt(l1) * E(1 - l2/l1)

with E the complete elliptic integral of the second kind (parameter
convention of ``scipy.special.ellipe``).

Normalising, ``(2 / (pi^2 n)) Sigma_c = I + Gamma`` where Gamma is assembled
from the trigonometric sums b11, b12, b22, d1, d2 (quarter-orbit convention:
a sum over classes means 1/4 of the sum over all lattice points). The
leading density is ``pi sqrt(n) / (2 sqrt 2)``; ``paper_constants=True``
drops the pi where a literal comparison is wanted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import ellipe

from .errors import BudgetExceeded, DegeneratePointError
from .field import moment_grids
from .spectrum import CircleSpectrum

__all__ = [
    "Box",
    "KacRiceEval",
    "SingularPartition",
    "QuadratureResult",
    "expected_norm",
    "leading_density",
    "gamma_terms",
    "gamma_decomposition",
    "kacrice_eval",
    "k1_exact",
    "k1_expansion",
    "k1_grid",
    "classify_singular",
    "box_nodes",
    "integrate_k1",
    "predict_one_term",
    "predict_two_term",
    "lemma_calculations_report",
    "DEFAULT_NODE_BUDGET",
    "write_heatmap_png",
]

DEFAULT_NODE_BUDGET = 2 * 10**8
_CHUNK = 1 << 21  # grid nodes processed per block
_VAR_FLOOR = 1e-20  # below this Var f counts as zero (rounding of sin(k pi))


@dataclass(frozen=True)
class Box:
    """Square of side ``side`` centred at ``center``, clipped to [0, 1]^2."""

    center: tuple[float, float]
    side: float

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if not self.side > 0:
            raise ValueError("box side must be positive")
        if not all(0.0 <= c <= 1.0 for c in self.center):
            raise ValueError("box centre must lie in [0, 1]^2")
        if self.area <= 0:
            raise ValueError("box does not meet the unit square")

    @classmethod
    def unit(cls) -> Box:
        return cls((0.5, 0.5), 1.0)

    @property
    def rect(self) -> tuple[float, float, float, float]:
        """(lo1, hi1, lo2, hi2) of the clipped rectangle."""
        h = self.side / 2
        (z1, z2) = self.center
        return (max(0.0, z1 - h), min(1.0, z1 + h), max(0.0, z2 - h), min(1.0, z2 + h))

    @property
    def area(self) -> float:
        lo1, hi1, lo2, hi2 = self.rect
        return max(0.0, hi1 - lo1) * max(0.0, hi2 - lo2)


def leading_density(n: int, paper_constants: bool = False) -> float:
    c = math.sqrt(n) / (2 * math.sqrt(2))
    return c if paper_constants else math.pi * c


# --- the E|Z| kernel ------------------------------------------------------------


def _quad_mean_sqrt(l1: float, l2: float) -> float:
    val, _ = integrate.quad(
        lambda t: math.sqrt(l1 * math.cos(t) ** 2 + l2 * math.sin(t) ** 2),
        0.0,
        math.pi / 2,
        epsabs=0.0,
        epsrel=1e-12,
        limit=200,
    )
    return val * 2 / math.pi


def expected_norm(l1, l2, method: str = "ellipe"):
    """E|Z| for Z ~ N(0, diag(l1, l2)). Vectorised over numpy inputs.

    ``method="quad"`` integrates the angular average with adaptive
    quadrature instead of the elliptic integral (scalars only).
    """
    if method == "quad":
        a, b = max(float(l1), float(l2)), min(float(l1), float(l2))
        if a < 0 or b < -1e-12:
            raise ValueError("eigenvalues must be nonnegative")
        return math.sqrt(math.pi / 2) * _quad_mean_sqrt(a, max(b, 0.0))
    l1 = np.asarray(l1, float)
    l2 = np.asarray(l2, float)
    hi = np.maximum(l1, l2)
    lo = np.clip(np.minimum(l1, l2), 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.where(hi > 0, 1.0 - lo / np.where(hi > 0, hi, 1.0), 0.0)
    out = math.sqrt(2 / math.pi) * np.sqrt(hi) * ellipe(m)
    return float(out) if out.ndim == 0 else out


def _sym_eig(a, b, d):
    """Eigenvalues (hi, lo) of [[a, b], [b, d]], tiny negatives clamped to 0."""
    half_tr = 0.5 * (a + d)
    rad = np.sqrt(0.25 * (a - d) ** 2 + b * b)
    hi, lo = half_tr + rad, half_tr - rad
    lo = np.where((lo < 0) & (lo > -1e-12 * np.maximum(np.abs(hi), 1.0)), 0.0, lo)
    return hi, lo


def _k1_from_moments(m: dict[str, np.ndarray]) -> np.ndarray:
    var = m["var"]
    s11 = m["g11"] - m["c1"] ** 2 / var
    s12 = m["g12"] - m["c1"] * m["c2"] / var
    s22 = m["g22"] - m["c2"] ** 2 / var
    hi, lo = _sym_eig(s11, s12, s22)
    return expected_norm(hi, lo) / np.sqrt(2 * np.pi * var)


# --- Gamma ---------------------------------------------------------------------


def gamma_terms(spec: CircleSpectrum, x1, x2) -> dict[str, np.ndarray]:
    """b11, b12, b22, d1, d2 on the tensor grid (quarter-orbit sums)."""
    xi = spec.class_array.astype(float)
    w = spec.class_weights
    a, b = xi[:, 0], xi[:, 1]
    x1 = np.asarray(x1, float)
    x2 = np.asarray(x2, float)
    c1 = np.cos(2 * np.pi * np.outer(a, x1))
    c2 = np.cos(2 * np.pi * np.outer(b, x2))
    sn1 = np.sin(2 * np.pi * np.outer(a, x1))
    sn2 = np.sin(2 * np.pi * np.outer(b, x2))
    h1 = np.sin(np.pi * np.outer(a, x1)) ** 2
    h2 = np.sin(np.pi * np.outer(b, x2)) ** 2
    one1 = np.ones_like(c1)
    one2 = np.ones_like(c2)

    def sep(u, v, weight):
        return (u.T * (w * weight)) @ v

    # xi_k^2 (cos(2 pi xi_k x_k) - cos(2 pi xi_j x_j) - cos(..) cos(..)), j != k
    return {
        "b11": sep(c1, one2, a * a) - sep(one1, c2, a * a) - sep(c1, c2, a * a),
        "b22": sep(one1, c2, b * b) - sep(c1, one2, b * b) - sep(c1, c2, b * b),
        "b12": sep(sn1, sn2, a * b),
        "d1": sep(sn1, h2, a),
        "d2": sep(h1, sn2, b),
    }


def _gamma(spec: CircleSpectrum, t: dict[str, np.ndarray], var: np.ndarray):
    n, N = spec.n, spec.N
    k1 = 8.0 / (n * N)
    k2 = 128.0 / (n * N * N * var)
    g11 = k1 * t["b11"] - k2 * t["d1"] ** 2
    g12 = k1 * t["b12"] - k2 * t["d1"] * t["d2"]
    g22 = k1 * t["b22"] - k2 * t["d2"] ** 2
    return g11, g12, g22


@dataclass(frozen=True)
class KacRiceEval:
    x: tuple[float, float]
    varF: float
    s_n: float
    b11: float
    b12: float
    b22: float
    d1: float
    d2: float
    gamma: np.ndarray
    K1_exact: float
    K1_expansion: float
    upsilon_bound: float
    sigma_c: np.ndarray = field(repr=False)

    @property
    def trGamma(self) -> float:
        return float(np.trace(self.gamma))

    @property
    def detGamma(self) -> float:
        return float(np.linalg.det(self.gamma))


def _expansion(n: int, s, tr, tr2, paper_constants: bool = False):
    corr = s + tr / 2 + 0.75 * s * s + 0.25 * s * tr - tr2 / 16 - tr * tr / 32
    return leading_density(n, paper_constants) + math.pi * math.sqrt(n) / (4 * math.sqrt(2)) * corr


def kacrice_eval(spec: CircleSpectrum, x, paper_constants: bool = False) -> KacRiceEval:
    x1, x2 = (float(v) for v in x)
    X1, X2 = np.array([x1]), np.array([x2])
    m = {k: float(v[0, 0]) for k, v in moment_grids(spec, X1, X2).items()}
    var = m["var"]
    if not var > _VAR_FLOOR:
        raise DegeneratePointError(f"Var f = {var!r} at x = {(x1, x2)}")
    t = {k: float(v[0, 0]) for k, v in gamma_terms(spec, X1, X2).items()}
    g11, g12, g22 = _gamma(spec, t, var)
    G = np.array([[g11, g12], [g12, g22]])
    c = np.array([m["c1"], m["c2"]])
    Sc = np.array([[m["g11"], m["g12"]], [m["g12"], m["g22"]]]) - np.outer(c, c) / var
    k1 = float(_k1_from_moments({k: np.array(v) for k, v in m.items()}))
    s = 1.0 - var
    tr = g11 + g22
    tr2 = g11 * g11 + 2 * g12 * g12 + g22 * g22
    gnorm = float(np.max(np.abs(np.linalg.eigvalsh(G))))
    return KacRiceEval(
        x=(x1, x2),
        varF=var,
        s_n=s,
        b11=t["b11"],
        b12=t["b12"],
        b22=t["b22"],
        d1=t["d1"],
        d2=t["d2"],
        gamma=G,
        K1_exact=k1,
        K1_expansion=float(_expansion(spec.n, s, tr, tr2, paper_constants)),
        upsilon_bound=math.sqrt(spec.n) * (abs(s) ** 3 + gnorm**3),
        sigma_c=Sc,
    )


def gamma_decomposition(spec: CircleSpectrum, x):
    """(s_n, b11, b12, b22, d1, d2, Gamma) at x."""
    e = kacrice_eval(spec, x)
    return e.s_n, e.b11, e.b12, e.b22, e.d1, e.d2, e.gamma


def k1_exact(spec: CircleSpectrum, x) -> float:
    return kacrice_eval(spec, x).K1_exact


def k1_expansion(spec: CircleSpectrum, x, paper_constants: bool = False) -> float:
    return kacrice_eval(spec, x, paper_constants).K1_expansion


def k1_grid(spec: CircleSpectrum, x1, x2) -> np.ndarray:
    """K1 on the tensor grid x1 x x2, indexed [i1, i2]."""
    x1 = np.asarray(x1, float)
    x2 = np.asarray(x2, float)
    out = np.empty((len(x1), len(x2)))
    step = max(1, _CHUNK // max(len(x2), 1))
    for i in range(0, len(x1), step):
        m = moment_grids(spec, x1[i : i + step], x2)
        if np.any(m["var"] <= _VAR_FLOOR):
            raise DegeneratePointError("a grid node sits on a point with Var f = 0")
        out[i : i + step] = _k1_from_moments(m)
    return out


# --- quadrature ----------------------------------------------------------------


def box_nodes(box: Box, cells_per_unit: float, jitter_seed: int | None = 0, cells=None):
    """Midpoint nodes of a uniform cell grid over the clipped box.

    All nodes share one seeded offset inside their cell (drawn from
    [-0.25, 0.25] cell widths per axis) so no node sits on a measure-zero
    degenerate point. Returns (x1, x2, cell_area).
    """
    lo1, hi1, lo2, hi2 = box.rect
    if cells is None:
        m1 = max(1, math.ceil((hi1 - lo1) * cells_per_unit - 1e-9))
        m2 = max(1, math.ceil((hi2 - lo2) * cells_per_unit - 1e-9))
    else:
        m1, m2 = cells
    if jitter_seed is None:
        j1 = j2 = 0.0
    else:
        j1, j2 = np.random.default_rng(jitter_seed).uniform(-0.25, 0.25, size=2)
    h1, h2 = (hi1 - lo1) / m1, (hi2 - lo2) / m2
    x1 = lo1 + (np.arange(m1) + 0.5 + j1) * h1
    x2 = lo2 + (np.arange(m2) + 0.5 + j2) * h2
    return x1, x2, h1 * h2


def _pairwise_total(blocks: list[float]) -> float:
    return float(math.fsum(blocks))


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    coarse_value: float
    cells: tuple[int, int]

    def __iter__(self):
        yield self.value
        yield self.error_estimate


def _integrate_on(spec, box, cells, jitter_seed) -> float:
    x1, x2, w = box_nodes(box, 0, jitter_seed, cells=cells)
    step = max(1, _CHUNK // max(len(x2), 1))
    parts = []
    for i in range(0, len(x1), step):
        parts.append(float(k1_grid(spec, x1[i : i + step], x2).sum()) * w)
    return _pairwise_total(parts)


def integrate_k1(
    spec: CircleSpectrum,
    box: Box,
    resolution: float | None = None,
    jitter_seed: int | None = 0,
    budget: int = DEFAULT_NODE_BUDGET,
) -> QuadratureResult:
    """Expected nodal length in the box: the integral of K1 over it.

    ``resolution`` is in nodes per unit length and must be at least
    16 sqrt(n) (16 nodes per wavelength). The error estimate is the
    difference against the half-resolution rule, |I_h - I_2h|. That is the
    Richardson bound for a first-order rule: isolated points where Var f
    vanishes make K1 singular and cap the midpoint rule at first order.
    """
    floor_res = 16 * math.sqrt(spec.n)
    if resolution is None:
        resolution = math.ceil(floor_res)
    if resolution < floor_res - 1e-9:
        raise ValueError(f"resolution {resolution} is below 16 sqrt(n) = {floor_res:.2f}")
    lo1, hi1, lo2, hi2 = box.rect
    m1 = max(1, math.ceil((hi1 - lo1) * resolution - 1e-9))
    m2 = max(1, math.ceil((hi2 - lo2) * resolution - 1e-9))
    if m1 * m2 * 1.25 > budget:
        raise BudgetExceeded(f"{m1 * m2} quadrature nodes exceed the budget {budget}")
    fine = _integrate_on(spec, box, (m1, m2), jitter_seed)
    coarse = _integrate_on(spec, box, (max(1, m1 // 2), max(1, m2 // 2)), jitter_seed)
    return QuadratureResult(fine, abs(fine - coarse), coarse, (m1, m2))


def predict_one_term(spec: CircleSpectrum, box: Box, paper_constants: bool = False) -> float:
    return box.area * leading_density(spec.n, paper_constants)


def predict_two_term(spec: CircleSpectrum, box: Box, paper_constants: bool = False) -> float:
    nu = float(spec.summary.nu_hat_4)
    return predict_one_term(spec, box, paper_constants) * (1.0 - (1.0 + nu) / (16 * spec.N))


# --- singular cells ------------------------------------------------------------


@dataclass(frozen=True)
class SingularPartition:
    delta: float
    gamma: float
    cell_side: tuple[float, float]
    flags: np.ndarray  # bool, [i1, i2], True = singular
    certified_regular: np.ndarray  # bool, regular by the Lipschitz margin on s_n

    @property
    def fraction(self) -> float:
        return float(self.flags.mean()) if self.flags.size else 0.0

    @property
    def n_singular(self) -> int:
        return int(self.flags.sum())


_PROBE = np.array([0.1, 0.3, 0.5, 0.7, 0.9])


def _local_stats(spec, x1, x2):
    """var, s, TrGamma, detGamma, Tr(Gamma^2) on a tensor grid."""
    m = moment_grids(spec, x1, x2)
    var = m["var"]
    t = gamma_terms(spec, x1, x2)
    with np.errstate(divide="ignore", invalid="ignore"):
        g11, g12, g22 = _gamma(spec, t, var)
    return var, g11, g12, g22


def classify_singular(spec: CircleSpectrum, box: Box, delta: float = 0.1, gamma: float = 0.5) -> SingularPartition:
    """Flag cells of side delta/sqrt(n) where |s_n|, |Tr Gamma| or |det Gamma| reach gamma.

    Each cell is probed on a 5x5 grid. A cell is additionally certified
    regular when every probe has |s_n| below gamma minus the largest change
    allowed by |grad s_n| <= 100 sqrt(n) over the distance to the nearest probe.
    """
    if delta <= 0 or gamma <= 0:
        raise ValueError("delta and gamma must be positive")
    lo1, hi1, lo2, hi2 = box.rect
    side = delta / math.sqrt(spec.n)
    m1 = max(1, math.ceil((hi1 - lo1) / side - 1e-9))
    m2 = max(1, math.ceil((hi2 - lo2) / side - 1e-9))
    h1, h2 = (hi1 - lo1) / m1, (hi2 - lo2) / m2
    p1 = (lo1 + (np.arange(m1)[:, None] + _PROBE[None, :]) * h1).ravel()
    p2 = (lo2 + (np.arange(m2)[:, None] + _PROBE[None, :]) * h2).ravel()
    k = len(_PROBE)
    flags = np.zeros((m1, m2), dtype=bool)
    smax = np.zeros((m1, m2))
    rows_per = max(1, (_CHUNK // max(len(p2), 1)) // k)
    for i in range(0, m1, rows_per):
        sub = p1[i * k : (i + rows_per) * k]
        var, g11, g12, g22 = _local_stats(spec, sub, p2)
        s = 1.0 - var
        tr = g11 + g22
        det = g11 * g22 - g12 * g12
        bad = (np.abs(s) >= gamma) | ~(np.abs(tr) < gamma) | ~(np.abs(det) < gamma)
        r = len(sub) // k
        flags[i : i + r] = bad.reshape(r, k, m2, k).any(axis=(1, 3))
        smax[i : i + r] = np.abs(s).reshape(r, k, m2, k).max(axis=(1, 3))
    reach = 100 * math.sqrt(spec.n) * 0.1 * math.hypot(h1, h2)
    certified = ~flags & (smax + reach < gamma)
    return SingularPartition(delta, gamma, (h1, h2), flags, certified)


# --- box averages ----------------------------------------------------------------


def _normalizations(spec: CircleSpectrum) -> dict[str, float]:
    s4 = sum(a**4 for a, _ in spec.points) / 4  # quarter-orbit sum of xi1^4
    n, N = spec.n, spec.N
    return {"raw": s4, "/n^2": s4 / n**2, "/(n^2 N)": s4 / (n * n * N)}


def lemma_calculations_report(
    spec: CircleSpectrum, box: Box, resolution: float | None = None, jitter_seed: int | None = 0
) -> list[dict]:
    """Box averages of the expansion ingredients next to their predicted values.

    Measures only; nothing is asserted. Rows carry ``name``, ``value``,
    ``paper_prediction`` and ``residual`` (value - prediction; for bounds of
    the form "<< X" the prediction is 0 and the bound is given in ``bound``).
    """
    n, N = spec.n, spec.N
    if resolution is None:
        resolution = math.ceil(16 * math.sqrt(n))
    x1, x2, _ = box_nodes(box, resolution, jitter_seed)
    acc = dict.fromkeys(["s", "tr", "s2", "s_tr", "tr_g2", "tr_sq", "s3", "tr3"], 0.0)
    step = max(1, _CHUNK // max(len(x2), 1))
    for i in range(0, len(x1), step):
        var, g11, g12, g22 = _local_stats(spec, x1[i : i + step], x2)
        s = 1.0 - var
        tr = g11 + g22
        tr2 = g11 * g11 + 2 * g12 * g12 + g22 * g22
        acc["s"] += s.sum()
        acc["tr"] += tr.sum()
        acc["s2"] += (s * s).sum()
        acc["s_tr"] += (s * tr).sum()
        acc["tr_g2"] += tr2.sum()
        acc["tr_sq"] += (tr * tr).sum()
        acc["s3"] += (s**3).sum()
        acc["tr3"] += (tr**3).sum()
    cnt = len(x1) * len(x2)
    avg = {k: v / cnt for k, v in acc.items()}

    rows = []

    def row(name, value, pred, bound=None):
        rows.append({"name": name, "value": value, "paper_prediction": pred, "residual": value - pred, "bound": bound})

    row("item1_avg_s", avg["s"], 0.0, n ** (-0.25))
    row("item2_avg_trGamma", avg["tr"], -6.0 / N)
    row("item3_avg_s2", avg["s2"], 5.0 / N)
    row("item4_avg_s_trGamma", avg["s_tr"], 2.0 / N)
    for label, S in _normalizations(spec).items():
        row(f"item5_avg_tr_Gamma2[{label}]", avg["tr_g2"], 4.0 / N * (1 + 32 * S))
    for label, S in _normalizations(spec).items():
        row(f"item6_avg_trGamma_sq[{label}]", avg["tr_sq"], 4.0 / N * (64 * S - 3))
    row("item7_avg_s3", avg["s3"], 0.0, N**-2.0)
    row("item8_avg_trGamma3", avg["tr3"], 0.0, N**-2.0)

    # cosine moments along x1 (quarter-orbit sums over classes)
    lo1, hi1, _, _ = box.rect
    s_len = box.side
    xi1 = spec.class_array[:, 0].astype(float)
    w = spec.class_weights
    C = np.cos(2 * np.pi * np.outer(xi1, x1))
    mom = [(C**k).mean(axis=1) for k in range(1, 5)]
    nz = xi1 != 0
    tail = float(np.sum(w[nz] / (np.abs(xi1[nz]) * s_len)))
    row("cos1_sum_avg", float(w @ mom[0]), 0.0, 2 * tail)
    row("cos2_sum_avg", float(w @ mom[1]), 0.5 * N / 4, tail)
    cross = float(((w[:, None] * C).sum(axis=0) ** 2).mean())
    row("cos_pair_sum_avg", cross, 0.5 * N / 4)
    row("cos3_sum_avg", float(w @ mom[2]), 0.0, tail)
    row("cos4_sum_avg", float(w @ mom[3]), 3.0 / 8 * N / 4, tail)
    return rows


def write_heatmap_png(path, values: np.ndarray) -> None:
    """8-bit grayscale image of a grid indexed [i1, i2], min -> black, max -> white.

    Row 0 of the image is the largest x2 (top of the box).
    """
    from PIL import Image

    v = np.asarray(values, float)
    lo, hi = float(np.min(v)), float(np.max(v))
    scaled = np.zeros_like(v) if hi <= lo else (v - lo) / (hi - lo)
    img = np.round(255 * scaled).astype(np.uint8)
    Image.fromarray(img.T[::-1].copy(), mode="L").save(path)
