"""Command-line front end.

Subcommands: spectrum, corr, kacrice, nodal, compare, construct, density,
sectors. Parameters may also come from a flat ``key=value`` config file
(``--config``); flags given on the command line win.

Primary outputs (JSON or CSV) are deterministic: tool version, config and
seed are embedded, while the wall time goes to a ``<out>.meta.json`` sidecar
(or stderr when writing to stdout) so reruns are byte-identical.

Exit codes: 0 success, 2 validation error, 3 budget exceeded or search
exhausted, 4 cross-check failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .arith import count_S_upto, count_sector_primes, kubilius_main_term
from .constructor import NotFound, construct
from .correlations import DEFAULT_BUDGET, CorrelationQuery, brute_force_count, count
from .errors import BudgetExceeded, CrossCheckError
from .field import write_grid
from .kacrice import (
    Box,
    classify_singular,
    integrate_k1,
    k1_grid,
    kacrice_eval,
    lemma_calculations_report,
    predict_one_term,
    predict_two_term,
    write_heatmap_png,
)
from .nodal import mc_expected_length, write_overlay_png, write_trials_csv
from .field import sample
from .spectrum import SpectrumCache, enumerate_spectrum

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_CROSSCHECK = 0, 2, 3, 4

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def read_config(path) -> dict[str, str]:
    """Flat ``key=value`` file; '#' starts a comment, keys use '-' or '_'."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


# --- output plumbing ----------------------------------------------------------------


class Output:
    def __init__(self, args):
        self.args = args
        self.path = Path(args.out) if args.out else None
        self.t0 = time.perf_counter()

    def config(self) -> dict:
        skip = {"func", "out", "config"}
        return {k: v for k, v in sorted(vars(self.args).items()) if k not in skip}

    def meta(self) -> dict:
        return {"tool": "barw", "version": __version__, "command": self.args.command, "config": self.config()}

    def _emit(self, text: str) -> None:
        if self.path is None:
            sys.stdout.write(text)
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(text)
        wall = {"wall_time_s": time.perf_counter() - self.t0}
        if self.path is None:
            print(json.dumps(wall), file=sys.stderr)
        else:
            Path(str(self.path) + ".meta.json").write_text(json.dumps(wall) + "\n")

    def json(self, payload: dict) -> None:
        self._emit(json.dumps({"meta": self.meta(), **payload}, indent=2, sort_keys=True) + "\n")

    def csv(self, header: list[str], rows: list[list]) -> None:
        buf = io.StringIO()
        buf.write(f"# barw {__version__} {self.args.command}\n")
        buf.write(f"# config: {json.dumps(self.config(), sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
        self._emit(buf.getvalue())


def _spectrum(args):
    if getattr(args, "cache", None):
        return SpectrumCache(Path(args.cache) / "spectra.jsonl").get(args.n)
    return enumerate_spectrum(args.n)


def _box(args) -> Box:
    return Box((args.center[0], args.center[1]), args.side)


def _pair(text: str) -> tuple[float, float]:
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return float(parts[0]), float(parts[1])


def _int_pair(text: str) -> tuple[int, int]:
    a, b = _pair(text)
    if a != int(a) or b != int(b):
        raise argparse.ArgumentTypeError("direction must be an integer pair")
    return int(a), int(b)


def _bool(text) -> bool:
    t = str(text).lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _gamma_consistency(spec, box: Box, seed: int, points: int = 8, tol: float = 1e-8) -> float:
    """Largest entrywise breach of (2/(pi^2 n)) Sigma_c = I + Gamma at jittered points."""
    rng = np.random.default_rng(seed)
    lo1, hi1, lo2, hi2 = box.rect
    worst = 0.0
    for _ in range(points):
        x = (rng.uniform(lo1, hi1), rng.uniform(lo2, hi2))
        e = kacrice_eval(spec, x)
        if e.varF < 1e-6:
            continue
        lhs = 2.0 / (math.pi**2 * spec.n) * e.sigma_c
        worst = max(worst, float(np.max(np.abs(lhs - np.eye(2) - e.gamma))))
    if worst > tol:
        raise CrossCheckError(f"gamma-consistency breach {worst:.3g} > {tol}")
    return worst


# --- commands -----------------------------------------------------------------------


def cmd_spectrum(args, out: Output) -> int:
    spec = _spectrum(args)
    nh = spec.summary.nu_hat_4
    payload = {
        "n": spec.n,
        "N": spec.N,
        "nu_hat_4": {"num": nh.numerator, "den": nh.denominator, "float": float(nh)},
        "g": spec.fix.g,
        "Q": spec.fix.Q,
        "squarefree": spec.squarefree,
        "classes": [[c.a, c.b, c.size] for c in spec.classes],
    }
    if args.points:
        payload["points"] = [list(p) for p in spec.points]
    out.json(payload)
    return EXIT_OK


def _unordered_count(spec, q: CorrelationQuery) -> int:
    """Multisets of points (indices non-decreasing) meeting the query, by enumeration."""
    P = [tuple(p) for p in spec.points]
    total = 0
    for combo in itertools.combinations_with_replacement(range(len(P)), q.ell):
        sx = sum(P[i][0] for i in combo)
        sy = sum(P[i][1] for i in combo)
        if q.mode == "vector":
            ok = sx == 0 and sy == 0
        elif q.mode == "axis":
            S = sx if q.axis == 1 else sy
            ok = abs(S) <= q.K and not (q.strict_lower and S == 0)
        else:
            v1, v2 = q.direction
            ok = (sx * v1 + sy * v2) ** 2 <= math.floor(q.K**2 * (v1 * v1 + v2 * v2))
        total += ok
    return total


def cmd_corr(args, out: Output) -> int:
    spec = _spectrum(args)
    kw = {}
    if args.mode == "axis":
        kw["axis"] = args.t
    elif args.mode == "direction":
        if args.direction is None:
            raise ValueError("direction mode needs --direction")
        kw["direction"] = args.direction
    q = CorrelationQuery(spec.n, args.ell, args.mode, K=args.K, strict_lower=args.strict, **kw)
    res = count(spec, q, args.budget)
    payload = {
        "n": spec.n,
        "N": spec.N,
        "ell": q.ell,
        "mode": q.mode,
        "axis": q.axis,
        "direction": list(q.direction) if q.direction else None,
        "K": q.K,
        "strict_lower": q.strict_lower,
        "count": res.count,
        "trivial_prediction": res.trivial_prediction,
        "convention": "ordered tuples over all N points",
    }
    if args.oracle:
        oracle = brute_force_count(spec, q, args.budget)
        payload["oracle_count"] = oracle
        if math.comb(spec.N + q.ell - 1, q.ell) <= args.budget:
            payload["unordered_count"] = _unordered_count(spec, q)
        if oracle != res.count:
            out.json(payload)
            raise CrossCheckError(f"fast path {res.count} != oracle {oracle}")
    out.json(payload)
    return EXIT_OK


def cmd_kacrice(args, out: Output) -> int:
    spec = _spectrum(args)
    box = _box(args)
    _gamma_consistency(spec, box, args.seed)
    q = integrate_k1(spec, box, args.resolution, jitter_seed=args.seed, budget=args.node_budget)
    pc = args.paper_constants
    p1 = predict_one_term(spec, box, pc)
    p2 = predict_two_term(spec, box, pc)
    part = classify_singular(spec, box, args.delta, args.gamma)
    rows = [
        ["integral_K1", q.value, p2, q.value - p2],
        ["integral_error_estimate", q.error_estimate, 0.0, q.error_estimate],
        ["predict_1term", p1, p2, p1 - p2],
        ["predict_2term", p2, p2, 0.0],
        ["singular_fraction", part.fraction, 0.0, part.fraction],
    ]
    for r in lemma_calculations_report(spec, box, args.resolution, jitter_seed=args.seed):
        rows.append([r["name"], r["value"], r["paper_prediction"], r["residual"]])
    if args.heatmap or args.grid:
        res = args.image_resolution or 256
        lo1, hi1, lo2, hi2 = box.rect
        x1 = lo1 + (np.arange(res) + 0.5) * (hi1 - lo1) / res
        x2 = lo2 + (np.arange(res) + 0.5) * (hi2 - lo2) / res
        K = k1_grid(spec, x1, x2)
        if args.heatmap:
            write_heatmap_png(args.heatmap, K)
        if args.grid:
            write_grid(args.grid, K, spec.n, args.seed, res, box)
    if args.mask:
        write_heatmap_png(args.mask, (~part.flags).astype(float))
    out.csv(["name", "value", "paper_prediction", "residual"], rows)
    return EXIT_OK


def cmd_nodal(args, out: Output) -> int:
    spec = _spectrum(args)
    box = _box(args)
    est = mc_expected_length(spec, box, args.trials, args.resolution, args.seed, workers=args.workers, C=args.bound_c)
    if args.trials_csv:
        write_trials_csv(args.trials_csv, est, [f"barw {__version__} nodal n={spec.n} seed={args.seed}"])
    if args.png_dir:
        d = Path(args.png_dir)
        d.mkdir(parents=True, exist_ok=True)
        for i, s in enumerate(est.seeds[: args.png_count]):
            write_overlay_png(d / f"trial_{i:04d}.png", sample(spec, s), box, est.resolution)
    header = ["n", "N", "center_x1", "center_x2", "side", "trials", "resolution", "mean_length",
              "std_error", "boundary_length", "grid_length", "flagged"]
    row = [spec.n, spec.N, box.center[0], box.center[1], box.side, est.trials, float(est.resolution),
           est.mean_length, est.std_error, est.boundary_length, est.grid_length, est.n_flagged]
    out.csv(header, [row])
    return EXIT_OK


def cmd_compare(args, out: Output) -> int:
    spec = _spectrum(args)
    box = _box(args)
    _gamma_consistency(spec, box, args.seed)
    est = mc_expected_length(spec, box, args.trials, args.resolution, args.seed, workers=args.workers, C=args.bound_c)
    kr_res = args.kr_resolution or max(math.ceil(16 * math.sqrt(spec.n)), 256)
    q = integrate_k1(spec, box, kr_res, jitter_seed=args.seed, budget=args.node_budget)
    pc = args.paper_constants
    p1 = predict_one_term(spec, box, pc)
    p2 = predict_two_term(spec, box, pc)
    header = ["n", "N", "nu_hat_4", "center_x1", "center_x2", "side", "mc_mean", "mc_stderr",
              "kacrice_integral", "kr_error_est", "predict_1term", "predict_2term", "mc_kr_z", "kr_p2_rel"]
    row = [spec.n, spec.N, float(spec.summary.nu_hat_4), box.center[0], box.center[1], box.side,
           est.mean_length, est.std_error, q.value, q.error_estimate, p1, p2,
           abs(est.mean_length - q.value) / est.std_error, abs(q.value - p2) / p2]
    out.csv(header, [row])
    return EXIT_OK


def cmd_construct(args, out: Output) -> int:
    lvl = construct(args.a, args.tol, args.m, args.bound)
    out.json(lvl.as_dict())
    return EXIT_OK


def cmd_density(args, out: Output) -> int:
    rows = []
    for X in args.X:
        c, est = count_S_upto(X)
        rows.append([X, c, est])
    out.csv(["X", "count", "c_estimate"], rows)
    return EXIT_OK


def cmd_sectors(args, out: Output) -> int:
    c = count_sector_primes(args.theta1, args.theta2, args.X)
    main = kubilius_main_term(args.theta1, args.theta2, args.X)
    out.csv(["theta1", "theta2", "X", "count", "main_term", "ratio"],
            [[args.theta1, args.theta2, args.X, c, main, c / main if main else float("nan")]])
    return EXIT_OK


# --- parser -------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, n: bool = True) -> None:
    p.add_argument("--config", help="key=value config file (flags override it)")
    p.add_argument("--out", help="primary output path (default: stdout)")
    if n:
        p.add_argument("--n", type=int, required=True, help="eigenvalue, a sum of two squares")
        p.add_argument("--cache", help="directory holding the spectrum cache")


def _box_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--center", type=_pair, default="0.5,0.5", help="box centre x1,x2")
    p.add_argument("--side", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--paper-constants", type=_bool, nargs="?", const=True, default=False,
                   help="drop pi from the leading density")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="barw", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"barw {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="lattice points and nu_hat_4 as JSON")
    _common(p)
    p.add_argument("--points", type=_bool, nargs="?", const=True, default=False)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("corr", help="exact correlation counts as JSON")
    _common(p)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--mode", choices=["axis", "direction", "vector"], default="axis")
    p.add_argument("--t", type=int, default=1, help="axis (1 or 2)")
    p.add_argument("--direction", type=_int_pair)
    p.add_argument("--K", type=float, default=0.0)
    p.add_argument("--strict", type=_bool, nargs="?", const=True, default=False, help="exclude sum 0")
    p.add_argument("--oracle", type=_bool, nargs="?", const=True, default=False)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("kacrice", help="Kac-Rice integral, predictions and box averages as CSV")
    _common(p)
    _box_args(p)
    p.add_argument("--resolution", type=float, help="nodes per unit length (>= 16 sqrt(n))")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--node-budget", type=int, default=2 * 10**8)
    p.add_argument("--heatmap", help="K1 grayscale PNG")
    p.add_argument("--grid", help="K1 raw binary grid")
    p.add_argument("--mask", help="singular-cell PNG (black = singular)")
    p.add_argument("--image-resolution", type=int)
    p.set_defaults(func=cmd_kacrice)

    for name, func in (("nodal", cmd_nodal), ("compare", cmd_compare)):
        p = sub.add_parser(name, help="Monte Carlo nodal length" if name == "nodal" else "MC vs Kac-Rice, one CSV row")
        _common(p)
        _box_args(p)
        p.add_argument("--trials", type=int, default=200)
        p.add_argument("--resolution", type=float, help="grid nodes per unit length (>= 10 sqrt(n))")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--bound-c", type=float, default=10.0)
        if name == "nodal":
            p.add_argument("--trials-csv", help="per-trial CSV")
            p.add_argument("--png-dir", help="directory for overlay PNGs")
            p.add_argument("--png-count", type=int, default=4)
        else:
            p.add_argument("--kr-resolution", type=float)
            p.add_argument("--node-budget", type=int, default=2 * 10**8)
        p.set_defaults(func=func)

    p = sub.add_parser("construct", help="level with prescribed nu_hat_4 as JSON")
    _common(p, n=False)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--tol", type=float, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--bound", type=int, default=10**7)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("density", help="sums of two squares up to X, as CSV")
    _common(p, n=False)
    p.add_argument("--X", type=int, nargs="+", required=True)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("sectors", help="Gaussian primes in a sector vs the main term, as CSV")
    _common(p, n=False)
    p.add_argument("--theta1", type=float, required=True)
    p.add_argument("--theta2", type=float, required=True)
    p.add_argument("--X", type=int, required=True)
    p.set_defaults(func=cmd_sectors)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config or not known.command:
        return
    conf = read_config(known.config)
    sub = next(a for a in ap._actions if isinstance(a, argparse._SubParsersAction))
    sp = sub.choices.get(known.command)
    if sp is None:
        return
    dests = {a.dest: a for a in sp._actions}
    unknown = sorted(set(conf) - set(dests))
    if unknown:
        raise ValueError(f"unknown config keys for {known.command}: {', '.join(unknown)}")
    for k, v in conf.items():
        act = dests[k]
        if act.nargs == "+":
            v = [act.type(t) if act.type else t for t in v.split()]
        act.required = False
        act.default = v
    # string defaults go through each action's type converter during parsing


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        _apply_config(ap, argv)
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INVALID
    except (ValueError, OSError) as e:
        print(f"barw: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    out = Output(args)
    try:
        return args.func(args, out)
    except CrossCheckError as e:
        print(f"barw: cross-check failed: {e}", file=sys.stderr)
        return EXIT_CROSSCHECK
    except (BudgetExceeded, NotFound) as e:
        print(f"barw: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as e:
        print(f"barw: error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
