"""Named experiments.  Each returns ``(verdict, config, result)``.

``verdict`` is one of ``positive``, ``negative`` or ``inconclusive``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import affine, checks
from .prune import PruneAborted
from .roots import (GoodnessError, LocalizationError, NotPositive, check_good, find_good_interval,
                    localize_double_root, min_root_product, pad_prefix, trivial_membership)
from .scan import scan, survivor_prefix_property
from .series import B2, format_coeffs, parse_coeffs

POSITIVE, NEGATIVE, INCONCLUSIVE = "positive", "negative", "inconclusive"

DEG50_EXAMPLE = "1ooo1011011011101110110111111101111111o11111o1oo1oo"
DEG50_EXAMPLE_INTERVAL = (0.668470, 0.668482)
DEG50_EXAMPLE_RATIOS = (1.03199, 1.06665, 0.912958)
DEG50_EXAMPLE_TARGET = (0.66847556, 0.66847564)
RATIO_TOL = 5e-4

THETA_ROWS = {
    1: (0.668550, "1ooo10110110111011111o011111oo1oo0111111111111oo1oo"),
    2: (0.668900, "1ooo1011011011111o111oo11oo11o111o10oo0o0oooo0o0ooo"),
    3: (0.669310, "1ooo101101110011101011110111111o000ooooo1oooo100011"),
    4: (0.669336, "1ooo1011011100111011001111111o0110101111o1111111oo0"),
}
THETA_TOL = 1e-7

BPRIME_POLY = "(1, -2, -1, 1, 1, 1, 2, 1, 1, 2, 1, 1, 2, 1, 1, 2, 1, 2, 1, 1, 2, -2, -2, -1, -2, 2, -1)"
BPRIME_INTERVAL = (0.5436, 0.5438)
ALPHA2_UPPER = 0.6684754


@dataclass(frozen=True)
class Experiment:
    name: str
    criterion: str
    summary: str
    run: Callable[..., tuple]


def _verdict(ok: bool) -> str:
    return POSITIVE if ok else NEGATIVE


def _scan_doc(cert) -> dict:
    return cert.as_dict(include_cells=False)


def _grid_for(lo: float, hi: float, width: float) -> int:
    return max(1, math.ceil((hi - lo) / width - 1e-9))


def _guard_scan(config: dict, fn):
    try:
        return fn()
    except PruneAborted as exc:
        return INCONCLUSIVE, config, {"aborted": str(exc), "cell_index": exc.cell_index, "nodes": exc.nodes}


def gap_i1(jobs: int = 1, checkpoint: Optional[str] = None, **_) -> tuple:
    cfg = {"range": [0.668478, 0.668489], "grid": 110, "depth": 40, "max_depth": 50, "refine": 3}

    def go():
        cert = scan(0.668478, 0.668489, 110, depth=40, refine=3, max_depth=50, jobs=jobs, checkpoint=checkpoint)
        return _verdict(cert.fully_excluded), cfg, _scan_doc(cert)

    return _guard_scan(cfg, go)


def deg50_example(**_) -> tuple:
    a, b = DEG50_EXAMPLE_INTERVAL
    cfg = {"poly": DEG50_EXAMPLE, "interval": [a, b], "ratio_tol": RATIO_TOL, "target": list(DEG50_EXAMPLE_TARGET)}
    P = parse_coeffs(DEG50_EXAMPLE)
    try:
        g = check_good(P, a, b)
        loc = localize_double_root(g)
    except (GoodnessError, LocalizationError) as exc:
        return NEGATIVE, cfg, {"error": type(exc).__name__, "detail": str(exc)}
    want_a, want_b, want_w = DEG50_EXAMPLE_RATIOS
    checks_ = {
        "ratio_a": abs(g.ratio_a - want_a) <= RATIO_TOL,
        "ratio_b": abs(g.ratio_b - want_b) <= RATIO_TOL,
        "ratio_witness": abs(g.ratio_witness - want_w) <= RATIO_TOL,
        "root_in_target": DEG50_EXAMPLE_TARGET[0] <= loc.lo and loc.hi <= DEG50_EXAMPLE_TARGET[1],
        "upper_bound": loc.hi <= ALPHA2_UPPER + 3e-7,
    }
    return _verdict(all(checks_.values())), cfg, {"good": g.as_dict(), "localization": loc.as_dict(),
                                                   "checks": checks_}


def alpha2_lower(jobs: int = 1, checkpoint: Optional[str] = None, full: bool = False, **_) -> tuple:
    lo = 0.5 if full else 0.6684
    hi = ALPHA2_UPPER
    grid = _grid_for(lo, hi, 1e-6)
    # cells next to the double root just above hi need widths near 4e-9
    cfg = {"range": [lo, hi], "grid": grid, "depth": 40, "max_depth": 50, "refine": 8, "full": full}

    def go():
        cert = scan(lo, hi, grid, depth=40, refine=8, max_depth=50, jobs=jobs, checkpoint=checkpoint)
        return _verdict(cert.fully_excluded), cfg, _scan_doc(cert)

    return _guard_scan(cfg, go)


def theta_row(j: int) -> dict:
    theta, text = THETA_ROWS[j]
    P = pad_prefix(parse_coeffs(text), theta)
    g = find_good_interval(P, theta)
    loc = localize_double_root(g)
    ok = theta - THETA_TOL <= loc.lo and loc.hi <= theta + THETA_TOL
    return {"row": j, "theta": theta, "prefix": text, "padded": format_coeffs(P)[len(text):],
            "good": g.as_dict(), "localization": loc.as_dict(), "within_tol": ok}


def theta_table(rows=(1, 2), **_) -> tuple:
    cfg = {"rows": list(rows), "tol": THETA_TOL}
    out = []
    for j in rows:
        try:
            out.append(theta_row(j))
        except (GoodnessError, LocalizationError) as exc:
            out.append({"row": j, "error": type(exc).__name__, "detail": str(exc), "within_tol": False})
    return _verdict(all(r["within_tol"] for r in out)), cfg, {"rows": out}


def cover_lemma(depth: int = 8, max_depth: int = 12, **_) -> tuple:
    cfg = {"depth": depth, "max_depth": max_depth, "scale": 0.95, "family": "3^5"}
    cert = affine.verify_covering_lemma(depth)
    res = {"requested": cert.as_dict()}
    required = depth if cert.covered else None
    d = depth
    while required is None and d < max_depth:
        d += 1
        if affine.verify_covering_lemma(d).covered:
            required = d
    res["depth_required"] = required
    if not cert.extras["point_in_V"]:
        return NEGATIVE, cfg, res
    if required is None:
        return INCONCLUSIVE, cfg, res
    return POSITIVE, cfg, res


def eta(eta: float = 4e-6, **_) -> tuple:
    cfg = {"eta": eta, "j": 5, "scale": 0.95, "envelope": 1.5}
    chain = affine.robustness_eta(eta=eta)
    best = affine.max_eta()
    res = {"chain": chain.as_dict(), "max_eta": best}
    return _verdict(chain.verdict and best >= eta), cfg, res


def bprime(jobs: int = 1, **_) -> tuple:
    lo, hi = 0.51, BPRIME_INTERVAL[0]
    grid = _grid_for(lo, hi, 1e-5)
    cfg = {"range": [lo, hi], "grid": grid, "set": "b2", "depth": 30, "refine": 10, "max_depth": 50,
           "poly": BPRIME_POLY, "interval": list(BPRIME_INTERVAL), "prefix_range": [0.5, 0.51]}
    res: dict = {}
    try:
        cert = scan(lo, hi, grid, depth=30, coeff_set=B2, refine=10, max_depth=50, jobs=jobs)
    except PruneAborted as exc:
        return INCONCLUSIVE, cfg, {"aborted": str(exc), "cell_index": exc.cell_index}
    res["exclusion"] = _scan_doc(cert)
    ok = {"exclusion": cert.fully_excluded}
    try:
        g = check_good(parse_coeffs(BPRIME_POLY, B2), *BPRIME_INTERVAL)
        res["good"] = g.as_dict()
        ok["good"] = True
    except GoodnessError as exc:
        res["good"] = {"error": type(exc).__name__, "detail": str(exc)}
        ok["good"] = False
    mrp = min_root_product(3)
    res["min_root_product_3"] = mrp
    ok["min_root_product"] = abs(mrp - 3 * math.sqrt(3) / 16) <= 1e-12
    shape = survivor_prefix_property(0.5, 0.51, depth=20, grid=100)
    res["prefix_shape"] = shape.as_dict()
    ok["prefix_shape"] = shape.holds
    res["checks"] = ok
    return _verdict(all(ok.values())), cfg, res


TRIPLE_RANGE = (0.746, 0.7465)


def triple_root(jobs: int = 1, **_) -> tuple:
    lo, hi = TRIPLE_RANGE
    cfg = {"range": [lo, hi], "mult": 3, "grid": 50, "depth": 50, "refine": 2, "max_depth": 60,
           "samples": 5}

    def go():
        cert = scan(lo, hi, 50, depth=50, mult=3, refine=2, max_depth=60, jobs=jobs, max_nodes=500_000_000)
        base = 2.0 ** (-1.0 / 3.0)
        samples = [float(x) for x in np.linspace(base, 1.0, 7)[1:-1]]
        triv = {repr(x): trivial_membership(x, 3) for x in samples}
        res = {"exclusion": _scan_doc(cert), "trivial": triv}
        return _verdict(cert.fully_excluded and all(triv.values())), cfg, res

    return _guard_scan(cfg, go)


def properties(seed: int = 0, jobs: int = 4, **_) -> tuple:
    cfg = {"seed": seed, "jobs": jobs}
    res = {
        "prune_vs_enumeration": checks.prune_vs_enumeration(200, 8, seed),
        "cover_monte_carlo": checks.cover_monte_carlo(20, 100_000, seed),
        "bound_domination": checks.bound_domination(1000, seed),
        "determinism": checks.scan_determinism(max(2, jobs)),
    }
    return _verdict(all(r["ok"] for r in res.values())), cfg, res


def long_scan(jobs: int = 1, checkpoint: Optional[str] = None, grid: int = 10_000_000, **_) -> tuple:
    """Opt-in census of ``(0.66847, 0.66936)``; cells of width ``8.9e-11`` at the default grid."""
    lo, hi = 0.66847, 0.66936
    cfg = {"range": [lo, hi], "grid": grid, "depth": 40, "max_depth": 50, "refine": 0}

    def go():
        cert = scan(lo, hi, grid, depth=40, max_depth=50, jobs=jobs, checkpoint=checkpoint)
        doc = _scan_doc(cert)
        return POSITIVE, cfg, doc

    return _guard_scan(cfg, go)


EXPERIMENTS = {
    e.name: e
    for e in [
        Experiment("gap-I1", "1", "exclude (0.668478, 0.668489) in 110 cells", gap_i1),
        Experiment("example-3-5", "2", "good tuple and double root of the degree-50 example", deg50_example),
        Experiment("alpha2-lower", "3", "exclude (0.6684, 0.6684754) on a 1e-6 grid (--full: from 0.5)",
                   alpha2_lower),
        Experiment("theta-table", "4", "good tuples for the first two table rows", theta_table),
        Experiment("cover-lemma", "5", "parallelogram covering by 243 affine images", cover_lemma),
        Experiment("eta", "6", "perturbation chain at eta = 4e-6 and the maximal eta", eta),
        Experiment("bprime", "7", "height-2 class: exclusion, goodness, root product, prefix shape", bprime),
        Experiment("triple-root", "8", "exclude (0.746, 0.7465) for triple zeros", triple_root),
        Experiment("properties", "9", "oracle and soundness suites", properties),
        Experiment("long-scan", "-", "opt-in full census scan with checkpointing", long_scan),
    ]
}
