"""Command-line front end.

Exit status: 0 certified positive, 1 certified negative or failed check,
2 inconclusive (depth or node budget exhausted), 3 usage error, 4 internal error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Optional, Sequence

from . import affine, repro
from .certificates import OUTDIR_ENV, make_document, resolve_output, write_document
from .prune import CONSTANTS, DEFAULT_MAX_NODES, ExclusionQuery, PruneAborted, prune
from .roots import (GoodnessError, HypothesisFail, LocalizationError, NotPositive,
                    check_good, localize_double_root)
from .scan import render_locus_2d, scan
from .series import FP_MODELS, CoefficientError, format_coeffs, get_coefficient_set, parse_coeffs

log = logging.getLogger("zerocert")

EXIT = {repro.POSITIVE: 0, repro.NEGATIVE: 1, repro.INCONCLUSIVE: 2}
USAGE_ERROR = 3
INTERNAL_ERROR = 4


class UsageError(Exception):
    pass


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from None
    return a, b


def _floats(n: int):
    def parse(text: str) -> list[float]:
        try:
            vals = [float(t) for t in text.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers") from None
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {len(vals)}")
        return vals
    return parse


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help=f"certificate path (relative paths go under ${OUTDIR_ENV})")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--quiet", action="store_true", help="do not echo the certificate")

    search = _Parser(add_help=False)
    search.add_argument("--range", type=_pair, required=True, metavar="A,B")
    search.add_argument("--depth", type=int, default=40)
    search.add_argument("--mult", type=int, default=2)
    search.add_argument("--set", dest="coeff_set", choices=["b1", "b2"], default="b1")
    search.add_argument("--fp-model", choices=FP_MODELS, default="horner")
    search.add_argument("--constants", choices=CONSTANTS, default="conservative")
    search.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES)

    p = _Parser(prog="zerocert", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("scan", parents=[common, search], help="exclusion scan over a grid")
    s.add_argument("--grid", type=int, required=True)
    s.add_argument("--refine", type=int, default=0, help="halvings allowed for surviving cells")
    s.add_argument("--max-depth", type=int)
    s.add_argument("--depth-step", type=int, default=5)
    s.add_argument("--checkpoint", help="checkpoint file; resumed when present")

    s = sub.add_parser("prune", parents=[common, search], help="exclusion search on one cell")
    s.add_argument("--prefix", help="initial coefficients")

    s = sub.add_parser("good-check", parents=[common], help="certify a good tuple")
    s.add_argument("--poly", required=True)
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--b", type=float, required=True)
    s.add_argument("--height", type=int)

    s = sub.add_parser("localize", parents=[common], help="localize the double root of a good tuple")
    s.add_argument("--poly", required=True)
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--b", type=float, required=True)

    s = sub.add_parser("cover-verify", parents=[common], help="covering check for the fixed parallelograms")
    s.add_argument("--depth", type=int, default=8)
    s.add_argument("--scale", type=float, default=0.95)
    s.add_argument("--family-scale", type=float, default=1.0)

    s = sub.add_parser("robustness", parents=[common], help="perturbation chain")
    s.add_argument("--eta", type=float, default=4e-6)
    s.add_argument("--search", action="store_true", help="also bisect for the largest passing eta")
    s.add_argument("--no-envelope", action="store_true")

    s = sub.add_parser("interior", parents=[common], help="locus interior test")
    s.add_argument("--kind", choices=["diag", "jordan", "rotation"], required=True)
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--gamma", type=float)
    s.add_argument("--rho", type=float)
    s.add_argument("--im", type=float)
    s.add_argument("--eta", type=float, default=affine.INTERIOR_ETA)

    s = sub.add_parser("trivial", parents=[common], help="determinant test for two linear parts")
    s.add_argument("--t1", type=_floats(4), required=True, metavar="A,B,C,D")
    s.add_argument("--t2", type=_floats(4), required=True, metavar="A,B,C,D")

    s = sub.add_parser("locus-render", parents=[common], help="classify a grid of parameter pairs")
    s.add_argument("--region", type=_floats(4), default=[0.5, 1.0, 0.5, 1.0], metavar="G0,G1,L0,L1")
    s.add_argument("--resolution", type=int, default=64)
    s.add_argument("--depth", type=int, default=16)
    s.add_argument("--set", dest="coeff_set", choices=["b1", "b2"], default="b1")
    s.add_argument("--pgm", default="locus.pgm")
    s.add_argument("--csv", default="locus.csv")

    s = sub.add_parser("repro", parents=[common], help="replay a named experiment")
    s.add_argument("name", nargs="?", choices=sorted(repro.EXPERIMENTS))
    s.add_argument("--list", action="store_true")
    s.add_argument("--checkpoint")
    s.add_argument("--full", action="store_true", help="alpha2-lower: scan from 0.5")
    s.add_argument("--grid", type=int, default=10_000_000, help="long-scan: number of cells")
    return p


# -- handlers: each returns (verdict, kind, config, result) --------------------------------

def _search_config(args) -> dict:
    lo, hi = args.range
    return {"range": [lo, hi], "depth": args.depth, "mult": args.mult, "coeff_set": args.coeff_set,
            "fp_model": args.fp_model, "constants": args.constants, "max_nodes": args.max_nodes}


def cmd_scan(args):
    lo, hi = args.range
    cert = scan(lo, hi, args.grid, args.depth, args.mult, args.coeff_set, args.fp_model, args.constants,
                args.refine, args.max_depth, args.depth_step, args.max_nodes, args.jobs,
                str(resolve_output(args.checkpoint)) if args.checkpoint else None)
    doc = cert.as_dict()
    return repro._verdict(cert.fully_excluded), "gap-certificate", doc.pop("config"), doc


def cmd_prune(args):
    lo, hi = args.range
    cs = get_coefficient_set(args.coeff_set)
    cfg = _search_config(args)
    prefix = None
    if args.prefix:
        prefix = parse_coeffs(args.prefix, cs)
        cfg["prefix"] = format_coeffs(prefix)
    q = ExclusionQuery(lo, hi, args.mult, cs, args.depth, args.fp_model, args.constants)
    res = prune(q, prefix, max_nodes=args.max_nodes)
    out = {"outcome": res.label, "depth_used": res.depth_used, "nodes": res.nodes,
           "witness": None if res.witness is None else format_coeffs(res.witness)}
    return repro._verdict(res.excluded), "prune", cfg, out


def _goodness_failure(exc: GoodnessError) -> tuple[str, dict]:
    detail = {"error": type(exc).__name__, "detail": str(exc)}
    if isinstance(exc, NotPositive) and not exc.conclusive:
        return repro.INCONCLUSIVE, detail
    return repro.NEGATIVE, detail


def cmd_good_check(args):
    P = parse_coeffs(args.poly, "b2" if args.height == 2 else "b1") if args.height else _auto_poly(args.poly)
    cfg = {"poly": format_coeffs(P), "a": args.a, "b": args.b, "height": args.height or P.height}
    try:
        g = check_good(P, args.a, args.b, args.height)
    except GoodnessError as exc:
        verdict, detail = _goodness_failure(exc)
        return verdict, "good-tuple", cfg, detail
    return repro.POSITIVE, "good-tuple", cfg, g.as_dict()


def _auto_poly(text: str):
    try:
        return parse_coeffs(text, "b1")
    except CoefficientError:
        return parse_coeffs(text, "b2")


def cmd_localize(args):
    P = _auto_poly(args.poly)
    cfg = {"poly": format_coeffs(P), "a": args.a, "b": args.b}
    try:
        g = check_good(P, args.a, args.b)
        loc = localize_double_root(g)
    except GoodnessError as exc:
        verdict, detail = _goodness_failure(exc)
        return verdict, "localization", cfg, detail
    except HypothesisFail as exc:
        return repro.NEGATIVE, "localization", cfg, {"error": type(exc).__name__, "detail": str(exc)}
    except LocalizationError as exc:
        return repro.INCONCLUSIVE, "localization", cfg, {"error": type(exc).__name__, "detail": str(exc)}
    return repro.POSITIVE, "localization", cfg, {"good": g.as_dict(), "localization": loc.as_dict()}


def cmd_cover_verify(args):
    cfg = {"depth": args.depth, "scale": args.scale, "family_scale": args.family_scale}
    cert = affine.verify_covering_lemma(args.depth, args.scale, args.family_scale)
    ok = cert.covered and cert.extras["point_in_V"]
    # an uncovered piece at full depth is only a budget failure
    verdict = repro.POSITIVE if ok else (repro.NEGATIVE if cert.covered else repro.INCONCLUSIVE)
    return verdict, "cover-certificate", cfg, cert.as_dict()


def cmd_robustness(args):
    env = None if args.no_envelope else 1.5
    cfg = {"eta": args.eta, "search": args.search, "envelope": env}
    try:
        chain = affine.robustness_eta(eta=args.eta, envelope=env)
    except affine.ChainBreak as exc:
        return repro.NEGATIVE, "robustness-chain", cfg, {"chain_break": exc.stage, "value": exc.value}
    res = {"chain": chain.as_dict()}
    if args.search:
        res["max_eta"] = affine.max_eta(envelope=env)
    return repro._verdict(chain.verdict), "robustness-chain", cfg, res


def cmd_interior(args):
    need = {"diag": ("gamma", "lam"), "jordan": ("lam",), "rotation": ("rho", "im")}[args.kind]
    missing = [n for n in need if getattr(args, n) is None]
    if missing:
        raise UsageError(f"interior --kind {args.kind} needs " + ", ".join("--" + ("lambda" if m == "lam" else m)
                                                                          for m in missing))
    params = [getattr(args, n) for n in need]
    cfg = {"kind": args.kind, "params": params, "eta": args.eta}
    try:
        ok = affine.locus_interior_test(args.kind, params, args.eta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    m = affine.interior_matrix(args.kind, params)
    return repro._verdict(ok), "interior", cfg, {"inside": ok, "distance": affine.op_norm(m - affine.LEMMA_T)}


def cmd_trivial(args):
    cfg = {"t1": args.t1, "t2": args.t2}
    try:
        ok = affine.trivial_connected(args.t1, args.t2)
    except affine.NotContractive as exc:
        raise UsageError(str(exc)) from None
    return repro._verdict(ok), "trivial", cfg, {"connected": ok}


def cmd_locus_render(args):
    cfg = {"region": args.region, "resolution": args.resolution, "depth": args.depth, "coeff_set": args.coeff_set}
    grid = render_locus_2d(args.region, args.resolution, args.depth, args.coeff_set)
    pgm, csv = resolve_output(args.pgm), resolve_output(args.csv)
    for path, text in ((pgm, grid.to_pgm()), (csv, grid.to_csv())):
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    counts = {lab: int((grid.labels == code).sum()) for code, lab in enumerate(("excluded", "unknown", "trivial"))}
    return repro.POSITIVE, "locus-grid", cfg, {"counts": counts, "pgm": args.pgm, "csv": args.csv}


def cmd_repro(args):
    if args.list or not args.name:
        for name, e in sorted(repro.EXPERIMENTS.items()):
            print(f"{name:14s} criterion {e.criterion:2s} {e.summary}")
        if not args.name:
            return None
    exp = repro.EXPERIMENTS[args.name]
    ckpt = str(resolve_output(args.checkpoint)) if args.checkpoint else None
    verdict, cfg, res = exp.run(jobs=args.jobs, seed=args.seed, checkpoint=ckpt, full=args.full, grid=args.grid)
    cfg = dict(cfg, experiment=exp.name)
    return verdict, "repro", cfg, res


HANDLERS = {
    "scan": cmd_scan, "prune": cmd_prune, "good-check": cmd_good_check, "localize": cmd_localize,
    "cover-verify": cmd_cover_verify, "robustness": cmd_robustness, "interior": cmd_interior,
    "trivial": cmd_trivial, "locus-render": cmd_locus_render, "repro": cmd_repro,
}


def run(argv: Optional[Sequence[str]] = None) -> tuple[int, Optional[dict]]:
    """Run one job; returns the exit status and the certificate document (if any)."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return USAGE_ERROR, None
    except SystemExit as exc:  # --help
        return int(exc.code or 0), None
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(message)s")
    try:
        out = HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"zerocert {args.command}: {exc}", file=sys.stderr)
        return USAGE_ERROR, None
    except PruneAborted as exc:
        print(f"zerocert {args.command}: inconclusive, {exc} (cell {exc.cell_index})", file=sys.stderr)
        return EXIT[repro.INCONCLUSIVE], None
    except (ValueError, CoefficientError) as exc:
        print(f"zerocert {args.command}: {exc}", file=sys.stderr)
        return USAGE_ERROR, None
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"zerocert {args.command}: internal error: {exc}", file=sys.stderr)
        return INTERNAL_ERROR, None
    if out is None:
        return 0, None
    verdict, kind, cfg, result = out
    cfg = dict(cfg, command=args.command)
    doc = make_document(kind, cfg, result, verdict)
    text = write_document(doc, resolve_output(args.out))
    if not args.quiet:
        sys.stdout.write(text)
    return EXIT[verdict], doc


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
