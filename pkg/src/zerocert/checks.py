"""Independent oracles for the property suites.

Each function draws its own random instances from a seeded generator and
returns a small report dict with an ``ok`` flag.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .affine import Parallelogram, cover_check
from .prune import ExclusionQuery, exclusion_tests, prune
from .scan import scan
from .series import B1, SignedPolynomial, deriv_sup, falling_factorial, get_coefficient_set, tail_sup
from .certificates import dump_document


def exhaustive_survivor(a: float, b: float, depth: int, mult: int = 2, coeff_set=B1) -> bool:
    """Depth-first enumeration with the standalone Horner test at every node."""
    cs = get_coefficient_set(coeff_set)

    def rec(coeffs):
        if not exclusion_tests(SignedPolynomial(coeffs, cs), a, b, mult):
            return False
        if len(coeffs) == depth + 1:
            return True
        return any(rec(coeffs + (c,)) for c in cs.allowed)

    return rec((1,))


def prune_vs_enumeration(n: int = 200, max_depth: int = 8, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    mismatches = []
    for _ in range(n):
        a = float(rng.uniform(0.45, 0.95))
        w = float(10 ** rng.uniform(-6, -2))
        b = min(a + w, 0.999)
        depth = int(rng.integers(1, max_depth + 1))
        mult = int(rng.integers(1, 3))
        got = not prune(ExclusionQuery(a, b, mult, B1, depth)).excluded
        want = exhaustive_survivor(a, b, depth, mult)
        if got != want:
            mismatches.append((a, b, depth, mult, got, want))
    return {"ok": not mismatches, "cases": n, "mismatches": mismatches}


def _exact_tail(i: int, m: int, b: Fraction, h: int, terms: int) -> Fraction:
    total = Fraction(0)
    p = b ** (m + 1 - i)
    for k in range(m + 1, m + 1 + terms):
        total += falling_factorial(k, i) * p
        p *= b
    return h * total


def bound_domination(n: int = 1000, seed: int = 0) -> dict:
    """Check ``tail_sup`` and ``deriv_sup`` against exact partial sums and random worst-case tails.

    A random prefix is extended by a random tail of 60 further coefficients; the
    actual derivative of the extension must stay within the two bounds.
    """
    rng = np.random.default_rng(seed)
    bad = []
    for _ in range(n):
        h = int(rng.integers(1, 3))
        m = int(rng.integers(0, 40))
        i = int(rng.integers(0, 3))
        b = float(rng.uniform(0.3, 0.8))
        fb = Fraction(b)
        terms = 60
        partial = _exact_tail(i, m, fb, h, terms)
        if Fraction(tail_sup(i, m, b, h)) < partial:
            bad.append(("tail", i, m, b, h))
        # actual tail of a random extension, evaluated exactly
        tail = rng.integers(-h, h + 1, size=terms)
        val = Fraction(0)
        for k, c in enumerate(tail, start=m + 1):
            if c and k >= i:
                val += int(c) * falling_factorial(k, i) * fb ** (k - i)
        if Fraction(tail_sup(i, m, b, h)) < abs(val):
            bad.append(("tail-random", i, m, b, h))
        # derivative bound on the whole class at b
        coeffs = [1] + [int(c) for c in rng.integers(-h, h + 1, size=m + terms)]
        deriv = sum(c * falling_factorial(k, i) * fb ** (k - i) for k, c in enumerate(coeffs) if k >= i and c)
        if Fraction(deriv_sup(i, b, h)) < abs(deriv):
            bad.append(("deriv", i, m, b, h))
    return {"ok": not bad, "cases": n, "failures": bad}


def cover_monte_carlo(instances: int = 20, points: int = 100_000, seed: int = 0, depth: int = 5) -> dict:
    """Random targets and families; whenever ``cover_check`` says covered, sample the target."""
    rng = np.random.default_rng(seed)
    covered = 0
    failures = []
    tried = 0
    while covered < instances and tried < 50 * instances:
        tried += 1
        M = rng.normal(size=(2, 2))
        if abs(np.linalg.det(M)) < 0.2:
            continue
        target = Parallelogram(M, 1.0)
        k = int(rng.integers(3, 9))
        fam = []
        for _ in range(k):
            A = rng.normal(size=(2, 2)) * 0.8
            if abs(np.linalg.det(A)) < 0.1:
                A = np.eye(2) * 0.8
            fam.append(Parallelogram(A, float(rng.uniform(0.6, 1.4)), rng.uniform(-1.0, 1.0, size=2)))
        fam.append(Parallelogram(M, float(rng.uniform(0.3, 0.9)), rng.uniform(-0.3, 0.3, size=2)))
        cert = cover_check(target, fam, depth)
        if not cert.covered:
            continue
        covered += 1
        pts = target.sample(points, rng)
        hit = np.zeros(len(pts), dtype=bool)
        for f in fam:
            hit |= f.contains(pts)
        if not hit.all():
            failures.append(int((~hit).sum()))
    return {"ok": covered == instances and not failures, "instances": covered, "points": points,
            "failures": failures}


def scan_determinism(jobs: int = 4) -> dict:
    kw = dict(lo=0.6684, hi=0.66842, grid=20, depth=30, refine=1, max_depth=35)
    one = dump_document(scan(jobs=1, **kw).as_dict())
    many = dump_document(scan(jobs=jobs, **kw).as_dict())
    return {"ok": one == many, "jobs": jobs, "bytes": len(one)}
