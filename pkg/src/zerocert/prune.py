"""Exclusion search over prefix trees of a coefficient class.

If a class member ``f`` with initial part ``P`` (degree ``n``) has a zero of
multiplicity ``k`` at ``r`` in ``(a, b)``, then for every ``i < k``

    |P^(i)(b)| <= tail_sup(i, n, b, h) + (b - a) * deriv_sup(i + 1, b, h).

A cell ``(a, b)`` is excluded when every branch of the prefix tree violates
one of these inequalities at some depth.  Floating-point error is absorbed by
an explicit slack term, so an ``Excluded`` outcome is a proof.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .series import (
    B1,
    FLAT_SLACK,
    FP_MODELS,
    CoefficientSet,
    SignedPolynomial,
    deriv_sup,
    deriv_sup_legacy,
    eval_poly,
    falling_factorial,
    gamma,
    get_coefficient_set,
    round_up,
    tail_sup,
)

log = logging.getLogger(__name__)

CONSTANTS = ("conservative", "legacy")
DEFAULT_MAX_NODES = 50_000_000
_PAD = 1.0 + 2.0 ** -50


class PruneAborted(RuntimeError):
    """A resource cap was hit before the search could decide the cell."""

    def __init__(self, message, cell_index=None, nodes=0):
        super().__init__(message)
        self.cell_index = cell_index
        self.nodes = nodes


@dataclass(frozen=True)
class ExclusionQuery:
    a: float
    b: float
    mult: int = 2
    coeff_set: CoefficientSet = B1
    depth: int = 40
    fp_model: str = "horner"
    constants: str = "conservative"

    def __post_init__(self):
        if not 0.0 < self.a < self.b < 1.0:
            raise ValueError(f"need 0 < a < b < 1, got ({self.a}, {self.b})")
        if self.mult < 1:
            raise ValueError("multiplicity must be >= 1")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if self.fp_model not in FP_MODELS:
            raise ValueError(f"unknown fp model {self.fp_model!r}")
        if self.constants not in CONSTANTS:
            raise ValueError(f"unknown constants {self.constants!r}")
        object.__setattr__(self, "coeff_set", get_coefficient_set(self.coeff_set))


@dataclass(frozen=True)
class PruneOutcome:
    excluded: bool
    witness: Optional[SignedPolynomial] = None
    depth_used: int = 0
    nodes: int = 0

    @property
    def label(self) -> str:
        return "excluded" if self.excluded else "survivor"


def _width_constant(i: int, b: float, h: int, constants: str) -> float:
    if constants == "legacy":
        return deriv_sup_legacy(i, b, h)
    return deriv_sup(i, b, h)


def _tail(i: int, n: int, b: float, h: int, constants: str) -> float:
    # the original search used x^n/(1-x) derivatives for orders >= 2
    loose = constants == "legacy" and i >= 2
    return tail_sup(i, n, b, h, loose=loose)


def exclusion_tests(P: SignedPolynomial, a: float, b: float, mult: int = 2,
                    coeff_set: CoefficientSet | str | None = None,
                    fp_model: str = "horner", constants: str = "conservative") -> bool:
    """Return True (pass) if ``P`` is compatible with a multiplicity-``mult`` zero in ``(a, b)``.

    False certifies that no class member extending ``P`` has such a zero.
    Evaluates with Horner's scheme and its forward-error bound.
    """
    cs = get_coefficient_set(coeff_set) if coeff_set is not None else P.coeff_set
    h = cs.height
    n = P.degree
    width = round_up(b - a)
    for i in range(mult):
        ev = eval_poly(P, i, b, fp_model)
        rhs = _tail(i, n, b, h, constants) + width * _width_constant(i + 1, b, h, constants)
        if abs(ev.value) > round_up(rhs + ev.fp_slack, ulps=4):
            return False
    return True


class _Checks:
    """Per-node inequalities ``|sum_m c_m * terms[j, m]| <= rhs[j, n] + slack_j(n)``.

    One row ``j`` per (point, derivative order) pair.  Values are accumulated
    incrementally along the tree; the rounding of that recursive sum is bounded
    by ``gamma(2n + 4)`` times the running sum of absolute terms.
    """

    def __init__(self, points: Sequence[float], orders: Sequence[int], widths: Sequence[float],
                 h: int, max_degree: int, fp_model: str, constants: str):
        J = len(points)
        N = max_degree + 1
        self.fp_model = fp_model
        self.terms = np.zeros((J, N))
        self.rhs = np.zeros((J, N))
        self.flat = np.zeros((J, N))
        for j, (x, i, w) in enumerate(zip(points, orders, widths)):
            pw = [1.0] * (N + 1)
            for m in range(1, N + 1):
                pw[m] = pw[m - 1] * x
            row_terms = np.zeros(N + 1)
            for m in range(i, N + 1):
                row_terms[m] = falling_factorial(m, i) * pw[m - i]
            self.terms[j] = row_terms[:N]
            width_term = round_up(w * _width_constant(i + 1, x, h, constants)) if w > 0 else 0.0
            # tails by backward accumulation from a directly summed far tail
            loose = constants == "legacy" and i >= 2
            shift = 1 if loose else 0
            tail = tail_sup(i, N - shift, x, h)
            tails = np.zeros(N)
            for n in range(N - 1, -1, -1):
                # add the (n+1)-th term (or n-th for the loose form), rounded up
                m = n + 1 - shift
                t = row_terms[m] * h
                if t:
                    t = round_up(t * (1.0 + gamma(m + 2)))
                    tail = round_up(tail + t)
                tails[n] = tail
            self.rhs[j] = [round_up(t + width_term) * _PAD for t in tails]
            self.flat[j] = [round_up(FLAT_SLACK * x ** n) for n in range(N)]
        self.gfac = np.array([gamma(2 * n + 4) * (1.0 + gamma(2 * n + 4)) * _PAD for n in range(N)])

    def passes(self, vals: np.ndarray, sabs: np.ndarray, n: int) -> np.ndarray:
        if self.fp_model == "flat14":
            bound = self.rhs[:, n] + self.flat[:, n]
        else:
            bound = self.rhs[:, n] + self.gfac[n] * sabs
        return np.all(np.abs(vals) <= bound, axis=-1)

    def start(self, coeffs: Sequence[int]):
        c = np.asarray(coeffs, dtype=float)
        n = len(coeffs) - 1
        vals = self.terms[:, : n + 1] @ c
        sabs = self.terms[:, : n + 1] @ np.abs(c)
        return vals[None, :], sabs[None, :]


class _TreeSearch:
    def __init__(self, checks: _Checks, allowed: Sequence[int], max_nodes: int, chunk: int):
        self.checks = checks
        self.allowed = np.asarray(allowed, dtype=float)
        self.abs_allowed = np.abs(self.allowed)
        self.max_nodes = max_nodes
        self.chunk = chunk
        self.nodes = 0
        self.deepest = 0

    def run(self, prefix: Sequence[int], depth: int):
        n0 = len(prefix) - 1
        vals, sabs = self.checks.start(prefix)
        self.nodes = 1
        if not self.checks.passes(vals, sabs, n0)[0]:
            return None
        path = np.zeros((1, depth), dtype=np.int8)
        return self._expand(vals, sabs, path, n0, 0, depth)

    def _expand(self, vals, sabs, path, n0, level, depth):
        if level == depth:
            return path[0]
        m = n0 + level + 1
        C = len(self.allowed)
        t = self.checks.terms[:, m]
        cv = (vals[:, None, :] + self.allowed[None, :, None] * t[None, None, :]).reshape(-1, vals.shape[1])
        cs = (sabs[:, None, :] + self.abs_allowed[None, :, None] * t[None, None, :]).reshape(-1, vals.shape[1])
        self.nodes += cv.shape[0]
        if self.nodes > self.max_nodes:
            raise PruneAborted(f"node budget {self.max_nodes} exhausted", nodes=self.nodes)
        ok = self.checks.passes(cv, cs, m)
        if not ok.any():
            return None
        self.deepest = max(self.deepest, level + 1)
        idx = np.nonzero(ok)[0]
        parent = idx // C
        newpath = path[parent]
        newpath[:, level] = self.allowed[idx % C].astype(np.int8)
        cv, cs = cv[idx], cs[idx]
        for s in range(0, len(idx), self.chunk):
            found = self._expand(cv[s:s + self.chunk], cs[s:s + self.chunk],
                                 newpath[s:s + self.chunk], n0, level + 1, depth)
            if found is not None:
                return found
        return None


def prune(query: ExclusionQuery, prefix: SignedPolynomial | Sequence[int] | None = None,
          max_nodes: int = DEFAULT_MAX_NODES, chunk: int = 1 << 16) -> PruneOutcome:
    """Search the prefix tree below ``prefix`` down to ``query.depth`` extra coefficients.

    Branches are explored in ascending coefficient order, so a survivor witness is
    the lexicographically first surviving prefix of full depth.  Hitting
    ``max_nodes`` raises :class:`PruneAborted`; it never yields ``Excluded``.
    """
    cs = query.coeff_set
    if prefix is None:
        prefix = (1,)
    coeffs = prefix.coeffs if isinstance(prefix, SignedPolynomial) else tuple(prefix)
    SignedPolynomial(coeffs, cs)  # validates membership
    n0 = len(coeffs) - 1
    checks = _Checks([query.b] * query.mult, range(query.mult), [query.b - query.a] * query.mult,
                     cs.height, n0 + query.depth, query.fp_model, query.constants)
    search = _TreeSearch(checks, cs.allowed, max_nodes, chunk)
    found = search.run(coeffs, query.depth)
    if found is None:
        return PruneOutcome(True, None, search.deepest, search.nodes)
    witness = SignedPolynomial(coeffs + tuple(int(c) for c in found), cs)
    return PruneOutcome(False, witness, query.depth, search.nodes)


def point_search(points: Sequence[float], depth: int, coeff_set: CoefficientSet | str = B1,
                 fp_model: str = "horner", max_nodes: int = DEFAULT_MAX_NODES) -> PruneOutcome:
    """Search for a prefix compatible with a common simple zero at every point in ``points``.

    ``excluded=True`` certifies that no class member vanishes at all points at once.
    """
    cs = get_coefficient_set(coeff_set)
    checks = _Checks(list(points), [0] * len(points), [0.0] * len(points), cs.height, depth,
                     fp_model, "conservative")
    search = _TreeSearch(checks, cs.allowed, max_nodes, 1 << 16)
    found = search.run((1,), depth)
    if found is None:
        return PruneOutcome(True, None, search.deepest, search.nodes)
    return PruneOutcome(False, SignedPolynomial((1,) + tuple(int(c) for c in found), cs), depth, search.nodes)
