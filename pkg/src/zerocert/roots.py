"""Existence and localization of multiple roots from good tuples.

A tuple ``(P, n, a, b)`` of height ``h`` is *good* when

* ``P(a) > h a^(n+1)/(1-a)`` and ``P(b) > h b^(n+1)/(1-b)``,
* ``P > 0`` on ``[a, b]``,
* ``P(x) < h x^(n+1)/(1-x)`` for some ``x`` in ``(a, b)``.

Then some class member with initial part ``P`` has a double zero in ``(a, b)``;
repeatedly subtracting ``h x^m`` keeps the tuple good and builds that member.
All conditions are decided with certified signs: floating point with a
forward-error bound first, exact rational arithmetic when that is inconclusive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .series import (
    B1,
    SignedPolynomial,
    abs_sum,
    as_polynomial,
    falling_factorial,
    gamma,
    round_down,
    round_up,
)

MAX_BISECTION_DEPTH = 60


class GoodnessError(ValueError):
    """A goodness condition could not be certified."""

    condition = "good"


class EndpointFail(GoodnessError):
    condition = "endpoint"

    def __init__(self, side: str, ratio: float):
        super().__init__(f"endpoint condition fails at {side} (ratio {ratio:.6g} <= 1)")
        self.side = side
        self.ratio = ratio


class NotPositive(GoodnessError):
    condition = "positivity"

    def __init__(self, x: float, conclusive: bool):
        what = "P(x) <= 0" if conclusive else "positivity could not be certified"
        super().__init__(f"{what} near x = {x!r}")
        self.x = x
        self.conclusive = conclusive


class NoDipWitness(GoodnessError):
    condition = "dip"

    def __init__(self, best_x: float, best_ratio: float):
        super().__init__(f"no certified dip witness; best ratio {best_ratio:.6g} at x = {best_x!r}")
        self.best_x = best_x
        self.best_ratio = best_ratio


class LocalizationError(ValueError):
    pass


class HypothesisFail(LocalizationError):
    pass


class NoSignChange(LocalizationError):
    pass


class NonPositiveC2(LocalizationError):
    pass


# -- certified evaluation of integer polynomials ---------------------------------

def _poly_float(coeffs: Sequence[int], x: float) -> tuple[float, float]:
    """Horner value and forward-error bound for an integer coefficient list."""
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    m = len(coeffs) - 1
    if m <= 0:
        return acc, 0.0
    slack = round_up(gamma(2 * m + 1) * abs_sum(coeffs, x))
    return acc, slack


def _poly_exact(coeffs: Sequence[int], x) -> Fraction:
    xq = Fraction(x)
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * xq + c
    return acc


def _abs_sum_exact(coeffs: Sequence[int], x) -> Fraction:
    return _poly_exact([abs(c) for c in coeffs], x)


def _derive(coeffs: Sequence[int], i: int = 1) -> list[int]:
    return [c * falling_factorial(k, i) for k, c in enumerate(coeffs) if k >= i] or [0]


def certified_sign(coeffs: Sequence[int], x: float) -> int:
    """Sign of the exact value of the integer polynomial at the float ``x``."""
    v, s = _poly_float(coeffs, x)
    if v - s > 0:
        return 1
    if v + s < 0:
        return -1
    e = _poly_exact(coeffs, x)
    return (e > 0) - (e < 0)


def _lower_bound_on(coeffs, d1, d2, u: float, v: float) -> tuple[float, float]:
    """Certified lower bound of the polynomial on ``[u, v]`` and the midpoint used.

    Takes the better of the Lipschitz bound ``p(u) - sup|p'| (v-u)`` and the
    second-order bound ``p(m) - |p'(m)| r - sup|p''| r^2 / 2``.  Falls back to
    exact arithmetic when rounding error swamps the float bound.
    """
    m = 0.5 * (u + v)
    r = max(m - u, v - m)
    pu, su = _poly_float(coeffs, u)
    pm, sm = _poly_float(coeffs, m)
    dm, sdm = _poly_float(d1, m)
    L = abs_sum(d1, v)
    M2 = abs_sum(d2, v)
    lip = round_down(round_down(pu - su) - round_up(L * (v - u)))
    tay = round_down(round_down(pm - sm) - round_up((abs(dm) + sdm) * r) - round_up(0.5 * M2 * r * r))
    best = max(lip, tay)
    if best > 0 or (su < abs(pu) * 1e-3 and sm < abs(pm) * 1e-3):
        return best, m
    # rounding error dominates: redo the second-order bound exactly
    mq, rq = Fraction(m), Fraction(r)
    exact = (_poly_exact(coeffs, mq) - abs(_poly_exact(d1, mq)) * rq
             - _abs_sum_exact(d2, v) * rq * rq / 2)
    lip_exact = _poly_exact(coeffs, u) - _abs_sum_exact(d1, v) * Fraction(v - u)
    best_exact = max(exact, lip_exact)
    return round_down(float(best_exact)) if best_exact > 0 else min(float(best_exact), 0.0), m


def certify_positive(coeffs: Sequence[int], a: float, b: float,
                     max_depth: int = MAX_BISECTION_DEPTH) -> float:
    """Prove ``p > 0`` on ``[a, b]`` by adaptive bisection; return a positive lower bound.

    Raises :class:`NotPositive` with ``conclusive=True`` when a point with
    ``p <= 0`` is found, and ``conclusive=False`` when the depth cap is hit.
    """
    d1 = _derive(coeffs, 1)
    d2 = _derive(coeffs, 2)
    lowest = math.inf
    stack = [(a, b, 0)]
    while stack:
        u, v, depth = stack.pop()
        lo, m = _lower_bound_on(coeffs, d1, d2, u, v)
        if lo > 0:
            lowest = min(lowest, lo)
            continue
        for x in (u, m, v):
            if certified_sign(coeffs, x) <= 0:
                raise NotPositive(x, conclusive=True)
        if depth >= max_depth or not u < m < v:
            raise NotPositive(m, conclusive=False)
        stack.append((m, v, depth + 1))
        stack.append((u, m, depth + 1))
    return lowest


def certified_min(coeffs: Sequence[int], a: float, b: float, rel: float = 1e-3,
                  max_depth: int = 40) -> float:
    """Certified lower bound for ``min p`` on ``[a, b]``, tight to roughly ``rel``."""
    d1 = _derive(coeffs, 1)
    d2 = _derive(coeffs, 2)
    lowest = math.inf
    stack = [(a, b, 0)]
    while stack:
        u, v, depth = stack.pop()
        lo, m = _lower_bound_on(coeffs, d1, d2, u, v)
        pm = _poly_float(coeffs, m)[0]
        if depth >= max_depth or lo >= pm - rel * abs(pm):
            lowest = min(lowest, lo)
            continue
        stack.append((m, v, depth + 1))
        stack.append((u, m, depth + 1))
    return lowest


# -- good tuples ----------------------------------------------------------------

def _gap_poly(P: SignedPolynomial, h: int) -> list[int]:
    """Integer coefficients of ``P(x)(1-x) - h x^(n+1)``; its sign is that of
    ``P(x) - h x^(n+1)/(1-x)`` on ``(0, 1)``."""
    c = list(P.coeffs) + [0]
    out = [c[0]] + [c[k] - c[k - 1] for k in range(1, len(c))]
    out[-1] -= h
    return out


def dip_ratio(P: SignedPolynomial, x: float, h: Optional[int] = None) -> float:
    """``P(x)(1-x) / (h x^(n+1))``; below 1 exactly where the dip condition holds."""
    h = P.height if h is None else h
    xq = Fraction(x)
    return float(P.exact(xq) * (1 - xq) / (h * xq ** (P.degree + 1)))


@dataclass(frozen=True)
class GoodTuple:
    P: SignedPolynomial
    a: float
    b: float
    h: int
    witness_x: float
    positivity_margin: float
    ratio_a: float
    ratio_b: float
    ratio_witness: float

    @property
    def n(self) -> int:
        return self.P.degree

    def as_dict(self) -> dict:
        from .series import format_coeffs
        return {
            "poly": format_coeffs(self.P),
            "n": self.n,
            "a": self.a,
            "b": self.b,
            "height": self.h,
            "witness_x": self.witness_x,
            "positivity_margin": self.positivity_margin,
            "ratio_a": self.ratio_a,
            "ratio_b": self.ratio_b,
            "ratio_witness": self.ratio_witness,
        }


def _grid_minimizer(P: SignedPolynomial, a: float, b: float, h: int, points: int = 10_000) -> float:
    coeffs = np.array(P.coeffs, dtype=float)[::-1]
    n = P.degree
    xs = np.linspace(a, b, points + 2)[1:-1]
    g = np.polyval(coeffs, xs) * (1 - xs) / (h * xs ** (n + 1))
    k = int(np.argmin(g))
    lo = xs[max(k - 1, 0)]
    hi = xs[min(k + 1, len(xs) - 1)]
    if hi <= lo:
        return float(xs[k])
    res = minimize_scalar(lambda x: np.polyval(coeffs, x) * (1 - x) / (h * x ** (n + 1)),
                          bounds=(lo, hi), method="bounded", options={"xatol": 1e-15})
    return float(res.x) if a < res.x < b else float(xs[k])


def check_good(P, a: float, b: float, h: Optional[int] = None,
               witness_hint: Sequence[float] = ()) -> GoodTuple:
    """Verify the four goodness conditions for ``(P, deg P, a, b)`` rigorously.

    Raises a :class:`GoodnessError` subclass naming the failed condition.
    """
    P = as_polynomial(P)
    h = P.height if h is None else int(h)
    if not 0.5 < a < b < 1.0:
        raise ValueError(f"need 0.5 < a < b < 1, got ({a}, {b})")
    F = _gap_poly(P, h)
    for side, x in (("a", a), ("b", b)):
        if certified_sign(F, x) <= 0:
            raise EndpointFail(side, dip_ratio(P, x, h))
    margin = certify_positive(list(P.coeffs), a, b)

    candidates = [x for x in witness_hint if a < x < b]
    candidates.append(_grid_minimizer(P, a, b, h))
    for x in candidates:
        if certified_sign(F, x) < 0:
            return GoodTuple(P, a, b, h, x, margin, dip_ratio(P, a, h), dip_ratio(P, b, h), dip_ratio(P, x, h))
    best = min(candidates, key=lambda x: dip_ratio(P, x, h))
    raise NoDipWitness(best, dip_ratio(P, best, h))


def _critical_point(coeffs: Sequence[int], a: float, b: float, guess: float) -> float:
    """Newton iteration on ``p'`` from ``guess``, kept inside ``[a, b]``."""
    d1 = _derive(coeffs, 1)
    d2 = _derive(coeffs, 2)
    x = guess
    for _ in range(60):
        f1 = _poly_float(d1, x)[0]
        f2 = _poly_float(d2, x)[0]
        if f2 == 0:
            break
        nx = min(max(x - f1 / f2, a), b)
        if nx == x:
            break
        x = nx
    return x


def extend_step(g: GoodTuple, max_extra: int = 200) -> GoodTuple:
    """Subtract ``h x^m`` for the least ``m > n`` keeping the prefix positive on ``[a, b]``.

    The dip witness is carried over constructively: the old witness when
    ``m = n + 1``, otherwise the certified non-positive point of ``P - h x^(m-1)``.
    """
    P, a, b, h = g.P, g.a, g.b, g.h
    base = list(P.coeffs)
    n = P.degree
    hint = [g.witness_x]
    y = _critical_point(base, a, b, g.witness_x)
    for m in range(n + 1, n + 1 + max_extra):
        q = base + [0] * (m - n)
        q[m] -= h
        # quick refutation at the approximate minimizer and the current witness
        bad = [x for x in dict.fromkeys([_critical_point(q, a, b, y)] + hint)
               if a <= x <= b and certified_sign(q, x) <= 0]
        if bad:
            hint = [bad[0]]
            continue
        try:
            certify_positive(q, a, b)
        except NotPositive as exc:
            # an undecided point still has q(x) near 0, hence a dip once x^m is subtracted
            if a < exc.x < b:
                hint = [exc.x]
            continue
        Q = SignedPolynomial(tuple(q), P.coeff_set)
        return check_good(Q, a, b, h, witness_hint=hint + [_critical_point(q, a, b, y)])
    raise GoodnessError(f"no admissible exponent within {max_extra} steps")


def _ratio_float(P: SignedPolynomial, xs, h: int):
    coeffs = np.array(P.coeffs, dtype=float)[::-1]
    xs = np.asarray(xs, dtype=float)
    return np.polyval(coeffs, xs) * (1 - xs) / (h * xs ** (P.degree + 1))


def _local_min(P: SignedPolynomial, lo: float, hi: float, h: int) -> tuple[float, float]:
    xs = np.linspace(lo, hi, 2001)
    g = _ratio_float(P, xs, h)
    k = int(np.argmin(g))
    u, v = xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)]
    res = minimize_scalar(lambda x: float(_ratio_float(P, x, h)), bounds=(u, v), method="bounded",
                          options={"xatol": 1e-15})
    y = float(res.x)
    return y, float(_ratio_float(P, y, h))


def _crossing(P: SignedPolynomial, inside: float, outside: float, h: int) -> float:
    """Bisect for the point between ``inside`` (ratio < 1) and ``outside`` (ratio > 1)."""
    for _ in range(200):
        mid = 0.5 * (inside + outside)
        if mid in (inside, outside):
            break
        if _ratio_float(P, mid, h) < 1:
            inside = mid
        else:
            outside = mid
    return outside


def find_good_interval(P, center: float, span: float = 2e-5, h: Optional[int] = None) -> GoodTuple:
    """Search ``[center - span, center + span]`` for ``(a, b)`` making ``P`` good, then certify it.

    The dip of ``P(x)(1-x)/(h x^(n+1))`` must already lie in ``(0, 1)``.
    """
    P = as_polynomial(P)
    h = P.height if h is None else int(h)
    y, mu = _local_min(P, center - span, center + span, h)
    if not 0 < mu < 1:
        raise NoDipWitness(y, mu)
    ends = []
    for direction in (-1.0, 1.0):
        step = 1e-9
        while step < 4 * span and _ratio_float(P, y + direction * step, h) < 1:
            step *= 2
        if _ratio_float(P, y + direction * step, h) < 1:
            raise EndpointFail("a" if direction < 0 else "b", float(_ratio_float(P, y + direction * step, h)))
        cross = _crossing(P, y, y + direction * step, h)
        # leave some room beyond the crossing so the endpoint inequality is not marginal
        ends.append(cross + direction * 0.05 * abs(cross - y))
    return check_good(P, ends[0], ends[1], h, witness_hint=[y])


def pad_prefix(P, center: float, span: float = 2e-5, h: Optional[int] = None,
               target: float = 0.5, max_pad: int = 40) -> SignedPolynomial:
    """Append coefficients until the dip ratio near ``center`` lands inside ``(0, 1)``.

    Each step picks the allowed coefficient whose new minimum ratio is closest to
    ``target``.  Only a search aid: the result is certified by :func:`check_good`.
    """
    P = as_polynomial(P)
    h = P.height if h is None else int(h)
    for _ in range(max_pad + 1):
        _, mu = _local_min(P, center - span, center + span, h)
        if 0 < mu < 1:
            return P
        options = []
        for c in P.coeff_set:
            Q = P.extend(c)
            options.append((abs(_local_min(Q, center - span, center + span, h)[1] - target), c, Q))
        P = min(options, key=lambda t: (t[0], t[1]))[2]
    raise NoDipWitness(center, mu)


# -- localization -----------------------------------------------------------------

@dataclass(frozen=True)
class RootLocalization:
    y: float
    y_lo: float
    y_hi: float
    c2: float
    eta: float
    lo: float
    hi: float

    @property
    def interval(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def as_dict(self) -> dict:
        return {"y": self.y, "y_bracket": [self.y_lo, self.y_hi], "c2": self.c2,
                "eta": self.eta, "interval": [self.lo, self.hi]}


def localization_radius(n: int, b: float, c2: float) -> float:
    """``(1 + (1-b)(n+1)) b^(n+1) / (C'' (1-b)^2)``, rounded upward."""
    bq = Fraction(b)
    val = (1 + (1 - bq) * (n + 1)) * bq ** (n + 1) / (Fraction(c2) * (1 - bq) ** 2)
    return round_up(float(val))


def localize_double_root(g: GoodTuple, bracket: float = 1e-9) -> RootLocalization:
    """Pin the double root promised by a good tuple to ``(y - eta, y + eta)``.

    ``y`` is a certified zero of ``P'`` (sign change across ``y_lo < y_hi``) and
    ``C''`` a certified lower bound of ``P''`` on ``[a, b]``.
    """
    P, a, b = g.P, g.a, g.b
    if g.h != 1:
        raise HypothesisFail("localization is only established for coefficients in {-1, 0, 1}")
    if b > 0.68:
        raise HypothesisFail(f"b = {b} exceeds 0.68")
    if P.degree <= 10:
        raise HypothesisFail(f"degree {P.degree} must exceed 10")
    coeffs = list(P.coeffs)
    d1 = _derive(coeffs, 1)
    r = _critical_point(coeffs, a, b, g.witness_x)
    delta = bracket
    while True:
        lo, hi = max(r - delta, a), min(r + delta, b)
        if certified_sign(d1, lo) < 0 < certified_sign(d1, hi):
            break
        if lo <= a and hi >= b:
            raise NoSignChange(f"P' has no certified sign change in [{a}, {b}]")
        delta *= 4
    c2 = certified_min(_derive(coeffs, 2), a, b)
    if not c2 > 0:
        raise NonPositiveC2(f"P'' lower bound {c2} on [{a}, {b}] is not positive")
    eta = localization_radius(P.degree, b, c2)
    return RootLocalization(r, lo, hi, c2, eta, max(round_down(lo - eta), a), min(round_up(hi + eta), b))


# -- root counting and trivial membership ----------------------------------------

def min_root_product(k: int) -> float:
    """Lower bound ``(1 + 1/k)^(-k/2) (k+1)^(-1/2)`` for the product of ``k`` roots in the
    unit disk of a series with coefficients in ``[-1, 1]``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return (1.0 + 1.0 / k) ** (-k / 2.0) * (k + 1) ** -0.5


def trivial_membership(lam: float, k: int) -> bool:
    """True iff ``lam^k >= 1/2`` (exact test), which puts ``lam`` in the multiplicity-``k`` zero set."""
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    return Fraction(lam) ** k >= Fraction(1, 2)
