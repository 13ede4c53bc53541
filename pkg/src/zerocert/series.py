"""Coefficient classes, certified polynomial evaluation and class-wide bounds.

Power series in a class have constant term 1 and every later coefficient in a
finite integer set.  All bounds returned here are rounded upward so they can be
used on the "large" side of an exclusion inequality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

UNIT_ROUNDOFF = 2.0 ** -53
FLAT_SLACK = 1e-14
FP_MODELS = ("horner", "flat14")


class CoefficientError(ValueError):
    """Raised for malformed coefficient strings or out-of-class coefficients."""


def gamma(k: int) -> float:
    """Higham's ``k*u / (1 - k*u)``, rounded upward."""
    if k <= 0:
        return 0.0
    ku = k * UNIT_ROUNDOFF
    if ku >= 0.5:
        raise OverflowError(f"gamma({k}) is not meaningful in double precision")
    return round_up(ku / (1.0 - ku))


def round_up(x: float, ulps: int = 2) -> float:
    """Push ``x`` a few ulps towards +inf."""
    for _ in range(ulps):
        x = math.nextafter(x, math.inf)
    return x


def round_down(x: float, ulps: int = 2) -> float:
    for _ in range(ulps):
        x = math.nextafter(x, -math.inf)
    return x


def falling_factorial(k: int, i: int) -> int:
    """``k! / (k - i)!``; zero when ``i > k``."""
    if i > k:
        return 0
    out = 1
    for j in range(k - i + 1, k + 1):
        out *= j
    return out


@dataclass(frozen=True)
class CoefficientSet:
    """Allowed coefficients for positions ``n >= 1`` (the constant term is always 1)."""

    allowed: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        allowed = tuple(sorted(set(int(c) for c in self.allowed)))
        if 0 not in allowed or len(allowed) < 2:
            raise CoefficientError("coefficient set must contain 0 and a nonzero value")
        object.__setattr__(self, "allowed", allowed)

    @property
    def height(self) -> int:
        return max(abs(c) for c in self.allowed)

    def __contains__(self, c) -> bool:
        return c in self.allowed

    def __iter__(self):
        # ascending order: the branching order of the exclusion search
        return iter(self.allowed)

    def __len__(self):
        return len(self.allowed)


B1 = CoefficientSet((-1, 0, 1), "b1")
B2 = CoefficientSet((-2, -1, 0, 1, 2), "b2")
COEFFICIENT_SETS = {"b1": B1, "b2": B2}


def get_coefficient_set(spec) -> CoefficientSet:
    if isinstance(spec, CoefficientSet):
        return spec
    try:
        return COEFFICIENT_SETS[str(spec).lower()]
    except KeyError:
        raise CoefficientError(f"unknown coefficient set {spec!r}; expected one of {sorted(COEFFICIENT_SETS)}") from None


@dataclass(frozen=True)
class SignedPolynomial:
    """Prefix ``a_0 + a_1 x + ... + a_n x^n`` of a class member (``a_0 = 1``).

    The degree is syntactic: trailing zeros are kept and count towards it.
    """

    coeffs: tuple[int, ...]
    coeff_set: CoefficientSet = B1

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        if not coeffs or coeffs[0] != 1:
            raise CoefficientError("a prefix must start with the constant coefficient 1")
        bad = [c for c in coeffs[1:] if c not in self.coeff_set]
        if bad:
            raise CoefficientError(f"coefficients {sorted(set(bad))} are not in {self.coeff_set.allowed}")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def height(self) -> int:
        return self.coeff_set.height

    def extend(self, *more: int) -> "SignedPolynomial":
        return SignedPolynomial(self.coeffs + tuple(more), self.coeff_set)

    def derivative_coeffs(self, i: int) -> list[int]:
        """Integer coefficients of the ``i``-th derivative (exact synthetic differentiation)."""
        return [c * falling_factorial(k, i) for k, c in enumerate(self.coeffs) if k >= i]

    def exact(self, x, i: int = 0) -> Fraction:
        """Exact rational value of the ``i``-th derivative at ``x``."""
        xq = Fraction(x)
        acc = Fraction(0)
        for c in reversed(self.derivative_coeffs(i)):
            acc = acc * xq + c
        return acc

    def __str__(self):
        return format_coeffs(self)


@dataclass(frozen=True)
class EvalResult:
    value: float
    fp_slack: float

    @property
    def lower(self) -> float:
        return round_down(self.value - self.fp_slack)

    @property
    def upper(self) -> float:
        return round_up(self.value + self.fp_slack)


def _horner(coeffs: Sequence[float], x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def eval_poly(P: SignedPolynomial, i: int, x: float, fp_model: str = "horner") -> EvalResult:
    """Evaluate the ``i``-th derivative of ``P`` at ``x`` with a forward-error bound.

    ``horner``: ``fp_slack = gamma(2m) * sum |d_k| x^k`` for the derivative
    coefficients ``d_k`` of degree ``m``; inflated by one more unit when a
    coefficient is not exactly representable.  ``flat14``: the fixed
    ``1e-14 * x**n`` slack of the original C++ implementation (``n = deg P``).
    """
    if i < 0:
        raise ValueError("derivative order must be nonnegative")
    if fp_model not in FP_MODELS:
        raise ValueError(f"unknown fp model {fp_model!r}")
    x = float(x)
    d = P.derivative_coeffs(i)
    if not d:
        return EvalResult(0.0, 0.0)
    m = len(d) - 1
    inexact = any(abs(c) > 2 ** 53 for c in d)
    df = [float(c) for c in d]
    value = _horner(df, x)
    if fp_model == "flat14":
        return EvalResult(value, round_up(FLAT_SLACK * x ** P.degree))
    if m == 0 and not inexact:
        return EvalResult(value, 0.0)
    k = 2 * m + (1 if inexact else 0)
    abs_sum = _horner([abs(c) for c in df], abs(x))
    g = gamma(k)
    slack = round_up(g * abs_sum * (1.0 + gamma(2 * m + 2)))
    return EvalResult(value, slack)


def _series_tail(i: int, m: int, b: float) -> float:
    """Upper bound for ``sum_{k > m} k!/(k-i)! * b^(k-i)`` by direct summation with a
    geometric remainder bound."""
    start = max(m + 1, i)
    # first term computed exactly, then the ratio recurrence
    term = float(falling_factorial(start, i) * Fraction(b) ** (start - i))
    total = 0.0
    k = start
    count = 0
    while True:
        total += term
        count += 1
        ratio = b * (k + 1) / (k + 1 - i)
        nxt = term * ratio
        k += 1
        if ratio < 1.0:
            # remaining terms decrease at least geometrically with this ratio
            rem_ratio = b * (k + 1) / (k + 1 - i)
            if nxt <= total * 1e-18 or nxt == 0.0:
                remainder = nxt / (1.0 - rem_ratio)
                total += remainder
                break
        term = nxt
        if count > 100000:
            raise RuntimeError("tail series failed to converge")
    return round_up(total * (1.0 + gamma(4 * count + 8)))


def tail_sup(i: int, m: int, b: float, h: int = 1, loose: bool = False) -> float:
    """Sup over ``x in (0, b]`` of ``|f^(i)(x) - P^(i)(x)|`` for class members ``f``
    extending a degree-``m`` prefix ``P``.

    Equals ``h * sum_{k > m} k!/(k-i)! b^(k-i)`` (the closed form
    ``h*(i!/(1-b)^(i+1) - sum_{k=i}^m k!/(k-i)! b^(k-i))``), rounded upward.
    ``loose=True`` returns the cruder ``h * d^i/dx^i [x^m / (1-x)]`` at ``b``.
    """
    if not 0.0 < b < 1.0:
        raise ValueError(f"b must lie in (0, 1), got {b}")
    if i < 0 or m < 0:
        raise ValueError("order and degree must be nonnegative")
    first = m if loose else m + 1
    return round_up(h * _series_tail(i, first - 1, b))


def deriv_sup(i: int, b: float, h: int = 1) -> float:
    """``h * i! / (1-b)^(i+1)``: sup of ``|f^(i)|`` on ``[0, b]`` over the whole class."""
    if not 0.0 < b < 1.0:
        raise ValueError(f"b must lie in (0, 1), got {b}")
    one_minus = round_down(1.0 - b)
    return round_up(h * math.factorial(i) / one_minus ** (i + 1), ulps=2 * i + 4)


def deriv_sup_legacy(i: int, b: float, h: int = 1) -> float:
    """The smaller width constant used by the original search, ``h / (i (1-b)^(i+1))``.

    Only matches the class supremum for ``i = 1``; kept for regression runs.
    """
    if not 0.0 < b < 1.0:
        raise ValueError(f"b must lie in (0, 1), got {b}")
    if i < 1:
        return deriv_sup(i, b, h)
    one_minus = round_down(1.0 - b)
    return round_up(h / (i * one_minus ** (i + 1)), ulps=2 * i + 4)


_SYMBOLS = {"0": 0, "1": 1, "o": -1, "ō": -1, "2": 2, "O": -2}
_ALIASES = str.maketrans({"−": "-", "–": "-", "̅": ""})


def parse_coeffs(text: str, coeff_set: CoefficientSet | str = B1) -> SignedPolynomial:
    """Parse ``"1ooo1"`` (``o`` is -1) or a comma-separated integer list."""
    cs = get_coefficient_set(coeff_set)
    raw = text.strip().translate(_ALIASES)
    if raw.startswith("(") and raw.endswith(")"):
        raw = raw[1:-1]
    if "," in raw:
        try:
            coeffs = [int(tok) for tok in raw.replace(" ", "").split(",") if tok]
        except ValueError as exc:
            raise CoefficientError(f"invalid integer in coefficient list: {exc}") from None
    else:
        coeffs = []
        for ch in raw.replace(" ", ""):
            if ch not in _SYMBOLS:
                raise CoefficientError(f"invalid coefficient symbol {ch!r}")
            coeffs.append(_SYMBOLS[ch])
    if not coeffs or coeffs[0] != 1:
        raise CoefficientError("missing leading coefficient 1")
    return SignedPolynomial(tuple(coeffs), cs)


def format_coeffs(P: SignedPolynomial) -> str:
    """Canonical text form: ``1oo0`` for height 1, ``1,-2,2`` otherwise."""
    if P.height == 1:
        return "".join({-1: "o", 0: "0", 1: "1"}[c] for c in P.coeffs)
    return ",".join(str(c) for c in P.coeffs)


def as_polynomial(obj, coeff_set: CoefficientSet | str = B1) -> SignedPolynomial:
    if isinstance(obj, SignedPolynomial):
        return obj
    if isinstance(obj, str):
        return parse_coeffs(obj, coeff_set)
    return SignedPolynomial(tuple(obj), get_coefficient_set(coeff_set))


def abs_sum(coeffs: Iterable[int], x: float) -> float:
    """``sum |c_k| x^k`` rounded upward (used for Lipschitz-type bounds)."""
    cs = [abs(float(c)) for c in coeffs]
    n = len(cs)
    return round_up(_horner(cs, abs(x)) * (1.0 + gamma(2 * n + 2)))
