import math
from fractions import Fraction

import numpy as np
import pytest

from zerocert.series import (B1, B2, CoefficientError, CoefficientSet, SignedPolynomial, deriv_sup,
                             deriv_sup_legacy, eval_poly, format_coeffs, parse_coeffs, tail_sup)
from zerocert.repro import DEG50_EXAMPLE


def test_coefficient_sets():
    assert B1.allowed == (-1, 0, 1) and B1.height == 1
    assert B2.allowed == (-2, -1, 0, 1, 2) and B2.height == 2
    with pytest.raises(ValueError):
        CoefficientSet((1, 2))


def test_polynomial_invariants():
    P = SignedPolynomial((1, 0, -1, 0, 0))
    assert P.degree == 4  # trailing zeros are kept
    with pytest.raises(CoefficientError):
        SignedPolynomial((0, 1))
    with pytest.raises(CoefficientError):
        SignedPolynomial((1, 2))
    SignedPolynomial((1, 2), B2)


def test_eval_constant():
    r = eval_poly(SignedPolynomial((1,)), 0, 0.9)
    assert r.value == 1.0 and r.fp_slack == 0.0


def test_eval_small():
    assert eval_poly(SignedPolynomial((1, -2, -2), B2), 0, 0.5).value == -0.5


def test_eval_derivative_beyond_degree():
    r = eval_poly(SignedPolynomial((1, 1)), 3, 0.4)
    assert r.value == 0.0 and r.fp_slack == 0.0


def test_eval_example_endpoint_ratio():
    P = parse_coeffs(DEG50_EXAMPLE)
    x = 0.668470
    v = eval_poly(P, 0, x).value
    assert v * (1 - x) * x ** -51 == pytest.approx(1.03199, abs=5e-5)


def test_eval_slack_covers_exact(rng):
    for _ in range(1000):
        n = int(rng.integers(0, 25))
        P = SignedPolynomial((1,) + tuple(int(c) for c in rng.integers(-1, 2, size=n)))
        i = int(rng.integers(0, 3))
        x = float(rng.uniform(0.05, 0.95))
        r = eval_poly(P, i, x)
        exact = P.exact(Fraction(x), i)
        assert abs(Fraction(r.value) - exact) <= Fraction(r.fp_slack)


def test_flat_model_slack():
    r = eval_poly(parse_coeffs("1o1"), 0, 0.5, fp_model="flat14")
    assert r.fp_slack == pytest.approx(1e-14 * 0.25)


@pytest.mark.parametrize("i,m,b,want", [(0, 3, 0.5, 0.125), (1, 1, 0.5, 3.0)])
def test_tail_sup_closed(i, m, b, want):
    assert tail_sup(i, m, b) == pytest.approx(want, rel=1e-14)
    assert tail_sup(i, m, b) >= want


def test_tail_sup_truncated_oracle():
    b = 0.668
    total = Fraction(0)
    fb = Fraction(b)
    p = fb ** 9
    for k in range(11, 400):
        total += k * (k - 1) * p
        p *= fb
    got = tail_sup(2, 10, b, 2)
    assert got >= 2 * total
    assert got - float(2 * total) < 1e-12 * got + 1e-12


def test_tail_sup_monotone_and_geometric():
    for m in range(0, 60, 7):
        for b in (0.3, 0.55, 0.8):
            geo = b ** (m + 1) / (1 - b)
            assert tail_sup(0, m, b) == pytest.approx(geo, rel=1e-12)
            assert tail_sup(0, m + 1, b) <= tail_sup(0, m, b)
            assert tail_sup(1, m, b) <= tail_sup(1, m, b + 0.01)
            assert tail_sup(1, m, b, 2) >= tail_sup(1, m, b, 1)


def test_tail_sup_rejects_b_ge_1():
    with pytest.raises(ValueError):
        tail_sup(0, 3, 1.0)
    with pytest.raises(ValueError):
        deriv_sup(1, 1.2)


def test_deriv_sup_values():
    assert deriv_sup(1, 0.5) == pytest.approx(4.0)
    assert deriv_sup(2, 0.5) == pytest.approx(16.0)
    b = 0.668
    assert deriv_sup(2, b) == pytest.approx(2 / 0.332 ** 3, rel=1e-12)
    assert deriv_sup(2, b) >= sum(k * (k - 1) * b ** (k - 2) for k in range(2, 2000))


def test_deriv_sup_legacy_smaller():
    assert deriv_sup_legacy(1, 0.6) == deriv_sup(1, 0.6)
    for i in (2, 3):
        assert deriv_sup_legacy(i, 0.6) < deriv_sup(i, 0.6)


def test_deriv_sup_dominates(rng):
    for _ in range(300):
        h = int(rng.integers(1, 3))
        cs = B1 if h == 1 else B2
        P = SignedPolynomial((1,) + tuple(int(c) for c in rng.integers(-h, h + 1, size=30)), cs)
        b = float(rng.uniform(0.2, 0.9))
        x = float(rng.uniform(0, b))
        i = int(rng.integers(0, 4))
        assert abs(float(P.exact(Fraction(x), i))) <= deriv_sup(i, b, h)


def test_parse_examples():
    assert parse_coeffs("1ooo1").coeffs == (1, -1, -1, -1, 1)
    assert parse_coeffs("1ōōō1").coeffs == (1, -1, -1, -1, 1)
    assert parse_coeffs("1").degree == 0
    P = parse_coeffs("(1, −2, −1, 1, 1, 1, 2, 1, 1, 2, 1, 1, 2, 1, 1, 2, 1, 2, 1, 1, 2, −2, −2, −1, −2, 2, −1)", B2)
    assert P.degree == 26


@pytest.mark.parametrize("bad", ["1x0", "0o1", "", "1,3"])
def test_parse_rejects(bad):
    with pytest.raises(CoefficientError):
        parse_coeffs(bad, B2 if "," in bad else B1)


def test_parse_rejects_outside_set():
    with pytest.raises(CoefficientError):
        parse_coeffs("1,2,1", B1)


def test_roundtrip(rng):
    for cs in (B1, B2):
        for _ in range(50):
            P = SignedPolynomial((1,) + tuple(int(c) for c in rng.choice(cs.allowed, size=12)), cs)
            assert parse_coeffs(format_coeffs(P), cs) == P
