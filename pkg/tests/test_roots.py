import math

import pytest

from zerocert.prune import ExclusionQuery, prune
from zerocert.repro import BPRIME_INTERVAL, BPRIME_POLY, DEG50_EXAMPLE, THETA_ROWS, theta_row
from zerocert.roots import (EndpointFail, HypothesisFail, _derive, certified_min, certified_sign, check_good,
                            extend_step, localization_radius, localize_double_root, min_root_product, trivial_membership)
from zerocert.series import B2, SignedPolynomial, parse_coeffs

A50, B50 = 0.668470, 0.668482


@pytest.fixture(scope="module")
def good50():
    return check_good(parse_coeffs(DEG50_EXAMPLE), A50, B50)


def test_example_good(good50):
    assert good50.ratio_a == pytest.approx(1.03199, abs=5e-4)
    assert good50.ratio_b == pytest.approx(1.06665, abs=5e-4)
    assert good50.ratio_witness == pytest.approx(0.912958, abs=5e-4)
    assert good50.witness_x == pytest.approx(0.6684756, abs=2e-7)
    assert good50.n == 50


def test_example_localization(good50):
    loc = localize_double_root(good50)
    assert 0.66847556 <= loc.lo and loc.hi <= 0.66847564
    assert loc.c2 > 20
    assert A50 <= loc.lo < loc.hi <= B50


def test_shrinking_never_enlarges_eta(good50):
    loc = localize_double_root(good50)
    d2 = _derive(list(good50.P.coeffs), 2)
    for w in (4e-6, 1e-6, 2e-7):
        a, b = max(loc.y - w, A50), min(loc.y + w, B50)
        c2 = certified_min(d2, a, b)
        assert localization_radius(good50.n, b, c2) <= loc.eta


def test_bprime_good():
    g = check_good(parse_coeffs(BPRIME_POLY, B2), *BPRIME_INTERVAL)
    assert g.h == 2 and g.n == 26


def test_endpoint_fail():
    with pytest.raises(EndpointFail) as info:
        check_good(SignedPolynomial((1, -1)), 0.6, 0.7)
    assert info.value.side == "a"


def test_hypotheses():
    g = check_good(parse_coeffs(BPRIME_POLY, B2), *BPRIME_INTERVAL)
    with pytest.raises(HypothesisFail):
        localize_double_root(g)


def test_good_implies_survivor(good50):
    assert not prune(ExclusionQuery(A50, B50, 2, depth=20)).excluded


def test_extend_step(good50):
    g1 = extend_step(good50)
    m1 = g1.n
    assert 51 <= m1 <= 60
    check_good(g1.P, g1.a, g1.b)
    g2 = extend_step(g1)
    assert g2.n > m1


def test_extend_iterates(good50):
    # past ~28 steps the dip is narrower than the float spacing at the root
    g = good50
    for _ in range(25):
        g = extend_step(g)
        assert g.ratio_a > 1 and g.ratio_b > 1 and g.ratio_witness < 1
    check_good(g.P, g.a, g.b, witness_hint=[g.witness_x])


@pytest.mark.parametrize("j", [1, 2])
def test_theta_rows(j):
    row = theta_row(j)
    assert row["within_tol"], row


def test_certified_sign():
    assert certified_sign([1, -2, -2], 0.5) == -1
    assert certified_sign([1, -1], 0.5) == 1  # 0.5 > 0
    assert certified_sign([0, 0], 0.3) == 0


def test_min_root_product():
    assert min_root_product(3) == pytest.approx(3 * math.sqrt(3) / 16, abs=1e-12)
    assert min_root_product(1) == pytest.approx(0.5)
    prev = 1.0
    for k in range(1, 40):
        v = min_root_product(k)
        assert v < prev and v >= math.exp(-0.5) * (k + 1) ** -0.5
        prev = v
    alpha = math.sqrt(6 * math.sqrt(3) / 16)
    assert alpha > 0.8
    with pytest.raises(ValueError):
        min_root_product(0)


def test_trivial_membership():
    assert trivial_membership(0.80, 3)
    assert trivial_membership(0.7072, 2)
    assert not trivial_membership(0.70, 2)
    with pytest.raises(ValueError):
        trivial_membership(1.0, 2)
