import itertools

import numpy as np
import pytest

from zerocert.checks import exhaustive_survivor, prune_vs_enumeration
from zerocert.prune import ExclusionQuery, PruneAborted, exclusion_tests, point_search, prune
from zerocert.repro import THETA_ROWS
from zerocert.series import B1, B2, SignedPolynomial, parse_coeffs


def test_query_validation():
    with pytest.raises(ValueError):
        ExclusionQuery(0.6, 0.5)
    with pytest.raises(ValueError):
        ExclusionQuery(0.5, 1.0)
    with pytest.raises(ValueError):
        ExclusionQuery(0.5, 0.6, mult=0)
    with pytest.raises(ValueError):
        ExclusionQuery(0.5, 0.6, fp_model="x")


def test_exclusion_tests_constant_passes():
    assert exclusion_tests(SignedPolynomial((1,)), 0.668, 0.6681, 2)


def test_exclusion_tests_one_plus_x_fails():
    # P(b) = 1.661 against 0.661^2/0.339 + 0.001/0.339^2 ~ 1.297
    assert not exclusion_tests(SignedPolynomial((1, 1)), 0.66, 0.661, 1)


def test_exclusion_tests_table_prefix():
    theta, text = THETA_ROWS[1]
    P = SignedPolynomial(parse_coeffs(text).coeffs[:41])
    assert exclusion_tests(P, theta - 1e-7, theta + 1e-7, 2)


def test_depth_zero_survivor():
    out = prune(ExclusionQuery(0.668, 0.6681, depth=0))
    assert not out.excluded and out.witness.coeffs == (1,)


def test_survivor_matches_enumeration_depth12():
    out = prune(ExclusionQuery(0.6684, 0.6686, 2, B1, 12))
    assert not out.excluded
    assert exhaustive_survivor(0.6684, 0.6686, 12)
    # witness passes every prefix test
    w = out.witness
    for n in range(w.degree + 1):
        assert exclusion_tests(SignedPolynomial(w.coeffs[: n + 1]), 0.6684, 0.6686, 2)


def test_witness_is_lexicographically_first():
    q = ExclusionQuery(0.6684, 0.6686, 2, B1, 6)
    w = prune(q).witness.coeffs
    for tail in itertools.product((-1, 0, 1), repeat=6):
        cand = (1,) + tail
        ok = all(exclusion_tests(SignedPolynomial(cand[: n + 1]), 0.6684, 0.6686, 2) for n in range(7))
        if ok:
            assert cand == w
            break


def test_oracle_agreement_small():
    rep = prune_vs_enumeration(n=40, max_depth=7, seed=3)
    assert rep["ok"], rep["mismatches"]


def test_i1_cell_excluded():
    out = prune(ExclusionQuery(0.668480, 0.6684801, 2, B1, 45))
    assert out.excluded


def test_monotone_in_depth_and_subcells():
    a, b = 0.6000, 0.6001
    d0 = next(d for d in range(1, 40) if prune(ExclusionQuery(a, b, depth=d)).excluded)
    for d in range(d0, d0 + 5):
        assert prune(ExclusionQuery(a, b, depth=d)).excluded
    m = 0.5 * (a + b)
    assert prune(ExclusionQuery(a, m, depth=d0)).excluded
    assert prune(ExclusionQuery(m, b, depth=d0)).excluded


def test_trivial_region_never_excluded():
    for a in (0.7072, 0.75, 0.9):
        assert not prune(ExclusionQuery(a, a + 1e-3, 2, B1, 20)).excluded


def test_budget_raises_not_excluded():
    with pytest.raises(PruneAborted):
        prune(ExclusionQuery(0.746, 0.7465, 3, B1, 60), max_nodes=10_000)


def test_legacy_constants_no_weaker_than_needed():
    # the smaller width constant excludes at least as early
    a, b = 0.6000, 0.6001
    for d in (10, 20, 30):
        if prune(ExclusionQuery(a, b, depth=d)).excluded:
            assert prune(ExclusionQuery(a, b, depth=d, constants="legacy")).excluded


def test_flat_model_runs():
    assert prune(ExclusionQuery(0.6, 0.6001, depth=30, fp_model="flat14")).excluded


def test_prefix_argument():
    q = ExclusionQuery(0.5, 0.5001, 2, B2, 18)
    assert prune(q, (1, 0, 0)).excluded
    assert not prune(q, (1, -2, -2)).excluded


def test_point_search():
    assert not point_search([0.6685], 16).excluded
    assert point_search([0.3, 0.4], 16).excluded
