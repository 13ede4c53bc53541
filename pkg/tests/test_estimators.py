import numpy as np
from sklearn.base import clone

from zerocert.estimators import GapScanner, LocusClassifier


def test_gap_scanner():
    est = GapScanner(depth=30).fit()
    X = [[0.6, 0.6001], [0.9, 0.9001]]
    assert est.predict(X).tolist() == [1, 0]
    assert clone(est).get_params()["depth"] == 30


def test_gap_scanner_params_roundtrip():
    est = GapScanner(mult=3, coeff_set="b2")
    assert est.set_params(depth=12).get_params()["depth"] == 12


def test_locus_classifier():
    est = LocusClassifier(depth=10).fit()
    pred = est.predict(np.array([[0.8, 0.7], [0.3, 0.4], [0.6685, 0.6685]]))
    assert pred.tolist() == [2, 0, 1]
