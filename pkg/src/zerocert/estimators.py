"""Thin scikit-learn style wrappers over the exclusion search.

Nothing is learned: ``fit`` only validates parameters, so the objects can sit in
pipelines or parameter grids.  ``predict`` returns integer labels.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .prune import DEFAULT_MAX_NODES, ExclusionQuery, prune
from .scan import LOCUS_LABELS, classify_locus_point
from .series import get_coefficient_set


class GapScanner(BaseEstimator, ClassifierMixin):
    """Label cells ``(a, b)``: 1 when no class member has a zero of order ``mult`` there, else 0."""

    def __init__(self, depth=40, mult=2, coeff_set="b1", fp_model="horner", constants="conservative",
                 max_nodes=DEFAULT_MAX_NODES):
        self.depth = depth
        self.mult = mult
        self.coeff_set = coeff_set
        self.fp_model = fp_model
        self.constants = constants
        self.max_nodes = max_nodes

    def fit(self, X=None, y=None):
        self.coeff_set_ = get_coefficient_set(self.coeff_set)
        self.classes_ = np.array([0, 1])
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, 2)
        cs = getattr(self, "coeff_set_", None) or get_coefficient_set(self.coeff_set)
        out = np.empty(len(X), dtype=int)
        for k, (a, b) in enumerate(X):
            q = ExclusionQuery(float(a), float(b), self.mult, cs, self.depth, self.fp_model, self.constants)
            out[k] = int(prune(q, max_nodes=self.max_nodes).excluded)
        return out


class LocusClassifier(BaseEstimator, ClassifierMixin):
    """Label parameter pairs ``(gamma, lambda)``: 0 excluded, 1 unknown, 2 trivially inside."""

    def __init__(self, depth=16, coeff_set="b1", fp_model="horner"):
        self.depth = depth
        self.coeff_set = coeff_set
        self.fp_model = fp_model

    def fit(self, X=None, y=None):
        get_coefficient_set(self.coeff_set)
        self.classes_ = np.array(sorted(LOCUS_LABELS))
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, 2)
        code = {v: k for k, v in LOCUS_LABELS.items()}
        return np.array([code[classify_locus_point(float(g), float(l), self.depth, self.coeff_set, self.fp_model)]
                         for g, l in X], dtype=int)
