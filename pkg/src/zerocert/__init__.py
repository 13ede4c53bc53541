"""Certified exclusion and existence of multiple zeros for power series with restricted coefficients,
plus the planar covering checks used for the connectedness locus."""
from .affine import (CoverCertificate, Parallelogram, RobustnessChain, compose_affine, cover_check,
                     locus_interior_test, point_in, robustness_eta, trivial_connected, verify_covering_lemma)
from .prune import ExclusionQuery, PruneAborted, PruneOutcome, exclusion_tests, point_search, prune
from .roots import (GoodTuple, RootLocalization, check_good, extend_step, localize_double_root,
                    min_root_product, trivial_membership)
from .scan import GapCertificate, render_locus_2d, scan, survivor_prefix_property
from .series import B1, B2, CoefficientSet, SignedPolynomial, deriv_sup, eval_poly, parse_coeffs, tail_sup

__version__ = "0.1.0"
