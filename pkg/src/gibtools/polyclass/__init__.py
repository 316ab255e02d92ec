"""Exact classification of integer polynomials and matrices by root modulus."""

from .classify import (
    DEFAULT_MAX_BITS,
    Outcome,
    Rejection,
    RejectionReason,
    TwoClassCertificate,
    Undecided,
    classify_matrix,
    classify_two_class,
    outcome_from_json,
    outcome_json,
    resolve_class,
)
from .factor import (
    DegreeTooLarge,
    expand_factors,
    factor_over_integers,
    leaf_closure_dims,
    semisimple_matrix,
)
from .isolate import ModulusCluster, PrecisionExhausted, isolate_root_moduli, unit_root_count
from .polynomial import (
    IntMatrix,
    IntPolynomial,
    block_diag,
    char_poly,
    companion_matrix,
    square_free_decomposition,
)

__all__ = [
    "DEFAULT_MAX_BITS",
    "DegreeTooLarge",
    "IntMatrix",
    "IntPolynomial",
    "ModulusCluster",
    "Outcome",
    "PrecisionExhausted",
    "Rejection",
    "RejectionReason",
    "TwoClassCertificate",
    "Undecided",
    "block_diag",
    "char_poly",
    "classify_matrix",
    "classify_two_class",
    "companion_matrix",
    "expand_factors",
    "factor_over_integers",
    "isolate_root_moduli",
    "leaf_closure_dims",
    "outcome_from_json",
    "outcome_json",
    "resolve_class",
    "semisimple_matrix",
    "square_free_decomposition",
    "unit_root_count",
]
