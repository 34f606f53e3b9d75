"""Exact symbolic-numeric calculator for residue currents on monomial data."""

from .currents import (
    CurrentFactor,
    CurrentSum,
    ExactValue,
    TensorCurrent,
    TestForm,
    TestSlot,
    pairing,
)
from .exponents import (
    ExponentMatrix,
    Weights,
    coefficient_ratio,
    limit_agreement_check,
    multi_index_terms,
    ratio_holomorphy_witness,
    weight_forms,
)
from .products import (
    FactorSpec,
    ProductSpec,
    annihilation_test,
    ch_product,
    default_weights,
    evaluate_product,
    expand_product,
    m_product,
    nabla_identity_holds,
)
from .profiles import RadialProfile
from .quad import (
    Cutoff,
    EpsilonPath,
    admissibility_bound,
    convergence_study,
    lambda_sample,
    passare_integral,
    torus_integral,
)
from .ratfn import RatFn

__version__ = "0.1.0"

__all__ = [
    "CurrentFactor",
    "CurrentSum",
    "Cutoff",
    "EpsilonPath",
    "ExactValue",
    "ExponentMatrix",
    "FactorSpec",
    "ProductSpec",
    "RadialProfile",
    "RatFn",
    "TensorCurrent",
    "TestForm",
    "TestSlot",
    "Weights",
    "admissibility_bound",
    "annihilation_test",
    "ch_product",
    "coefficient_ratio",
    "convergence_study",
    "default_weights",
    "evaluate_product",
    "expand_product",
    "lambda_sample",
    "limit_agreement_check",
    "m_product",
    "multi_index_terms",
    "nabla_identity_holds",
    "pairing",
    "passare_integral",
    "ratio_holomorphy_witness",
    "torus_integral",
    "weight_forms",
]
