"""Problem constructors: every objective ships with what is analytically known.

Scalar families have closed-form curvature certificates; network families
carry certificates valid on stated regions; counterexamples carry witness
families instead, demonstrating where gradient-based curvature bounds fail.
"""

from .counterexamples import COUNTEREXAMPLE_KINDS, make_counterexample
from .least_squares import make_interpolating_least_squares
from .networks import (
    make_deep_leaky,
    make_deep_linear,
    make_semi_linear,
    make_two_layer_ce_l2,
    make_two_layer_mse_l2,
)
from .scalar import (
    make_exp_quadratic,
    make_pl_lower_bound,
    make_pl_sin_quadratic,
    make_runway,
)
from .types import (
    ActivationSpec,
    DatasetPair,
    SmoothnessCertificate,
    activation,
    balance_diagnostics,
    make_balanced_init,
    make_dataset,
)

__all__ = [
    "ActivationSpec",
    "COUNTEREXAMPLE_KINDS",
    "DatasetPair",
    "SmoothnessCertificate",
    "activation",
    "balance_diagnostics",
    "make_balanced_init",
    "make_counterexample",
    "make_dataset",
    "make_deep_leaky",
    "make_deep_linear",
    "make_exp_quadratic",
    "make_interpolating_least_squares",
    "make_pl_lower_bound",
    "make_pl_sin_quadratic",
    "make_runway",
    "make_semi_linear",
    "make_two_layer_ce_l2",
    "make_two_layer_mse_l2",
]
