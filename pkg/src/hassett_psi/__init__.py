"""Exact intersection numbers of psi classes on Hassett spaces of weighted stable curves."""
from .weights import ONE, ZERO_PLUS, Weight, WeightSet, WeightSum, additive_closure, parse_weight, parse_weight_set
from .correlators import build_F_coefficients, partition_sum, unweighted_correlator, weighted_correlator

__all__ = [
    "ONE",
    "ZERO_PLUS",
    "Weight",
    "WeightSet",
    "WeightSum",
    "additive_closure",
    "parse_weight",
    "parse_weight_set",
    "build_F_coefficients",
    "partition_sum",
    "unweighted_correlator",
    "weighted_correlator",
]

__version__ = "0.1.0"
