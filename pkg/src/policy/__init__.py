# __init__.py
#
# @date 26-10-18
#

from .gaussian import (
    DiagGaussian,
    GaussianBatch,
    KlPair,
    OrderingReport,
    PinskerResult,
    asymmetry_closed_form,
    batch_kl,
    batch_log_prob,
    batch_sample,
    kl_asymmetry,
    kl_closed_form,
    kl_grid,
    log_prob,
    pinsker_check,
    sample,
    surrogate_ordering_diagnostic,
    asymmetry_lower_bound,
    variance_ratios,
)


__all__ = [
    "DiagGaussian",
    "GaussianBatch",
    "KlPair",
    "OrderingReport",
    "PinskerResult",
    "asymmetry_closed_form",
    "batch_kl",
    "batch_log_prob",
    "batch_sample",
    "kl_asymmetry",
    "kl_closed_form",
    "kl_grid",
    "log_prob",
    "pinsker_check",
    "sample",
    "surrogate_ordering_diagnostic",
    "asymmetry_lower_bound",
    "variance_ratios",
]
