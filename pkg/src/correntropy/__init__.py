# __init__.py
#
# @date 26-10-18
#

from .kernel import (
    KERNEL_FAMILIES,
    KERNEL_PEAKS,
    METRIC_FAMILIES,
    Kernel,
    kernel_eval,
    kernel_peak,
    kernel_tensor,
    kernel_values,
    parse_family,
)
from .metric import (
    CorrentropyEstimate,
    cim,
    cim_penalty,
    correntropy,
    gaussian_taylor_partial_sum,
    silverman_bandwidth,
)


__all__ = [
    "KERNEL_FAMILIES",
    "KERNEL_PEAKS",
    "METRIC_FAMILIES",
    "Kernel",
    "kernel_eval",
    "kernel_peak",
    "kernel_tensor",
    "kernel_values",
    "parse_family",
    "CorrentropyEstimate",
    "cim",
    "cim_penalty",
    "correntropy",
    "gaussian_taylor_partial_sum",
    "silverman_bandwidth",
]
