# __init__.py
#
# @date 26-10-18
#

from .tensor import (
    OP_REGISTRY,
    Tape,
    Tensor,
    finite_difference_grad,
    grad,
    maximum,
    minimum,
    where,
)
from .mlp import Mlp, mlp_forward
from .optim import OptimizerState, make_optimizer, optimizer_step


__all__ = [
    "OP_REGISTRY",
    "Tape",
    "Tensor",
    "grad",
    "finite_difference_grad",
    "maximum",
    "minimum",
    "where",
    "Mlp",
    "mlp_forward",
    "OptimizerState",
    "make_optimizer",
    "optimizer_step",
]
