# __init__.py
#
# @date 26-10-18
#

from src.envs.rollout import Trajectory

from .agent import ActorCritic
from .batch import collect_batch, compute_advantages, normalize_advantages
from .surrogate import (
    adaptive_beta_update,
    importance_ratio,
    surrogate_cim,
    surrogate_clip,
    surrogate_kl,
)
from .trainer import (
    SIGMA_MODES,
    VARIANTS,
    IterationRecord,
    PenaltyConfig,
    RunLog,
    Trainer,
    train,
)


__all__ = [
    "Trajectory",
    "ActorCritic",
    "collect_batch",
    "compute_advantages",
    "normalize_advantages",
    "adaptive_beta_update",
    "importance_ratio",
    "surrogate_cim",
    "surrogate_clip",
    "surrogate_kl",
    "SIGMA_MODES",
    "VARIANTS",
    "IterationRecord",
    "PenaltyConfig",
    "RunLog",
    "Trainer",
    "train",
]
