# surrogate.py
# 三种 PPO 代理目标 (越大越好) 与自适应 β
#
# @date 26-10-18
#

from __future__ import annotations

import numpy as np

from src.autodiff.tensor import Tensor, minimum
from src.correntropy.kernel import Kernel
from src.correntropy.metric import cim_penalty
from src.envs.rollout import Trajectory
from src.errors import ContractError
from src.policy.gaussian import GaussianBatch, batch_kl, batch_log_prob


def _advantages(batch: Trajectory) -> np.ndarray:
    if batch.advantages is None:
        raise ContractError("batch has no advantages; run compute_advantages first")
    return batch.advantages


def importance_ratio(batch: Trajectory, new_policy: GaussianBatch) -> Tensor:
    """ρ = exp(log π_new − log π_old)"""
    return (batch_log_prob(new_policy, batch.actions) - batch.log_probs).exp()


def surrogate_clip(batch: Trajectory, new_policy: GaussianBatch, eps: float) -> Tensor:
    """
    mean(min(ρÂ, clip(ρ, 1−ε, 1+ε)Â))
    """
    adv = _advantages(batch)
    rho = importance_ratio(batch, new_policy)
    return minimum(rho * adv, rho.clip(1.0 - eps, 1.0 + eps) * adv).mean()


def surrogate_kl(batch: Trajectory, new_policy: GaussianBatch, old_policy: GaussianBatch, beta: float) -> Tensor:
    """
    mean(ρÂ) − β · mean_s KL(π_old(·|s) ‖ π_new(·|s))
    """
    adv = _advantages(batch)
    rho = importance_ratio(batch, new_policy)
    return (rho * adv).mean() - beta * batch_kl(old_policy, new_policy).mean()


def surrogate_cim(
    batch: Trajectory,
    new_policy: GaussianBatch,
    old_policy: GaussianBatch,
    alpha: float,
    kernel: Kernel,
    noise,
) -> Tensor:
    """
    mean(ρÂ) − α · CIM(π_old, π_new)
    """
    adv = _advantages(batch)
    rho = importance_ratio(batch, new_policy)
    return (rho * adv).mean() - alpha * cim_penalty(kernel, old_policy, new_policy, noise)


def adaptive_beta_update(beta: float, d: float, d_targ: float) -> float:
    """
    d < d_targ/1.5 时 β 减半；d > d_targ×1.5 时 β 加倍；否则不变
    """
    if beta < 0 or d < 0 or not d_targ > 0:
        raise ContractError(f"invalid controller input beta={beta}, d={d}, d_targ={d_targ}")
    if d < d_targ / 1.5:
        return beta / 2.0
    if d > d_targ * 1.5:
        return beta * 2.0
    return beta


__all__ = [
    "importance_ratio",
    "surrogate_clip",
    "surrogate_kl",
    "surrogate_cim",
    "adaptive_beta_update",
]
