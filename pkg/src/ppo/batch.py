# batch.py
# 批量采样 与 优势估计
#
# @date 26-10-18
#

from __future__ import annotations

import numpy as np

from src import config
from src.autodiff.mlp import Mlp
from src.envs.base import BaseEnv
from src.envs.rollout import Policy, Trajectory, rollout
from src.errors import ContractError


def normalize_advantages(adv: np.ndarray) -> np.ndarray:
    """
    归一化到均值 0、标准差 1；标准差不超过下限时返回全零
    """
    std = float(np.std(adv))
    if not std > config.ADV_STD_FLOOR:
        return np.zeros_like(adv)
    return (adv - np.mean(adv)) / std


def compute_advantages(traj: Trajectory, critic: Mlp, gamma: float, normalize: bool = True) -> Trajectory:
    """
    Monte-Carlo 回报减去 critic 基线

    G_t 在 done 处重置；最后一段若被截断 (未 done)，用 V(final_state) 自举。

    Args:
        traj (Trajectory): 轨迹
        critic (Mlp): 状态价值网络
        gamma (float): 折扣因子
        normalize (bool): 是否按批归一化优势
    Returns:
        Trajectory: 填好 returns / values / advantages 的副本
    Raises:
        ContractError: 空轨迹
    """
    n = len(traj)
    if n == 0:
        raise ContractError("cannot compute advantages of an empty trajectory")

    values = critic.forward(traj.states).data.reshape(n)
    running = 0.0 if traj.dones[-1] else float(critic.forward(traj.final_state).data.reshape(-1)[0])

    returns = np.empty(n)
    for t in range(n - 1, -1, -1):
        if traj.dones[t]:
            running = 0.0
        running = traj.rewards[t] + gamma * running
        returns[t] = running

    advantages = returns - values
    if normalize:
        advantages = normalize_advantages(advantages)
    if not np.all(np.isfinite(advantages)):
        raise ContractError("advantages contain NaN or Inf")
    return traj.with_estimates(returns=returns, values=values, advantages=advantages)


def collect_batch(env: BaseEnv, policy: Policy, batch_size: int, rng: np.random.Generator) -> Trajectory:
    """
    连续 rollout 直到凑满 batch_size 个转移 (环境在迭代之间保持运行)
    """
    if batch_size < 1:
        raise ContractError("batch_size must be >= 1")
    parts = []
    remaining = batch_size
    while remaining > 0:
        part = rollout(env, policy, remaining, rng)
        parts.append(part)
        remaining -= len(part)
    return Trajectory.concat(parts)


__all__ = ["normalize_advantages", "compute_advantages", "collect_batch"]
