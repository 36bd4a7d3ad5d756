# agent.py
# actor (高斯策略均值网络 + log σ) 与 critic (状态价值网络)
#
# @date 26-10-18
#

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from src import config
from src.autodiff.mlp import Mlp, mlp_forward
from src.autodiff.tensor import Tensor
from src.errors import ContractError
from src.policy.gaussian import GaussianBatch, batch_log_prob, batch_sample


class ActorCritic:
    """
    actor 参数按 [W0, b0, ..., log σ] 排列；log σ 与状态无关
    """

    def __init__(
        self,
        state_dim: int,
        action_dim: int,
        rng: np.random.Generator | None,
        hidden: Sequence[int] = config.HIDDEN_WIDTHS,
        log_std_init: float = config.LOG_STD_INIT,
        action_scale: Sequence[float] | None = None,
    ):
        """
        Args:
            action_scale: 给定时均值取 scale ⊙ tanh(actor(s))，落在动作边界内；None 时为线性输出
        """
        self.state_dim = int(state_dim)
        self.action_dim = int(action_dim)
        self.actor = Mlp((self.state_dim, *hidden, self.action_dim), rng, out_scale=0.01)
        self.critic = Mlp((self.state_dim, *hidden, 1), rng)
        self.log_std = np.full(self.action_dim, float(log_std_init))
        self.action_scale = None if action_scale is None else np.asarray(action_scale, dtype=np.float64)
        if self.action_scale is not None and (
            self.action_scale.shape != (self.action_dim,) or np.any(self.action_scale <= 0)
        ):
            raise ContractError(f"action_scale must hold {self.action_dim} positive entries")

    def copy(self) -> "ActorCritic":
        other = ActorCritic.__new__(ActorCritic)
        other.state_dim = self.state_dim
        other.action_dim = self.action_dim
        other.actor = self.actor.copy()
        other.critic = self.critic.copy()
        other.log_std = self.log_std.copy()
        other.action_scale = self.action_scale
        return other

    # === actor 参数 ===

    def actor_params(self) -> list[np.ndarray]:
        return [*self.actor.params, self.log_std]

    def set_actor_params(self, params: Sequence[np.ndarray]) -> None:
        if len(params) != len(self.actor.params) + 1:
            raise ContractError("actor parameter list does not match network layout")
        self.actor.params = [np.asarray(p, dtype=np.float64) for p in params[:-1]]
        self.log_std = np.asarray(params[-1], dtype=np.float64)

    def clamp_log_std(self, sigma_floor: float) -> int:
        """
        将 σ 抬到下限

        Returns:
            int: 被抬升的维度数
        """
        floor = math.log(sigma_floor)
        low = self.log_std < floor
        if np.any(low):
            self.log_std = np.where(low, floor, self.log_std)
        return int(np.count_nonzero(low))

    # === 策略 ===

    def distribution(self, states, params: Sequence[Tensor] | None = None) -> GaussianBatch:
        """
        一批状态上的策略分布

        Args:
            states: (B, state_dim)
            params: Tape 上的 actor 参数 (含 log σ)；None 时使用当前参数且不记录
        """
        if params is None:
            mu = self.actor.forward(states)
            log_std = Tensor._wrap(self.log_std)
        else:
            mu = self.actor.forward(states, params[:-1])
            log_std = params[-1]
        if self.action_scale is not None:
            mu = mu.tanh() * self.action_scale
        return GaussianBatch(mu=mu, sigma=log_std.exp())

    def frozen_distribution(self, states) -> GaussianBatch:
        """与 distribution 相同，但返回 ndarray (作为常数参与代理目标)"""
        dist = self.distribution(states)
        return GaussianBatch(mu=dist.mu.data, sigma=dist.sigma.data)

    def act(self, state: np.ndarray, noise: np.ndarray) -> tuple[np.ndarray, float]:
        """
        采样动作 a = μ(s) + σ ⊙ ε

        Returns:
            tuple: (未裁剪的动作, log π(a|s))
        """
        dist = self.distribution(np.asarray(state, dtype=np.float64).reshape(1, self.state_dim))
        action = batch_sample(dist, np.asarray(noise, dtype=np.float64).reshape(1, self.action_dim)).data[0]
        logp = batch_log_prob(dist, action.reshape(1, self.action_dim)).item()
        return action, logp

    # === critic ===

    def value(self, states) -> np.ndarray:
        """V(s)，形状 (B,)"""
        s = np.asarray(states, dtype=np.float64).reshape(-1, self.state_dim)
        return mlp_forward(self.critic, s).data.reshape(-1)


__all__ = ["ActorCritic"]
