# rollout.py
# 轨迹容器与采样
#
# @date 26-10-18
#

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Protocol, Sequence

import numpy as np

from src.envs.base import BaseEnv
from src.errors import ContractError


class Policy(Protocol):
    """rollout 需要的策略接口"""

    action_dim: int

    def act(self, state: np.ndarray, noise: np.ndarray) -> tuple[np.ndarray, float]:
        """返回 (未裁剪的动作, 该动作的对数密度)"""
        ...


@dataclass
class Trajectory:
    """
    一段连续的转移序列，可跨越多个回合 (dones 标记回合结束)
    actions 保存未裁剪的采样动作，log_probs 对应行为策略下的对数密度
    """

    states:      np.ndarray  # (T, state_dim)
    actions:     np.ndarray  # (T, action_dim)
    rewards:     np.ndarray  # (T,)
    log_probs:   np.ndarray  # (T,)
    dones:       np.ndarray  # (T,) bool
    final_state: np.ndarray  # 最后一步之后的状态 (截断时用于自举)
    episode_returns: list[float] = field(default_factory=list)  # 本段内完成的回合回报

    # 由 compute_advantages 填写
    returns:    np.ndarray | None = None
    values:     np.ndarray | None = None
    advantages: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = len(self.rewards)
        if not (len(self.states) == len(self.actions) == len(self.log_probs) == len(self.dones) == n):
            raise ContractError("trajectory fields must have equal lengths")

    def __len__(self) -> int:
        return len(self.rewards)

    @staticmethod
    def concat(parts: Sequence["Trajectory"]) -> "Trajectory":
        """
        按时间顺序拼接多段轨迹，final_state 取最后一段的
        """
        if not parts:
            raise ContractError("cannot concatenate an empty list of trajectories")
        return Trajectory(
            states=np.concatenate([p.states for p in parts]),
            actions=np.concatenate([p.actions for p in parts]),
            rewards=np.concatenate([p.rewards for p in parts]),
            log_probs=np.concatenate([p.log_probs for p in parts]),
            dones=np.concatenate([p.dones for p in parts]),
            final_state=parts[-1].final_state,
            episode_returns=[r for p in parts for r in p.episode_returns],
        )

    def with_estimates(self, returns: np.ndarray, values: np.ndarray, advantages: np.ndarray) -> "Trajectory":
        return replace(self, returns=returns, values=values, advantages=advantages)


def rollout(env: BaseEnv, policy: Policy, horizon: int, rng: np.random.Generator) -> Trajectory:
    """
    用策略与环境交互，直到回合结束或达到 horizon 步

    环境处于未初始化或回合已结束状态时先 reset。
    采样动作在送入环境前裁剪到边界，轨迹里保存未裁剪的动作。

    Args:
        env (BaseEnv): 环境 (单一所有者)
        policy (Policy): 策略
        horizon (int): 最大步数 (≥ 1)
        rng (np.random.Generator): 随机数源 (reset 与动作噪声)
    Returns:
        Trajectory: 1 到 horizon 个转移
    """
    if horizon < 1:
        raise ContractError("horizon must be >= 1")

    if env.needs_reset:
        env.reset(rng)

    states, actions, rewards, log_probs, dones = [], [], [], [], []
    episode_returns: list[float] = []
    state = env.state.copy()

    for _ in range(horizon):
        noise = rng.standard_normal(policy.action_dim)
        action, logp = policy.act(state, noise)
        result = env.step(action)

        states.append(state)
        actions.append(np.asarray(action, dtype=np.float64))
        rewards.append(result.reward)
        log_probs.append(logp)
        dones.append(result.done)

        state = result.next_state.copy()
        if result.done:
            episode_returns.append(float(result.info["episode_return"]))
            break

    return Trajectory(
        states=np.array(states),
        actions=np.array(actions),
        rewards=np.array(rewards, dtype=np.float64),
        log_probs=np.array(log_probs, dtype=np.float64),
        dones=np.array(dones, dtype=bool),
        final_state=state,
        episode_returns=episode_returns,
    )


__all__ = ["Policy", "Trajectory", "rollout"]
