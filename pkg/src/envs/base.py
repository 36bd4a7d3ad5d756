# base.py
# 环境基类 / 环境描述 / 单步结果
#
# @date 26-10-18
#

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from src.errors import ContractError


@dataclass(frozen=True)
class EnvSpec:
    """
    环境描述
    """

    name:        str
    state_dim:   int
    action_dim:  int
    action_low:  tuple[float, ...]
    action_high: tuple[float, ...]
    max_steps:   int

    def __post_init__(self) -> None:
        if self.state_dim < 1 or self.action_dim < 1 or self.max_steps < 1:
            raise ContractError(f"env '{self.name}': dimensions and max_steps must be >= 1")
        if len(self.action_low) != self.action_dim or len(self.action_high) != self.action_dim:
            raise ContractError(f"env '{self.name}': action bounds do not match action dimension")
        for lo, hi in zip(self.action_low, self.action_high):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ContractError(f"env '{self.name}': action bounds must be finite with low < high")

    def clamp(self, action) -> np.ndarray:
        """将动作裁剪到边界内"""
        return np.clip(np.asarray(action, dtype=np.float64), self.action_low, self.action_high)


@dataclass
class StepResult:
    """
    单步结果
    """

    next_state: np.ndarray
    reward:     float
    done:       bool
    info:       dict[str, Any] = field(default_factory=dict)


def check_finite_state(state, name: str) -> np.ndarray:
    s = np.asarray(state, dtype=np.float64)
    if not np.all(np.isfinite(s)):
        raise ContractError(f"{name}: state must be finite, got {s}")
    return s


class BaseEnv(ABC):
    """
    所有环境的基类

    子类实现 _reset_state / _advance；基类负责步数计数、动作裁剪、
    回合结束判定以及回合累计回报。
    """

    spec: EnvSpec

    def __init__(self) -> None:
        self.state: np.ndarray | None = None
        self.steps: int = 0
        self.episode_return: float = 0.0

    @property
    def needs_reset(self) -> bool:
        return self.state is None or self.steps >= self.spec.max_steps

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        """
        开始新回合

        Args:
            rng (np.random.Generator): 由种子派生的随机数源
        Returns:
            np.ndarray: 初始状态
        """
        self.state = self._reset_state(rng)
        self.steps = 0
        self.episode_return = 0.0
        return self.state.copy()

    def step(self, action) -> StepResult:
        """
        推进一步，动作先裁剪到边界内

        Raises:
            ContractError: 未 reset 或状态非有限
        """
        if self.state is None:
            raise ContractError(f"env '{self.spec.name}' must be reset before stepping")

        result = self._advance(self.state, self.spec.clamp(action), self.steps)
        self.state = result.next_state
        self.steps += 1
        self.episode_return += result.reward
        if result.done:
            result.info["episode_return"] = self.episode_return
        return result

    @abstractmethod
    def _reset_state(self, rng: np.random.Generator) -> np.ndarray:
        ...

    @abstractmethod
    def _advance(self, state: np.ndarray, action: np.ndarray, t: int) -> StepResult:
        ...


__all__ = ["EnvSpec", "StepResult", "BaseEnv", "check_finite_state"]
