# pendulum.py
# 倒立摆摆起任务 (1 维力矩, 3 维观测)
#
# @date 26-10-18
#

"""
状态观测为 (cos θ, sin θ, θ̇)，θ = 0 为竖直向上。
半隐式 Euler 积分: 先更新角速度并裁剪，再用新角速度更新角度。
"""

from __future__ import annotations

import math

import numpy as np

from src import config
from src.envs.base import BaseEnv, EnvSpec, StepResult, check_finite_state


PENDULUM_SPEC = EnvSpec(
    name="pendulum",
    state_dim=3,
    action_dim=1,
    action_low=(-config.PENDULUM_MAX_TORQUE,),
    action_high=(config.PENDULUM_MAX_TORQUE,),
    max_steps=config.PENDULUM_MAX_STEPS,
)


def angle_normalize(theta: float) -> float:
    """将角度折回 [−π, π)"""
    return ((theta + math.pi) % (2.0 * math.pi)) - math.pi


def pendulum_reset(rng: np.random.Generator) -> np.ndarray:
    """
    θ ~ U(−π, π)，θ̇ ~ U(−1, 1)
    """
    theta = rng.uniform(-math.pi, math.pi)
    theta_dot = rng.uniform(-1.0, 1.0)
    return np.array([math.cos(theta), math.sin(theta), theta_dot])


def pendulum_step(state, torque, t: int = 0) -> StepResult:
    """
    推进一步

    Args:
        state: (cos θ, sin θ, θ̇)
        torque: 力矩 (裁剪到 [−2, 2])
        t (int): 当前回合已走步数
    Returns:
        StepResult: done 在第 max_steps 步为真
    Raises:
        ContractError: 状态非有限
    """
    s = check_finite_state(state, "pendulum")
    u = float(np.clip(np.asarray(torque, dtype=np.float64).reshape(-1)[0],
                      -config.PENDULUM_MAX_TORQUE, config.PENDULUM_MAX_TORQUE))

    g, m, l, dt = config.PENDULUM_G, config.PENDULUM_M, config.PENDULUM_L, config.PENDULUM_DT
    theta = math.atan2(s[1], s[0])
    theta_dot = float(s[2])

    reward = -(angle_normalize(theta) ** 2 + 0.1 * theta_dot ** 2 + 0.001 * u ** 2)

    theta_dot = theta_dot + (3.0 * g / (2.0 * l) * math.sin(theta) + 3.0 / (m * l * l) * u) * dt
    theta_dot = min(max(theta_dot, -config.PENDULUM_MAX_SPEED), config.PENDULUM_MAX_SPEED)
    theta = angle_normalize(theta + theta_dot * dt)

    next_state = np.array([math.cos(theta), math.sin(theta), theta_dot])
    done = t + 1 >= config.PENDULUM_MAX_STEPS
    return StepResult(next_state=next_state, reward=reward, done=done, info={"theta": theta})


def pendulum_energy(state) -> float:
    """
    均匀细杆的总机械能 ½·(ml²/3)·θ̇² + mg(l/2)·cos θ
    """
    s = np.asarray(state, dtype=np.float64)
    m, l, g = config.PENDULUM_M, config.PENDULUM_L, config.PENDULUM_G
    return 0.5 * (m * l * l / 3.0) * s[2] ** 2 + m * g * (l / 2.0) * s[0]


class PendulumEnv(BaseEnv):
    spec = PENDULUM_SPEC

    def _reset_state(self, rng: np.random.Generator) -> np.ndarray:
        return pendulum_reset(rng)

    def _advance(self, state: np.ndarray, action: np.ndarray, t: int) -> StepResult:
        return pendulum_step(state, action, t)


__all__ = [
    "PENDULUM_SPEC",
    "PendulumEnv",
    "angle_normalize",
    "pendulum_reset",
    "pendulum_step",
    "pendulum_energy",
]
