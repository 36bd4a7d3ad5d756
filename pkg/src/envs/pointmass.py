# pointmass.py
# 一维质点回到原点任务
#
# @date 26-10-18
#

from __future__ import annotations

import numpy as np

from src import config
from src.envs.base import BaseEnv, EnvSpec, StepResult, check_finite_state


POINTMASS_SPEC = EnvSpec(
    name="pointmass",
    state_dim=2,
    action_dim=1,
    action_low=(-config.POINTMASS_MAX_FORCE,),
    action_high=(config.POINTMASS_MAX_FORCE,),
    max_steps=config.POINTMASS_MAX_STEPS,
)


def pointmass_reset(rng: np.random.Generator) -> np.ndarray:
    """x ~ U(−1, 1)，v = 0"""
    return np.array([rng.uniform(-1.0, 1.0), 0.0])


def pointmass_step(state, force, t: int = 0) -> StepResult:
    """
    v' = v + dt·f，x' = x + dt·v'，奖励 −x² − 0.01·f²

    Args:
        state: (x, v)
        force: 推力 (裁剪到 [−1, 1])
        t (int): 当前回合已走步数
    Raises:
        ContractError: 状态非有限
    """
    x, v = check_finite_state(state, "pointmass")
    f = float(np.clip(np.asarray(force, dtype=np.float64).reshape(-1)[0],
                      -config.POINTMASS_MAX_FORCE, config.POINTMASS_MAX_FORCE))
    dt = config.POINTMASS_DT

    reward = -(x * x) - 0.01 * f * f
    v_next = v + dt * f
    x_next = x + dt * v_next

    return StepResult(
        next_state=np.array([x_next, v_next]),
        reward=float(reward),
        done=t + 1 >= config.POINTMASS_MAX_STEPS,
    )


class PointMassEnv(BaseEnv):
    spec = POINTMASS_SPEC

    def _reset_state(self, rng: np.random.Generator) -> np.ndarray:
        return pointmass_reset(rng)

    def _advance(self, state: np.ndarray, action: np.ndarray, t: int) -> StepResult:
        return pointmass_step(state, action, t)


__all__ = ["POINTMASS_SPEC", "PointMassEnv", "pointmass_reset", "pointmass_step"]
