# __init__.py
#
# @date 26-10-18
#

from src.errors import ContractError

from .base import BaseEnv, EnvSpec, StepResult
from .pendulum import PendulumEnv, pendulum_energy, pendulum_reset, pendulum_step
from .pointmass import PointMassEnv, pointmass_reset, pointmass_step
from .rollout import Policy, Trajectory, rollout


ENV_REGISTRY: dict[str, type[BaseEnv]] = {
    "pendulum":  PendulumEnv,
    "pointmass": PointMassEnv,
}


def make_env(name: str) -> BaseEnv:
    """
    按名称创建环境

    Raises:
        ContractError: 未知环境名
    """
    key = str(name).strip().lower()
    if key not in ENV_REGISTRY:
        raise ContractError(f"unknown env '{name}', expected one of {tuple(ENV_REGISTRY)}")
    return ENV_REGISTRY[key]()


__all__ = [
    "ENV_REGISTRY",
    "make_env",
    "BaseEnv",
    "EnvSpec",
    "StepResult",
    "PendulumEnv",
    "PointMassEnv",
    "pendulum_energy",
    "pendulum_reset",
    "pendulum_step",
    "pointmass_reset",
    "pointmass_step",
    "Policy",
    "Trajectory",
    "rollout",
]
