# optim.py
# SGD / Adam 优化器
#
# @date 26-10-18
#

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from src import config
from src import logger
from src.autodiff.tensor import Tensor
from src.errors import ContractError, NonFiniteGradientWarning


OPTIMIZER_KINDS = ("sgd", "adam")


@dataclass
class OptimizerState:
    """
    优化器状态
    """

    kind:  Literal["sgd", "adam"]
    lr:    float
    beta1: float = config.ADAM_BETA1
    beta2: float = config.ADAM_BETA2
    eps:   float = config.ADAM_EPS
    m:     list[np.ndarray] = field(default_factory=list)  # 一阶矩
    v:     list[np.ndarray] = field(default_factory=list)  # 二阶矩
    step:  int = 0   # 已执行的更新次数
    skipped: int = 0  # 因非有限梯度跳过的次数
    name:  str = "params"  # 日志里用的参数组名


def make_optimizer(kind: str, lr: float, params: Sequence[np.ndarray], name: str = "params") -> OptimizerState:
    """
    创建优化器状态

    Args:
        kind (str): "sgd" 或 "adam"
        lr (float): 学习率 (> 0)
        params: 参数数组 (用于确定矩缓冲形状)
        name (str): 参数组名
    Raises:
        ContractError: 未知优化器或学习率非正
    """

    if kind not in OPTIMIZER_KINDS:
        raise ContractError(f"unknown optimizer '{kind}', expected one of {OPTIMIZER_KINDS}")
    if not lr > 0:
        raise ContractError("learning rate must be positive")

    state = OptimizerState(kind=kind, lr=float(lr), name=name)  # type: ignore[arg-type]
    if kind == "adam":
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    return state


def optimizer_step(
    state: OptimizerState,
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray | Tensor],
) -> list[np.ndarray]:
    """
    执行一步梯度下降 (最小化)

    Args:
        state (OptimizerState): 优化器状态 (原地更新矩与步数)
        params: 参数
        grads: 梯度，与参数一一对应
    Returns:
        list[np.ndarray]: 更新后的参数；梯度非有限时原样返回
    Raises:
        ContractError: 参数与梯度形状不一致
    """

    gs = [np.asarray(g.data if isinstance(g, Tensor) else g, dtype=np.float64) for g in grads]
    if len(gs) != len(params) or any(g.shape != p.shape for g, p in zip(gs, params)):
        raise ContractError("parameter and gradient shapes disagree")

    if not all(np.all(np.isfinite(g)) for g in gs):
        state.skipped += 1
        logger.warning(f"参数组 {state.name} 出现非有限梯度，跳过本次更新 (累计 {state.skipped} 次)")
        warnings.warn(
            f"non-finite gradient in '{state.name}', update skipped",
            NonFiniteGradientWarning,
            stacklevel=2,
        )
        return [p for p in params]

    if state.kind == "sgd":
        state.step += 1
        return [p - state.lr * g for p, g in zip(params, gs)]

    if len(state.m) != len(params) or any(m.shape != p.shape for m, p in zip(state.m, params)):
        raise ContractError("adam moment buffers do not match parameter shapes")

    state.step += 1
    t = state.step
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t

    updated = []
    for i, (p, g) in enumerate(zip(params, gs)):
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g
        m_hat = state.m[i] / correction1
        v_hat = state.v[i] / correction2
        updated.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
    return updated


__all__ = [
    "OPTIMIZER_KINDS",
    "OptimizerState",
    "make_optimizer",
    "optimizer_step",
]
