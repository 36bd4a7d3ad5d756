# metric.py
# 相关熵估计 / CIM / CIM 惩罚项 / 带宽选择
#
# @date 26-10-18
#

"""
相关熵 V(x, y) = E[κ(x − y)] 用成对样本的平均估计，
CIM(x, y) = (κ(0) − V(x, y))^½。

κ(0) − V 按 mean(κ(0) − κ_j) 计算，样本完全重合时结果严格为 0。
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from src import config
from src.autodiff.tensor import Tensor, maximum
from src.correntropy.kernel import Kernel, kernel_tensor, kernel_values
from src.errors import ContractError
from src.policy.gaussian import GaussianBatch, batch_sample


@dataclass(frozen=True)
class CorrentropyEstimate:
    """
    相关熵估计值
    """

    value:  float   # ∈ [0, κ(0)]
    count:  int     # 样本对数
    kernel: Kernel


def _paired(xs, ys) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if x.shape != y.shape or x.ndim != 2:
        raise ContractError(f"sample sets must share shape (N, d), got {x.shape} and {y.shape}")
    if x.shape[0] < 1:
        raise ContractError("at least one sample pair is required")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ContractError("samples must be finite")
    return x, y


def correntropy(k: Kernel, xs, ys) -> CorrentropyEstimate:
    """
    (1/N) Σ_j κ(x_j − y_j)，成对样本 (不做笛卡尔积)

    Args:
        k (Kernel): 核
        xs, ys: 样本 (N, d) 或 (N,)
    Raises:
        ContractError: 形状不一致
    """
    x, y = _paired(xs, ys)
    values = kernel_values(k, x - y)
    return CorrentropyEstimate(value=float(np.mean(values)), count=int(x.shape[0]), kernel=k)


def cim(k: Kernel, xs, ys) -> float:
    """
    相关熵诱导度量 sqrt(max(κ(0) − V, 0))
    """
    x, y = _paired(xs, ys)
    gap = np.mean(k.peak - kernel_values(k, x - y))
    return math.sqrt(max(float(gap), 0.0))


def cim_penalty(k: Kernel, old_policy: GaussianBatch, new_policy: GaussianBatch, noise) -> Tensor:
    """
    两个策略之间的 CIM (可导，梯度只流向新策略)

    新旧策略用同一份标准正态噪声做重参数化采样:
    a_old = μ_old + σ_old ⊙ ε, a_new = μ_new + σ_new ⊙ ε。

    Args:
        k (Kernel): 核
        old_policy (GaussianBatch): 旧策略 (视为常数)
        new_policy (GaussianBatch): 新策略 (Tape 上的 Tensor)
        noise: (B, n) 或 (D, B, n)，D 为每个状态的采样次数
    Returns:
        Tensor: 标量
    Raises:
        ContractError: 形状不一致
    """
    eps = np.asarray(noise, dtype=np.float64)
    old_mu = np.asarray(old_policy.mu.data if isinstance(old_policy.mu, Tensor) else old_policy.mu)
    old_sigma = np.asarray(old_policy.sigma.data if isinstance(old_policy.sigma, Tensor) else old_policy.sigma)

    batch_shape = tuple(new_policy.mu.shape)
    if old_mu.shape != batch_shape:
        raise ContractError(f"old policy batch {old_mu.shape} does not match new policy batch {batch_shape}")
    if eps.ndim not in (2, 3) or eps.shape[-2:] != batch_shape:
        raise ContractError(f"noise shape {eps.shape} does not match policy batch {batch_shape}")

    a_old = old_mu + old_sigma * eps
    a_new = batch_sample(new_policy, eps)

    gap = (k.peak - kernel_tensor(k, a_old - a_new)).mean()
    return maximum(gap, 0.0).sqrt()


def silverman_bandwidth(samples) -> float:
    """
    Silverman 经验带宽 1.06 · std · N^(−1/5)

    标准差取样本标准差 (ddof=1)；多维样本先展平。

    Raises:
        ContractError: 样本少于 2 个
    """
    x = np.asarray(samples, dtype=np.float64).reshape(-1)
    if x.size < 2:
        raise ContractError("silverman_bandwidth needs at least 2 samples")
    spread = float(np.std(x, ddof=1))
    if not math.isfinite(spread) or spread < config.SILVERMAN_MIN_SPREAD:
        return 1.0
    return 1.06 * spread * x.size ** (-0.2)


def gaussian_taylor_partial_sum(r: float, sigma_k: float, terms: int) -> float:
    """
    高斯核的 Taylor 级数部分和 Σ_{n<terms} (−1)^n/n! · (r²/(2σ²))^n
    """
    if terms < 1:
        raise ContractError("terms must be >= 1")
    x = r * r / (2.0 * sigma_k * sigma_k)
    term, total = 1.0, 1.0
    for n in range(1, terms):
        term *= -x / n
        total += term
    return total


__all__ = [
    "CorrentropyEstimate",
    "correntropy",
    "cim",
    "cim_penalty",
    "silverman_bandwidth",
    "gaussian_taylor_partial_sum",
]
