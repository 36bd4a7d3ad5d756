# diagnostics.py
# KL 非对称性诊断网格
#
# @date 26-10-18
#

from __future__ import annotations

import math
from typing import Literal

import numpy as np

from src.errors import ContractError
from src.policy import gaussian


ASYMMETRY_HEADER = ["sigma1", "sigma2", "kl_pq", "kl_qp", "abs_difference"]
BOUND_HEADER = ["dimension", "h", "lower_bound", "kl_pq", "kl_qp"]


def sigma_axis(low: float, high: float, grid: int, scale: Literal["log", "linear"] = "log") -> np.ndarray:
    """
    σ 坐标轴 (包含两个端点)

    Raises:
        ContractError: 区间非正 / 为空 / grid < 2
    """
    if not (math.isfinite(low) and math.isfinite(high) and 0 < low < high):
        raise ContractError(f"sigma range must satisfy 0 < low < high, got [{low}, {high}]")
    if grid < 2:
        raise ContractError("grid must be >= 2")
    if scale == "log":
        return np.geomspace(low, high, grid)
    if scale == "linear":
        return np.linspace(low, high, grid)
    raise ContractError(f"unknown axis scale '{scale}'")


def asymmetry_grid(
    mu1: float,
    mu2: float,
    sigma_low: float,
    sigma_high: float,
    grid: int,
    scale: Literal["log", "linear"] = "log",
) -> list[tuple[float, float, float, float, float]]:
    """
    (σ1, σ2) 网格上的正反向 KL 与差的绝对值，共 grid² 行
    """
    if not (math.isfinite(mu1) and math.isfinite(mu2)):
        raise ContractError("means must be finite")
    return gaussian.kl_grid(mu1, mu2, sigma_axis(sigma_low, sigma_high, grid, scale))


def bound_vs_dimension(h: float, beta1: float, beta2: float, max_dim: int) -> list[tuple[int, float, float, float, float]]:
    """
    每维方差比都为 h 时，下界随策略维度 n = 1..max_dim 的变化

    同时给出 p = N(0, I)、q = N(0, h²I) 的正反向 KL 作对照。
    """
    if max_dim < 1:
        raise ContractError("max_dim must be >= 1")
    if not (h > 0 and math.isfinite(h)):
        raise ContractError("h must be positive")
    if beta1 < 0 or beta2 < 0:
        raise ContractError("beta values must be >= 0")

    rows = []
    for n in range(1, max_dim + 1):
        p = gaussian.DiagGaussian(np.zeros(n), np.ones(n))
        q = gaussian.DiagGaussian(np.zeros(n), np.full(n, h))
        pair = gaussian.kl_asymmetry(p, q)
        bound = gaussian.asymmetry_lower_bound(gaussian.variance_ratios(p, q), beta1, beta2)
        rows.append((n, float(h), bound, pair.forward, pair.reverse))
    return rows


__all__ = [
    "ASYMMETRY_HEADER",
    "BOUND_HEADER",
    "sigma_axis",
    "asymmetry_grid",
    "bound_vs_dimension",
]
