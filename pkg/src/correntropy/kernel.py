# kernel.py
# 核函数表 (六种核族 + 带宽)
#
# @date 26-10-18
#

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from src import config
from src.autodiff.tensor import Tensor, maximum
from src.errors import ContractError


KERNEL_FAMILIES = (
    "epanechnikov",
    "biweight",
    "triangular",
    "laplace",
    "gaussian",
    "rectangular",
)

_EPANECHNIKOV_PEAK = 3.0 / (4.0 * math.sqrt(5.0))
_BIWEIGHT_PEAK = 15.0 / 16.0

KERNEL_PEAKS: dict[str, float] = {
    "epanechnikov": _EPANECHNIKOV_PEAK,
    "biweight":     _BIWEIGHT_PEAK,
    "triangular":   1.0,
    "laplace":      1.0,
    "gaussian":     1.0,
    "rectangular":  0.5,
}

# 满足 sqrt(κ(0) − κ(r)) 关于 r 凹且不减的核族，经验 CIM 是严格的度量
METRIC_FAMILIES = ("epanechnikov", "biweight", "triangular", "laplace", "gaussian")


def parse_family(name: str) -> str:
    """
    解析命令行 / 配置文件里的核族名 (大小写不敏感)

    Raises:
        ContractError: 未知核族
    """
    family = str(name).strip().lower()
    if family not in KERNEL_FAMILIES:
        raise ContractError(f"unknown kernel family '{name}', expected one of {KERNEL_FAMILIES}")
    return family


def kernel_peak(family: str) -> float:
    """κ(0)"""
    return KERNEL_PEAKS[parse_family(family)]


@dataclass(frozen=True)
class Kernel:
    """
    核函数 = 核族 + 带宽 σ_k
    """

    family:    str = config.CIM_KERNEL
    bandwidth: float = config.CIM_BANDWIDTH

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", parse_family(self.family))
        bw = float(self.bandwidth)
        if not math.isfinite(bw) or bw <= 0:
            raise ContractError(f"kernel bandwidth must be positive, got {self.bandwidth}")
        object.__setattr__(self, "bandwidth", bw)

    @property
    def peak(self) -> float:
        return kernel_peak(self.family)

    def with_bandwidth(self, bandwidth: float) -> "Kernel":
        return Kernel(self.family, bandwidth)


def kernel_values(k: Kernel, diffs: np.ndarray) -> np.ndarray:
    """
    逐行计算 κ(‖d_j‖)

    Args:
        k (Kernel): 核
        diffs (np.ndarray): 差值矩阵 (N, d)
    Returns:
        np.ndarray: (N,)
    """
    d = np.asarray(diffs, dtype=np.float64)
    r2 = np.sum(d * d, axis=-1)
    r = np.sqrt(r2)
    s = k.bandwidth

    match k.family:
        case "epanechnikov":
            return _EPANECHNIKOV_PEAK * np.maximum(1.0 - r2 / (5.0 * s * s), 0.0)
        case "biweight":
            return _BIWEIGHT_PEAK * np.maximum(1.0 - r2 / (s * s), 0.0) ** 2
        case "triangular":
            return np.maximum(1.0 - r / s, 0.0)
        case "laplace":
            return np.exp(-r / s)
        case "gaussian":
            return np.exp(-r2 / (2.0 * s * s))
        case _:
            return np.where(r < s, 0.5, 0.0)


def kernel_eval(k: Kernel, diff) -> float:
    """
    单个差向量上的核值

    Raises:
        ContractError: diff 含 NaN / Inf
    """
    d = np.atleast_1d(np.asarray(diff, dtype=np.float64))
    if not np.all(np.isfinite(d)):
        raise ContractError("kernel input must be finite")
    return float(kernel_values(k, d.reshape(1, -1))[0])


def kernel_tensor(k: Kernel, diffs: Tensor) -> Tensor:
    """
    Tape 上的核值 (对差值可导)，矩形核梯度恒为零

    Args:
        diffs (Tensor): (..., d)
    Returns:
        Tensor: (...)
    """
    s = k.bandwidth

    match k.family:
        case "epanechnikov":
            r2 = diffs.square().sum(axis=-1)
            return _EPANECHNIKOV_PEAK * maximum(1.0 - r2 / (5.0 * s * s), 0.0)
        case "biweight":
            r2 = diffs.square().sum(axis=-1)
            return _BIWEIGHT_PEAK * maximum(1.0 - r2 / (s * s), 0.0).square()
        case "triangular":
            return maximum(1.0 - diffs.norm() / s, 0.0)
        case "laplace":
            return (-diffs.norm() / s).exp()
        case "gaussian":
            r2 = diffs.square().sum(axis=-1)
            return (-r2 / (2.0 * s * s)).exp()
        case _:
            return Tensor._wrap(kernel_values(k, diffs.data))


__all__ = [
    "KERNEL_FAMILIES",
    "KERNEL_PEAKS",
    "METRIC_FAMILIES",
    "Kernel",
    "parse_family",
    "kernel_peak",
    "kernel_values",
    "kernel_eval",
    "kernel_tensor",
]
