# gaussian.py
# 对角高斯策略分布: 采样 / 对数密度 / KL 闭式解 / 非对称性诊断
#
# @date 26-10-18
#

"""
对角高斯 N(μ, diag(σ²)) 上的全部解析计算。

多维 KL 取一维公式逐维求和 (对角协方差时与标准多元公式一致)。
带 Tensor 的 batch_* 函数与 numpy 版本公式相同，供代理目标在 Tape 上求导。
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from src.autodiff.tensor import Tensor
from src.errors import ContractError


LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class DiagGaussian:
    """
    对角高斯分布
    """

    mu:    np.ndarray  # 均值 (动作单位)
    sigma: np.ndarray  # 标准差 (> 0)

    def __post_init__(self) -> None:
        mu = np.atleast_1d(np.asarray(self.mu, dtype=np.float64))
        sigma = np.atleast_1d(np.asarray(self.sigma, dtype=np.float64))
        if mu.ndim != 1 or mu.shape != sigma.shape:
            raise ContractError(f"mu {mu.shape} and sigma {sigma.shape} must be equal-length vectors")
        if not np.all(np.isfinite(mu)):
            raise ContractError("mu must be finite")
        if not np.all(np.isfinite(sigma)) or not np.all(sigma > 0):
            raise ContractError("sigma entries must be finite and > 0")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n(self) -> int:
        return int(self.mu.shape[0])


@dataclass(frozen=True)
class KlPair:
    """
    正反两个方向的 KL 与它们的差
    """

    forward:   float  # D_KL(p‖q)
    reverse:   float  # D_KL(q‖p)
    asymmetry: float  # forward − reverse


@dataclass(frozen=True)
class PinskerResult:
    tv_estimate: float
    kl:          float
    holds:       bool


@dataclass(frozen=True)
class OrderingReport:
    """
    两个策略的 KL 惩罚代理目标排序诊断 (只报告，不断言)
    """

    kl_12:          float  # D_KL(π1‖π2)
    kl_21:          float  # D_KL(π2‖π1)
    surrogate_12:   float  # L^KL(π2|π1) = adv12 − β2·D_KL(π1‖π2)
    surrogate_21:   float  # L^KL(π1|π2) = adv21 − β1·D_KL(π2‖π1)
    premise_holds:  bool   # β1·D_KL(π1‖π2) − β2·D_KL(π2‖π1) > adv12 − adv21
    lower_bound:    float  # min(β1,β2)·Σ[2 log h + (1−h⁴)/(2h²)], h = σ2/σ1
    bound_exceeds_advantage_gap: bool  # lower_bound > adv12 − adv21
    reversal:       bool   # 代理目标给出的优劣与优势相反


def _check_pair(p: DiagGaussian, q: DiagGaussian) -> None:
    if p.n != q.n:
        raise ContractError(f"dimension mismatch: {p.n} vs {q.n}")


# === 密度与采样 ===

def log_prob(dist: DiagGaussian, action) -> float:
    """
    对数密度 Σ_i [−log(σ_i√(2π)) − (a_i−μ_i)²/(2σ_i²)]

    Raises:
        ContractError: 动作长度与维度不一致
    """
    a = np.atleast_1d(np.asarray(action, dtype=np.float64))
    if a.shape != dist.mu.shape:
        raise ContractError(f"action length {a.shape} does not match dimension {dist.n}")
    z = a - dist.mu
    return float(np.sum(-np.log(dist.sigma) - LOG_SQRT_2PI - z * z / (2.0 * dist.sigma * dist.sigma)))


def sample(dist: DiagGaussian, noise) -> np.ndarray:
    """
    重参数化采样 a = μ + σ ⊙ ε

    Args:
        dist (DiagGaussian): 分布
        noise: 标准正态噪声 (由带种子的 RNG 提供)
    """
    eps = np.atleast_1d(np.asarray(noise, dtype=np.float64))
    if eps.shape != dist.mu.shape:
        raise ContractError(f"noise length {eps.shape} does not match dimension {dist.n}")
    return dist.mu + dist.sigma * eps


# === KL ===

def kl_closed_form(p: DiagGaussian, q: DiagGaussian) -> float:
    """
    D_KL(p‖q) = Σ_i [log(σq_i/σp_i) + (σp_i² + (μp_i−μq_i)²)/(2σq_i²) − ½]
    """
    _check_pair(p, q)
    diff = p.mu - q.mu
    terms = (
        np.log(q.sigma / p.sigma)
        + (p.sigma * p.sigma + diff * diff) / (2.0 * q.sigma * q.sigma)
        - 0.5
    )
    return float(np.sum(terms))


def asymmetry_closed_form(p: DiagGaussian, q: DiagGaussian) -> float:
    """
    非对称差的直接公式 (逐维求和):
    log((σ2/σ1)²) + (σ1²−σ2²)[(μ1−μ2)² + σ1² + σ2²] / (2σ1²σ2²)
    """
    _check_pair(p, q)
    s1 = p.sigma * p.sigma
    s2 = q.sigma * q.sigma
    diff = p.mu - q.mu
    terms = 2.0 * np.log(q.sigma / p.sigma) + (s1 - s2) * (diff * diff + s1 + s2) / (2.0 * s1 * s2)
    return float(np.sum(terms))


def kl_asymmetry(p: DiagGaussian, q: DiagGaussian) -> KlPair:
    """
    正反向 KL 及其差
    """
    forward = kl_closed_form(p, q)
    reverse = kl_closed_form(q, p)
    return KlPair(forward=forward, reverse=reverse, asymmetry=forward - reverse)


def kl_grid(mu1: float, mu2: float, sigmas: Sequence[float]) -> list[tuple[float, float, float, float, float]]:
    """
    一维 KL 网格: 每个 (σ1, σ2) 组合给出 (σ1, σ2, KL(p‖q), KL(q‖p), |差|)

    Args:
        mu1, mu2: p, q 的均值
        sigmas: σ 取值序列 (两个轴共用)
    """
    rows = []
    for s1 in sigmas:
        p = DiagGaussian(np.array([mu1]), np.array([s1]))
        for s2 in sigmas:
            q = DiagGaussian(np.array([mu2]), np.array([s2]))
            pair = kl_asymmetry(p, q)
            rows.append((float(s1), float(s2), pair.forward, pair.reverse, abs(pair.asymmetry)))
    return rows


# === 全变差 与 Pinsker 型不等式 ===

def _tv_quadrature(p: DiagGaussian, q: DiagGaussian) -> float:
    mp, sp = float(p.mu[0]), float(p.sigma[0])
    mq, sq = float(q.mu[0]), float(q.sigma[0])
    lo = min(mp - 12.0 * sp, mq - 12.0 * sq)
    hi = max(mp + 12.0 * sp, mq + 12.0 * sq)

    def integrand(x: float) -> float:
        lp = -math.log(sp) - LOG_SQRT_2PI - (x - mp) ** 2 / (2.0 * sp * sp)
        lq = -math.log(sq) - LOG_SQRT_2PI - (x - mq) ** 2 / (2.0 * sq * sq)
        return abs(math.exp(lp) - math.exp(lq))

    value, _ = integrate.quad(integrand, lo, hi, points=sorted({mp, mq}), limit=400,
                              epsabs=1e-13, epsrel=1e-11)
    return 0.5 * value


def _tv_monte_carlo(p: DiagGaussian, q: DiagGaussian, samples: int, rng: np.random.Generator) -> float:
    x = p.mu + p.sigma * rng.standard_normal((samples, p.n))
    zp = (x - p.mu) / p.sigma
    zq = (x - q.mu) / q.sigma
    log_ratio = np.sum(np.log(p.sigma / q.sigma) - 0.5 * zq * zq + 0.5 * zp * zp, axis=1)
    # E_p[max(0, 1 − q/p)]，取值落在 [0, 1]
    return float(np.mean(np.maximum(0.0, 1.0 - np.exp(log_ratio))))


def pinsker_check(
    p: DiagGaussian,
    q: DiagGaussian,
    samples: int,
    rng: np.random.Generator | None = None,
) -> PinskerResult:
    """
    检查 D_TV(p‖q)² ≤ D_KL(p‖q)

    一维时 TV 用数值积分，多维时用 Monte-Carlo E_p[max(0, 1 − q/p)]，
    容差 3/√samples。

    Args:
        samples (int): Monte-Carlo 样本数 (≥ 10⁴)
        rng: 随机数源，None 时使用固定种子 0
    """
    _check_pair(p, q)
    if samples < 10_000:
        raise ContractError("pinsker_check needs at least 10^4 samples")

    kl = kl_closed_form(p, q)
    if p.n == 1:
        tv = _tv_quadrature(p, q)
    else:
        tv = _tv_monte_carlo(p, q, samples, rng if rng is not None else np.random.default_rng(0))

    tolerance = 3.0 / math.sqrt(samples)
    return PinskerResult(tv_estimate=tv, kl=kl, holds=bool(tv * tv <= kl + tolerance))


# === 非对称性对策略更新的影响 ===

def variance_ratios(p: DiagGaussian, q: DiagGaussian) -> np.ndarray:
    """
    逐维标准差比 h_i = σq_i / σp_i

    取这个方向时，均值相同的情况下
    asymmetry_lower_bound(h, β, β) == β·(KL(p‖q) − KL(q‖p))。
    """
    _check_pair(p, q)
    return q.sigma / p.sigma


def asymmetry_lower_bound(h, beta1: float, beta2: float) -> float:
    """
    min(β1, β2) · Σ_i [2·log(h_i) + (1 − h_i⁴)/(2h_i²)]

    Raises:
        ContractError: h 含非正值
    """
    hv = np.atleast_1d(np.asarray(h, dtype=np.float64))
    if not np.all(np.isfinite(hv)) or not np.all(hv > 0):
        raise ContractError("all h_i must be positive and finite")
    h2 = hv * hv
    return float(min(beta1, beta2) * np.sum(2.0 * np.log(hv) + (1.0 - h2 * h2) / (2.0 * h2)))


def surrogate_ordering_diagnostic(
    pi1: DiagGaussian,
    pi2: DiagGaussian,
    adv12: float,
    adv21: float,
    beta1: float,
    beta2: float,
) -> OrderingReport:
    """
    计算两个方向的 KL 惩罚代理目标并报告排序是否被 KL 非对称性反转

    Args:
        pi1, pi2: 两个策略 (同一状态下)
        adv12: E_π1[(π2/π1)·Â_π2]
        adv21: E_π2[(π1/π2)·Â_π1]
        beta1, beta2: 两个方向的惩罚系数
    """
    kl_12 = kl_closed_form(pi1, pi2)
    kl_21 = kl_closed_form(pi2, pi1)
    surrogate_12 = adv12 - beta2 * kl_12
    surrogate_21 = adv21 - beta1 * kl_21
    gap = adv12 - adv21

    bound = asymmetry_lower_bound(variance_ratios(pi1, pi2), beta1, beta2)

    reversal = (adv12 > adv21 and surrogate_12 < surrogate_21) or \
               (adv12 < adv21 and surrogate_12 > surrogate_21)

    return OrderingReport(
        kl_12=kl_12,
        kl_21=kl_21,
        surrogate_12=surrogate_12,
        surrogate_21=surrogate_21,
        premise_holds=bool(beta1 * kl_12 - beta2 * kl_21 > gap),
        lower_bound=bound,
        bound_exceeds_advantage_gap=bool(bound > gap),
        reversal=bool(reversal),
    )


# === Tape 上的批量版本 ===

@dataclass
class GaussianBatch:
    """
    一批状态上的对角高斯策略
    mu 形状 (B, n)，sigma 形状 (n,) 或 (B, n)；可以是 Tensor 或 ndarray
    """

    mu:    Tensor | np.ndarray
    sigma: Tensor | np.ndarray

    @property
    def batch_size(self) -> int:
        return int(self.mu.shape[0])

    @property
    def action_dim(self) -> int:
        return int(self.mu.shape[-1])


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor._wrap(np.asarray(x, dtype=np.float64))


def batch_log_prob(dist: GaussianBatch, actions) -> Tensor:
    """
    每个状态的对数密度，形状 (B,)
    """
    mu, sigma = _as_tensor(dist.mu), _as_tensor(dist.sigma)
    a = np.asarray(actions, dtype=np.float64)
    if a.shape != mu.shape:
        raise ContractError(f"actions {a.shape} do not match policy batch {mu.shape}")
    z = (a - mu) / sigma
    terms = -sigma.log() - LOG_SQRT_2PI - 0.5 * z.square()
    return terms.sum(axis=1)


def batch_sample(dist: GaussianBatch, noise) -> Tensor:
    """
    重参数化采样 μ + σ ⊙ ε (对 μ、σ 可导)
    """
    return _as_tensor(dist.mu) + _as_tensor(dist.sigma) * np.asarray(noise, dtype=np.float64)


def batch_kl(p: GaussianBatch, q: GaussianBatch) -> Tensor:
    """
    每个状态的 D_KL(p‖q)，形状 (B,)
    """
    mu_p, sigma_p = _as_tensor(p.mu), _as_tensor(p.sigma)
    mu_q, sigma_q = _as_tensor(q.mu), _as_tensor(q.sigma)
    if mu_p.shape != mu_q.shape:
        raise ContractError(f"policy batches differ in shape: {mu_p.shape} vs {mu_q.shape}")
    diff = mu_p - mu_q
    terms = (sigma_q.log() - sigma_p.log()) + (sigma_p.square() + diff.square()) / (2.0 * sigma_q.square()) - 0.5
    return terms.sum(axis=1)


__all__ = [
    "DiagGaussian",
    "KlPair",
    "PinskerResult",
    "OrderingReport",
    "GaussianBatch",
    "log_prob",
    "sample",
    "kl_closed_form",
    "asymmetry_closed_form",
    "kl_asymmetry",
    "kl_grid",
    "pinsker_check",
    "variance_ratios",
    "asymmetry_lower_bound",
    "surrogate_ordering_diagnostic",
    "batch_log_prob",
    "batch_sample",
    "batch_kl",
]
