# trainer.py
# Clip / 自适应 KL / CIM 三种 PPO 变体的训练循环
#
# @date 26-10-18
#

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Callable, Literal

import numpy as np

from src import config
from src import logger
from src.autodiff.optim import OPTIMIZER_KINDS, make_optimizer, optimizer_step
from src.autodiff.tensor import Tape, Tensor
from src.correntropy.kernel import Kernel, parse_family
from src.correntropy.metric import cim_penalty, silverman_bandwidth
from src.envs import BaseEnv, make_env
from src.envs.base import EnvSpec
from src.envs.rollout import Trajectory
from src.errors import ConfigError, ContractError
from src.policy.gaussian import GaussianBatch, batch_kl
from src.ppo.agent import ActorCritic
from src.ppo.batch import collect_batch, compute_advantages
from src.ppo.surrogate import (
    adaptive_beta_update,
    importance_ratio,
    surrogate_cim,
    surrogate_clip,
    surrogate_kl,
)


VARIANTS = ("clip", "kl", "cim")
SIGMA_MODES = ("fixed", "silverman")


@dataclass
class PenaltyConfig:
    """
    一次训练的全部超参数 (默认值见 config.py)
    只有当前变体用到的字段生效
    """

    variant:             Literal["clip", "kl", "cim"] = "clip"
    clip_epsilon:        float = config.CLIP_EPSILON
    beta_init:           float = config.KL_BETA_INIT
    d_targ:              float = config.KL_D_TARG
    alpha:               float = config.CIM_ALPHA
    kernel:              str = config.CIM_KERNEL
    bandwidth:           float = config.CIM_BANDWIDTH
    sigma_mode:          str = config.CIM_SIGMA_MODE
    noise_draws:         int = config.CIM_NOISE_DRAWS
    gamma:               float = config.GAMMA
    actor_lr:            float = config.ACTOR_LR
    critic_lr:           float = config.CRITIC_LR
    batch_size:          int = config.BATCH_SIZE
    actor_update_steps:  int = config.ACTOR_UPDATE_STEPS
    critic_update_steps: int = config.CRITIC_UPDATE_STEPS
    optimizer:           str = config.OPTIMIZER

    def validate(self) -> None:
        """
        Raises:
            ConfigError: 任一字段取值非法
        """
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant '{self.variant}', expected one of {VARIANTS}")
        if not self.clip_epsilon > 0:
            raise ConfigError("clip_epsilon must be positive")
        if not (self.beta_init >= 0 and math.isfinite(self.beta_init)):
            raise ConfigError("beta_init must be finite and >= 0")
        if not self.d_targ > 0:
            raise ConfigError("d_targ must be positive")
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ConfigError("alpha must be finite and >= 0")
        try:
            parse_family(self.kernel)
        except ContractError as e:
            raise ConfigError(str(e)) from e
        if not (self.bandwidth > 0 and math.isfinite(self.bandwidth)):
            raise ConfigError("bandwidth must be positive")
        if self.sigma_mode not in SIGMA_MODES:
            raise ConfigError(f"unknown sigma_mode '{self.sigma_mode}', expected one of {SIGMA_MODES}")
        if self.noise_draws < 1:
            raise ConfigError("noise_draws must be >= 1")
        if not 0 < self.gamma <= 1:
            raise ConfigError("gamma must lie in (0, 1]")
        if not (self.actor_lr > 0 and self.critic_lr > 0):
            raise ConfigError("learning rates must be positive")
        if self.batch_size < 1 or self.actor_update_steps < 1 or self.critic_update_steps < 1:
            raise ConfigError("batch_size and update step counts must be >= 1")
        if self.optimizer not in OPTIMIZER_KINDS:
            raise ConfigError(f"unknown optimizer '{self.optimizer}', expected one of {OPTIMIZER_KINDS}")


@dataclass
class IterationRecord:
    """
    每次迭代追加一条
    """

    iteration:            int
    return_mean:          float  # 最近若干个完整回合的平均回报
    penalty_value:        float  # clip: 裁剪比例; kl: 平均 KL; cim: CIM 值
    beta:                 float
    actor_loss:           float
    critic_loss:          float
    env_steps:            int    # 累计环境步数
    wall_time_s:          float
    nonfinite_grad_count: int    # 累计跳过的优化步数
    sigma_clamp_count:    int = 0


@dataclass
class RunLog:
    config:   PenaltyConfig
    env_name: str
    seed:     int
    records:  list[IterationRecord] = field(default_factory=list)


def _action_scale(spec: EnvSpec) -> np.ndarray | None:
    """对称的动作边界才把均值压进边界"""
    low, high = np.asarray(spec.action_low), np.asarray(spec.action_high)
    return high if np.array_equal(low, -high) else None


class Trainer:
    """
    单个种子的训练过程 (严格顺序: 采样 → critic → actor → 记录)
    """

    def __init__(
        self,
        cfg: PenaltyConfig,
        env: str | BaseEnv,
        seed: int,
        record_wall_time: bool = False,
    ):
        """
        Args:
            cfg (PenaltyConfig): 超参数
            env (str | BaseEnv): 环境名或环境实例 (独占)
            seed (int): 随机种子
            record_wall_time (bool): 是否记录真实耗时 (否则写 0.0 以保证逐位可复现)
        """
        cfg.validate()
        self.cfg = cfg
        self.env = make_env(env) if isinstance(env, str) else env
        self.seed = int(seed)
        self.record_wall_time = record_wall_time

        init_seq, env_seq, noise_seq = np.random.SeedSequence(self.seed).spawn(3)
        self.rollout_rng = np.random.default_rng(env_seq)
        self.noise_rng = np.random.default_rng(noise_seq)

        spec = self.env.spec
        self.agent = ActorCritic(spec.state_dim, spec.action_dim, np.random.default_rng(init_seq),
                                 action_scale=_action_scale(spec))
        self.actor_opt = make_optimizer(cfg.optimizer, cfg.actor_lr, self.agent.actor_params(), name="actor")
        self.critic_opt = make_optimizer(cfg.optimizer, cfg.critic_lr, self.agent.critic.params, name="critic")

        self.kernel = Kernel(cfg.kernel, cfg.bandwidth)
        self.beta = float(cfg.beta_init)
        self.tape = Tape()

        self.iteration = 0
        self.env_steps = 0
        self.completed_returns: deque[float] = deque(maxlen=config.RETURN_WINDOW)
        self._started = time.perf_counter()

    # === 内部步骤 ===

    def _collect(self) -> Trajectory:
        batch = collect_batch(self.env, self.agent, self.cfg.batch_size, self.rollout_rng)
        self.env_steps += len(batch)
        self.completed_returns.extend(batch.episode_returns)
        return compute_advantages(batch, self.agent.critic, self.cfg.gamma)

    def _draw_noise(self, batch_size: int) -> np.ndarray:
        shape = (batch_size, self.agent.action_dim)
        if self.cfg.noise_draws > 1:
            shape = (self.cfg.noise_draws, *shape)
        return self.noise_rng.standard_normal(shape)

    def _iteration_kernel(self, batch: Trajectory) -> Kernel:
        if self.cfg.sigma_mode == "silverman":
            return self.kernel.with_bandwidth(silverman_bandwidth(batch.actions))
        return self.kernel

    def _objective(self, batch: Trajectory, new: GaussianBatch, old: GaussianBatch,
                   kernel: Kernel, noise: np.ndarray | None) -> Tensor:
        match self.cfg.variant:
            case "clip":
                return surrogate_clip(batch, new, self.cfg.clip_epsilon)
            case "kl":
                return surrogate_kl(batch, new, old, self.beta)
            case _:
                return surrogate_cim(batch, new, old, self.cfg.alpha, kernel, noise)

    def _actor_gradient(self, batch: Trajectory, old: GaussianBatch, kernel: Kernel,
                        noise: np.ndarray | None) -> tuple[float, list[Tensor]]:
        self.tape.reset()
        params = [self.tape.variable(p) for p in self.agent.actor_params()]
        new = self.agent.distribution(batch.states, params)
        loss = -self._objective(batch, new, old, kernel, noise)
        grads = self.tape.gradient(loss, params)
        return loss.item(), grads

    def _fit_critic(self, batch: Trajectory) -> float:
        critic = self.agent.critic
        n = len(batch)
        loss_value = 0.0
        for _ in range(self.cfg.critic_update_steps):
            self.tape.reset()
            params = [self.tape.variable(p) for p in critic.params]
            v = critic.forward(batch.states, params).reshape(n)
            loss = (v - batch.returns).square().mean()
            grads = self.tape.gradient(loss, params)
            critic.params = optimizer_step(self.critic_opt, critic.params, grads)
            loss_value = loss.item()
        return loss_value

    def _update_actor(self, batch: Trajectory, old: GaussianBatch,
                      kernel: Kernel) -> tuple[float, np.ndarray | None, int]:
        loss_value = 0.0
        noise = None
        clamped = 0
        for _ in range(self.cfg.actor_update_steps):
            noise = self._draw_noise(len(batch)) if self.cfg.variant == "cim" else None
            loss_value, grads = self._actor_gradient(batch, old, kernel, noise)
            self.agent.set_actor_params(optimizer_step(self.actor_opt, self.agent.actor_params(), grads))
            clamped += self.agent.clamp_log_std(config.SIGMA_FLOOR)
        return loss_value, noise, clamped

    def _penalty_value(self, batch: Trajectory, old: GaussianBatch, kernel: Kernel,
                       noise: np.ndarray | None) -> float:
        new = self.agent.frozen_distribution(batch.states)
        match self.cfg.variant:
            case "clip":
                rho = importance_ratio(batch, new).data
                return float(np.mean(np.abs(rho - 1.0) > self.cfg.clip_epsilon))
            case "kl":
                return batch_kl(old, new).mean().item()
            case _:
                return cim_penalty(kernel, old, new, noise).item()

    def _return_metric(self, batch: Trajectory) -> float:
        if self.completed_returns:
            return float(np.mean(self.completed_returns))
        return float(np.mean(batch.rewards)) * self.env.spec.max_steps

    # === 对外接口 ===

    def first_step_gradient(self) -> list[np.ndarray]:
        """
        采一批数据并返回第一次 actor 更新的梯度 (不更新参数)
        """
        batch = self._collect()
        old_dist = self.agent.frozen_distribution(batch.states)
        noise = self._draw_noise(len(batch)) if self.cfg.variant == "cim" else None
        _, grads = self._actor_gradient(batch, old_dist, self._iteration_kernel(batch), noise)
        return [g.data for g in grads]

    def step(self) -> IterationRecord:
        """
        执行一次训练迭代
        """
        snapshot = self.agent.copy()
        batch = self._collect()
        old = snapshot.frozen_distribution(batch.states)

        critic_loss = self._fit_critic(batch)
        kernel = self._iteration_kernel(batch)
        actor_loss, noise, clamped = self._update_actor(batch, old, kernel)
        if clamped:
            logger.warning(f"种子 {self.seed} 第 {self.iteration} 次迭代: σ 触及下限 {config.SIGMA_FLOOR}，共抬升 {clamped} 次")

        penalty = self._penalty_value(batch, old, kernel, noise)
        if self.cfg.variant == "kl":
            self.beta = adaptive_beta_update(self.beta, penalty, self.cfg.d_targ)

        record = IterationRecord(
            iteration=self.iteration,
            return_mean=self._return_metric(batch),
            penalty_value=penalty,
            beta=self.beta,
            actor_loss=actor_loss,
            critic_loss=critic_loss,
            env_steps=self.env_steps,
            wall_time_s=time.perf_counter() - self._started if self.record_wall_time else 0.0,
            nonfinite_grad_count=self.actor_opt.skipped + self.critic_opt.skipped,
            sigma_clamp_count=clamped,
        )
        logger.debug(
            f"[{self.cfg.variant}] seed={self.seed} iter={record.iteration} "
            f"return={record.return_mean:.3f} penalty={record.penalty_value:.5f} beta={record.beta:.4f}"
        )
        self.iteration += 1
        return record

    def run(self, iterations: int, on_record: Callable[[IterationRecord], None] | None = None) -> RunLog:
        """
        Args:
            iterations (int): 迭代次数 (≥ 1)
            on_record: 每条记录产生后的回调 (用于增量写 CSV)
        """
        if iterations < 1:
            raise ContractError("iterations must be >= 1")
        log = RunLog(config=self.cfg, env_name=self.env.spec.name, seed=self.seed)
        for _ in range(iterations):
            record = self.step()
            log.records.append(record)
            if on_record is not None:
                on_record(record)
        return log


def train(
    cfg: PenaltyConfig,
    env: str | BaseEnv,
    seed: int,
    iterations: int,
    on_record: Callable[[IterationRecord], None] | None = None,
    record_wall_time: bool = False,
) -> RunLog:
    """
    训练一个种子

    Args:
        cfg (PenaltyConfig): 超参数
        env (str | BaseEnv): 环境名 ("pendulum" / "pointmass") 或环境实例
        seed (int): 随机种子
        iterations (int): 迭代次数
        on_record: 每次迭代后的回调
        record_wall_time (bool): 是否记录耗时
    Returns:
        RunLog: 每次迭代一条记录
    """
    trainer = Trainer(cfg, env, seed, record_wall_time=record_wall_time)
    logger.debug(f"开始训练 variant={cfg.variant} env={trainer.env.spec.name} seed={seed} 配置={asdict(cfg)}")
    return trainer.run(iterations, on_record)


__all__ = [
    "VARIANTS",
    "SIGMA_MODES",
    "PenaltyConfig",
    "IterationRecord",
    "RunLog",
    "Trainer",
    "train",
]
