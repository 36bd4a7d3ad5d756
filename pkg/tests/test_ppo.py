# test_ppo.py
# 优势估计 / 代理目标 / β 控制器 / 训练循环测试
#
# @date 26-10-18
#

import math

import numpy as np
import pytest

from src.autodiff import Mlp, Tape
from src.correntropy import Kernel
from src.envs import BaseEnv, EnvSpec, StepResult
from src.errors import ConfigError, ContractError
from src.policy import GaussianBatch, batch_log_prob
from src.ppo import (
    ActorCritic,
    PenaltyConfig,
    Trainer,
    Trajectory,
    adaptive_beta_update,
    compute_advantages,
    importance_ratio,
    normalize_advantages,
    surrogate_cim,
    surrogate_clip,
    surrogate_kl,
    train,
)


SMALL = dict(batch_size=16, actor_update_steps=2, critic_update_steps=2)


def make_traj(rewards, dones, states=None, actions=None, log_probs=None) -> Trajectory:
    n = len(rewards)
    return Trajectory(
        states=np.zeros((n, 2)) if states is None else np.asarray(states, dtype=float),
        actions=np.zeros((n, 1)) if actions is None else np.asarray(actions, dtype=float),
        rewards=np.asarray(rewards, dtype=float),
        log_probs=np.zeros(n) if log_probs is None else np.asarray(log_probs, dtype=float),
        dones=np.asarray(dones, dtype=bool),
        final_state=np.zeros(2),
    )


def one_state_batch(action: float, advantage: float) -> tuple[Trajectory, GaussianBatch]:
    """单状态批次，行为策略为 N(0, 1)"""
    old = GaussianBatch(np.zeros((1, 1)), np.ones(1))
    logp = batch_log_prob(old, np.array([[action]])).data
    traj = make_traj([0.0], [True], states=np.zeros((1, 2)), actions=[[action]], log_probs=logp)
    return traj.with_estimates(np.zeros(1), np.zeros(1), np.array([advantage])), old


class ZeroRewardEnv(BaseEnv):
    """奖励恒为 0 的一维质点"""

    spec = EnvSpec("zero", state_dim=2, action_dim=1, action_low=(-1.0,), action_high=(1.0,), max_steps=20)

    def _reset_state(self, rng):
        return np.array([rng.uniform(-1.0, 1.0), 0.0])

    def _advance(self, state, action, t):
        x, v = state
        v = v + 0.1 * float(action[0])
        return StepResult(np.array([x + 0.1 * v, v]), 0.0, t + 1 >= self.spec.max_steps)


class ShiftedActionEnv(ZeroRewardEnv):
    """动作边界不对称"""

    spec = EnvSpec("shifted", state_dim=2, action_dim=1, action_low=(0.0,), action_high=(1.0,), max_steps=20)


# === 优势估计 ===

def test_discounted_returns():
    traj = compute_advantages(make_traj([1.0, 1.0, 1.0], [False, False, True]), Mlp((2, 4, 1)), 0.9,
                              normalize=False)
    assert np.allclose(traj.returns, [2.71, 1.9, 1.0])


def test_returns_reset_at_episode_boundary():
    traj = compute_advantages(make_traj([1.0, 1.0, 1.0], [False, True, True]), Mlp((2, 4, 1)), 0.5,
                              normalize=False)
    assert np.allclose(traj.returns, [1.5, 1.0, 1.0])


def test_truncated_segment_bootstraps_from_critic():
    critic = Mlp((2, 1))
    critic.params = [np.zeros((2, 1)), np.array([2.0])]  # V ≡ 2
    traj = compute_advantages(make_traj([1.0], [False]), critic, 0.5, normalize=False)
    assert traj.returns[0] == pytest.approx(2.0)
    assert traj.advantages[0] == pytest.approx(0.0)


def test_zero_critic_zero_reward_gives_zero_advantages():
    traj = compute_advantages(make_traj([0.0] * 4, [False, False, False, True]), Mlp((2, 3, 1)), 0.9)
    assert np.array_equal(traj.advantages, np.zeros(4))


def test_constant_advantages_normalize_to_zero():
    assert np.array_equal(normalize_advantages(np.full(5, 3.2)), np.zeros(5))


def test_normalized_advantages_have_unit_spread():
    adv = normalize_advantages(np.array([1.0, 2.0, 4.0, 8.0]))
    assert adv.mean() == pytest.approx(0.0, abs=1e-12)
    assert adv.std() == pytest.approx(1.0)


def test_empty_trajectory_rejected():
    empty = Trajectory(np.zeros((0, 2)), np.zeros((0, 1)), np.zeros(0), np.zeros(0), np.zeros(0, bool), np.zeros(2))
    with pytest.raises(ContractError):
        compute_advantages(empty, Mlp((2, 1)), 0.9)


# === 代理目标 ===

def test_clip_objective_with_unit_ratio_is_mean_advantage():
    traj, old = one_state_batch(0.3, 1.7)
    assert surrogate_clip(traj, old, 0.2).item() == pytest.approx(1.7)


def test_clip_caps_positive_advantage():
    traj, old = one_state_batch(0.0, 1.0)
    new = GaussianBatch(np.zeros((1, 1)), np.full(1, 1 / 1.3))  # 在 a = 0 处 ρ = 1.3
    assert importance_ratio(traj, new).item() == pytest.approx(1.3)
    assert surrogate_clip(traj, new, 0.2).item() == pytest.approx(1.2)


def test_clip_keeps_pessimistic_branch_for_negative_advantage():
    traj, old = one_state_batch(0.0, -1.0)
    new = GaussianBatch(np.zeros((1, 1)), np.full(1, 2.0))  # ρ = 0.5
    assert importance_ratio(traj, new).item() == pytest.approx(0.5)
    assert surrogate_clip(traj, new, 0.2).item() == pytest.approx(-0.8)


def test_kl_objective_unchanged_policy():
    traj, old = one_state_batch(0.4, 0.6)
    assert surrogate_kl(traj, old, old, 0.5).item() == pytest.approx(0.6)


def test_kl_objective_shifted_policy():
    traj, old = one_state_batch(0.0, 0.0)
    new = GaussianBatch(np.ones((1, 1)), np.ones(1))
    assert surrogate_kl(traj, new, old, 0.5).item() == pytest.approx(-0.25)


def test_kl_objective_without_penalty_is_importance_weighted():
    traj, old = one_state_batch(0.5, 2.0)
    new = GaussianBatch(np.full((1, 1), 0.2), np.ones(1))
    rho = importance_ratio(traj, new).item()
    assert surrogate_kl(traj, new, old, 0.0).item() == pytest.approx(rho * 2.0)


def test_cim_objective_shifted_policy():
    traj, old = one_state_batch(0.0, 0.0)
    new = GaussianBatch(np.ones((1, 1)), np.ones(1))
    noise = np.random.default_rng(0).standard_normal((1, 1))
    value = surrogate_cim(traj, new, old, 1.0, Kernel("gaussian", 1.0), noise).item()
    assert value == pytest.approx(-math.sqrt(1 - math.exp(-0.5)), abs=1e-12)
    assert value == pytest.approx(-0.627271, abs=1e-6)


def test_cim_objective_unchanged_policy():
    traj, old = one_state_batch(-0.3, 0.9)
    noise = np.random.default_rng(1).standard_normal((1, 1))
    assert surrogate_cim(traj, old, old, 1.0, Kernel(), noise).item() == pytest.approx(0.9)


def test_objective_needs_advantages():
    traj = make_traj([0.0], [True])
    old = GaussianBatch(np.zeros((1, 1)), np.ones(1))
    with pytest.raises(ContractError):
        surrogate_clip(traj, old, 0.2)


def test_cim_objective_gradient_flows_to_new_policy():
    traj, old = one_state_batch(0.0, 0.0)
    tape = Tape()
    mu = tape.variable(np.full((1, 1), 0.7))
    objective = surrogate_cim(traj, GaussianBatch(mu, np.ones(1)), old, 1.0, Kernel(), np.zeros((1, 1)))
    (g,) = tape.gradient(objective, [mu])
    # 目标 = −CIM，均值远离旧策略时梯度指向旧策略
    assert g.data[0, 0] < 0.0


# === β 控制器 ===

@pytest.mark.parametrize("d, expected", [(0.05, 0.25), (0.2, 1.0), (0.1, 0.5)])
def test_beta_controller(d, expected):
    assert adaptive_beta_update(0.5, d, 0.1) == expected


def test_beta_controller_rejects_bad_input():
    with pytest.raises(ContractError):
        adaptive_beta_update(0.5, -0.1, 0.1)
    with pytest.raises(ContractError):
        adaptive_beta_update(0.5, 0.1, 0.0)


# === 配置 ===

@pytest.mark.parametrize(
    "override",
    [
        dict(variant="trpo"),
        dict(clip_epsilon=0.0),
        dict(beta_init=-1.0),
        dict(alpha=-0.5),
        dict(kernel="cosine"),
        dict(bandwidth=0.0),
        dict(sigma_mode="scott"),
        dict(gamma=1.5),
        dict(batch_size=0),
        dict(optimizer="rmsprop"),
    ],
)
def test_penalty_config_validation(override):
    with pytest.raises(ConfigError):
        PenaltyConfig(**override).validate()


# === 策略均值头 ===

def test_bounded_mean_stays_inside_action_range():
    agent = ActorCritic(3, 1, np.random.default_rng(11), action_scale=[2.0])
    agent.actor.params = [p * 500.0 for p in agent.actor.params]
    states = np.random.default_rng(12).normal(0.0, 5.0, (64, 3))
    mu = agent.frozen_distribution(states).mu
    assert np.all(np.abs(mu) <= 2.0)
    assert np.max(np.abs(mu)) > 1.9


def test_unbounded_mean_is_linear_head():
    agent = ActorCritic(3, 1, np.random.default_rng(11))
    states = np.random.default_rng(12).normal(size=(4, 3))
    assert np.allclose(agent.frozen_distribution(states).mu, agent.actor.forward(states).data)


@pytest.mark.parametrize("scale", [[0.0], [-1.0], [1.0, 1.0]])
def test_action_scale_validation(scale):
    with pytest.raises(ContractError):
        ActorCritic(3, 1, np.random.default_rng(0), action_scale=scale)


def test_trainer_bounds_mean_by_env_action_range():
    assert np.array_equal(Trainer(PenaltyConfig(**SMALL), "pendulum", seed=0).agent.action_scale, [2.0])
    assert np.array_equal(Trainer(PenaltyConfig(**SMALL), ZeroRewardEnv(), seed=0).agent.action_scale, [1.0])
    assert Trainer(PenaltyConfig(**SMALL), ShiftedActionEnv(), seed=0).agent.action_scale is None


def test_large_actor_steps_keep_mean_in_bounds():
    cfg = PenaltyConfig(variant="clip", actor_lr=0.1, **SMALL)
    trainer = Trainer(cfg, "pendulum", seed=12)
    trainer.run(3)
    batch = trainer._collect()
    assert np.all(np.abs(trainer.agent.frozen_distribution(batch.states).mu) <= 2.0)


# === 训练循环 ===

@pytest.mark.parametrize("variant", ["clip", "kl", "cim"])
def test_single_iteration(variant):
    cfg = PenaltyConfig(variant=variant, **SMALL)
    trainer = Trainer(cfg, "pendulum", seed=0)
    before = [p.copy() for p in trainer.agent.actor_params()]
    log = trainer.run(1)

    assert len(log.records) == 1
    record = log.records[0]
    assert record.iteration == 0
    assert record.env_steps == cfg.batch_size
    assert record.wall_time_s == 0.0
    assert record.nonfinite_grad_count == 0
    assert math.isfinite(record.return_mean)
    assert record.penalty_value >= 0.0
    after = trainer.agent.actor_params()
    assert any(not np.array_equal(a, b) for a, b in zip(before, after))


def test_kl_variant_updates_beta():
    cfg = PenaltyConfig(variant="kl", **SMALL)
    log = train(cfg, "pointmass", seed=1, iterations=3)
    betas = [r.beta for r in log.records]
    for r in log.records:
        assert math.isfinite(r.beta) and r.beta > 0
    assert set(betas) <= {cfg.beta_init * 2.0 ** k for k in range(-3, 4)}


def test_clip_variant_keeps_beta_fixed():
    log = train(PenaltyConfig(variant="clip", **SMALL), "pointmass", seed=1, iterations=2)
    assert all(r.beta == PenaltyConfig().beta_init for r in log.records)


def test_zero_reward_leaves_clip_actor_unchanged():
    trainer = Trainer(PenaltyConfig(variant="clip", **SMALL), ZeroRewardEnv(), seed=2)
    trainer.agent.critic.params = [np.zeros_like(p) for p in trainer.agent.critic.params]
    before = [p.copy() for p in trainer.agent.actor_params()]
    trainer.step()
    for a, b in zip(before, trainer.agent.actor_params()):
        assert np.array_equal(a, b)


def test_ratio_is_one_on_first_update():
    trainer = Trainer(PenaltyConfig(variant="clip", **SMALL), "pendulum", seed=3)
    batch = trainer._collect()
    rho = importance_ratio(batch, trainer.agent.frozen_distribution(batch.states)).data
    assert np.allclose(rho, 1.0, atol=1e-12)


def test_unpenalized_variants_share_first_gradient():
    grads = {}
    for variant in ("clip", "kl", "cim"):
        cfg = PenaltyConfig(variant=variant, clip_epsilon=math.inf, beta_init=0.0, alpha=0.0, **SMALL)
        grads[variant] = Trainer(cfg, "pendulum", seed=4).first_step_gradient()
    for variant in ("kl", "cim"):
        for a, b in zip(grads["clip"], grads[variant]):
            assert np.allclose(a, b, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("variant", ["clip", "kl", "cim"])
def test_training_is_deterministic(variant):
    cfg = PenaltyConfig(variant=variant, **SMALL)
    a = train(cfg, "pendulum", seed=5, iterations=2)
    b = train(cfg, "pendulum", seed=5, iterations=2)
    assert a.records == b.records


def test_different_seeds_differ():
    cfg = PenaltyConfig(variant="clip", **SMALL)
    a = train(cfg, "pendulum", seed=6, iterations=1)
    b = train(cfg, "pendulum", seed=7, iterations=1)
    assert a.records != b.records


def test_on_record_callback_sees_every_iteration():
    seen = []
    train(PenaltyConfig(variant="cim", **SMALL), "pointmass", seed=8, iterations=3, on_record=seen.append)
    assert [r.iteration for r in seen] == [0, 1, 2]


def test_silverman_bandwidth_mode_runs():
    cfg = PenaltyConfig(variant="cim", sigma_mode="silverman", noise_draws=3, **SMALL)
    log = train(cfg, "pointmass", seed=9, iterations=1)
    assert math.isfinite(log.records[0].penalty_value)


def test_return_metric_uses_completed_episodes():
    cfg = PenaltyConfig(variant="clip", batch_size=50, actor_update_steps=1, critic_update_steps=1)
    trainer = Trainer(cfg, ZeroRewardEnv(), seed=10)
    record = trainer.step()
    assert record.return_mean == 0.0
    assert len(trainer.completed_returns) == 2


def test_iterations_must_be_positive():
    with pytest.raises(ContractError):
        Trainer(PenaltyConfig(**SMALL), "pointmass", seed=0).run(0)
