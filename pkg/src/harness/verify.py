# verify.py
# 数学性质校验套件 (KL 预言机 / 非对称 / CIM 度量 / Pinsker / Taylor / 梯度 / β 控制器)
#
# @date 26-10-18
#

"""
每个套件返回一个 SuiteResult。被测函数一律通过模块属性调用
(gaussian.kl_closed_form 而不是直接 import 函数)，这样测试可以替换实现做故障注入。
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.stats import norm

from src import config
from src import logger
from src.autodiff import tensor as ad
from src.correntropy import kernel as kern
from src.correntropy import metric
from src.envs.rollout import Trajectory
from src.policy import gaussian
from src.ppo import surrogate
from src.ppo.agent import ActorCritic


@dataclass
class SuiteResult:
    name:     str
    passed:   bool = True
    checks:   int = 0
    failures: list[str] = field(default_factory=list)
    notes:    list[str] = field(default_factory=list)

    def check(self, ok: bool, message: str) -> None:
        self.checks += 1
        if not ok:
            self.passed = False
            if len(self.failures) < 20:
                self.failures.append(message)


def _close(a: float, b: float, rel: float, atol: float) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b)) + atol


def _random_pair(rng: np.random.Generator, n: int) -> tuple[gaussian.DiagGaussian, gaussian.DiagGaussian]:
    p = gaussian.DiagGaussian(rng.uniform(-3, 3, n), rng.uniform(0.05, 5, n))
    q = gaussian.DiagGaussian(rng.uniform(-3, 3, n), rng.uniform(0.05, 5, n))
    return p, q


# === KL ===

def _kl_quadrature(p: gaussian.DiagGaussian, q: gaussian.DiagGaussian) -> float:
    mp, sp = float(p.mu[0]), float(p.sigma[0])
    mq, sq = float(q.mu[0]), float(q.sigma[0])

    def integrand(x: float) -> float:
        lp = norm.logpdf(x, mp, sp)
        return math.exp(lp) * (lp - norm.logpdf(x, mq, sq))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, _ = integrate.quad(integrand, mp - 15 * sp, mp + 15 * sp, points=[mp],
                                  limit=500, epsabs=1e-13, epsrel=1e-13)
    return value


def kl_suite(pairs: int | None = None, mc_samples: int | None = None, seed: int = 0) -> SuiteResult:
    """
    一维: 与数值积分比对 (1e-8，按量级放缩)；多维: 与 Monte-Carlo 比对 (VERIFY_MC_SIGMAS 倍标准误)
    """
    pairs = pairs or config.VERIFY_PAIRS
    mc_samples = mc_samples or config.VERIFY_MC_SAMPLES
    rng = np.random.default_rng(seed)
    result = SuiteResult("kl")

    for i in range(pairs):
        n = (1, 2, 4)[i % 3]
        p, q = _random_pair(rng, n)
        kl = gaussian.kl_closed_form(p, q)
        if n == 1:
            oracle = _kl_quadrature(p, q)
            result.check(abs(kl - oracle) <= 1e-8 * max(1.0, abs(oracle)),
                         f"pair {i} (n=1): closed form {kl!r} vs quadrature {oracle!r}")
        else:
            x = p.mu + p.sigma * rng.standard_normal((mc_samples, n))
            log_ratio = np.sum(norm.logpdf(x, p.mu, p.sigma) - norm.logpdf(x, q.mu, q.sigma), axis=1)
            mean = float(np.mean(log_ratio))
            se = float(np.std(log_ratio) / math.sqrt(mc_samples))
            result.check(abs(kl - mean) <= config.VERIFY_MC_SIGMAS * se + 1e-12,
                         f"pair {i} (n={n}): closed form {kl!r} vs Monte-Carlo {mean!r} ± {se:.3g}")
    return result


def asymmetry_suite(pairs: int | None = None, seed: int = 1) -> SuiteResult:
    """
    直接公式与正反向闭式解之差一致；μ1=1, μ2=2, σ∈[0.01, 10] 网格上最大差 ≥ 10⁴
    """
    pairs = pairs or config.VERIFY_PAIRS
    rng = np.random.default_rng(seed)
    result = SuiteResult("asymmetry")

    for i in range(pairs):
        p, q = _random_pair(rng, (1, 2, 4)[i % 3])
        pair = gaussian.kl_asymmetry(p, q)
        direct = gaussian.asymmetry_closed_form(p, q)
        scale = max(1.0, abs(pair.forward), abs(pair.reverse))
        result.check(abs(direct - pair.asymmetry) <= 1e-9 * scale,
                     f"pair {i}: direct {direct!r} vs forward-reverse {pair.asymmetry!r}")

        same = gaussian.DiagGaussian(q.mu, p.sigma)
        result.check(gaussian.kl_asymmetry(p, same).asymmetry == 0.0,
                     f"pair {i}: equal sigmas must give zero asymmetry")

    rows = gaussian.kl_grid(1.0, 2.0, np.geomspace(0.01, 10.0, 50))
    biggest = max(r[4] for r in rows)
    result.check(biggest >= 1e4, f"max |difference| on the grid is {biggest:.4g}, expected >= 1e4")
    result.notes.append(f"max |difference| = {biggest:.4g}")
    return result


# === CIM ===

def cim_suite(triples: int | None = None, seed: int = 2) -> SuiteResult:
    """
    非负 / 自身为零 / 逐位对称 / 三角不等式 / 有界；矩形核的三角不等式只报告
    """
    triples = triples or config.VERIFY_CIM_TRIPLES
    rng = np.random.default_rng(seed)
    result = SuiteResult("cim")

    for family in kern.KERNEL_FAMILIES:
        asserted = family in kern.METRIC_FAMILIES
        violations = 0
        for i in range(triples):
            n = int(rng.integers(1, 17))
            d = int(rng.integers(1, 4))
            scale = rng.uniform(0.1, 3.0)
            k = kern.Kernel(family, rng.uniform(0.2, 3.0))
            xs, ys, zs = (scale * rng.standard_normal((n, d)) for _ in range(3))

            c_xy = metric.cim(k, xs, ys)
            c_yx = metric.cim(k, ys, xs)
            c_yz = metric.cim(k, ys, zs)
            c_xz = metric.cim(k, xs, zs)

            result.check(c_xy >= 0.0, f"{family} triple {i}: negative cim {c_xy!r}")
            result.check(metric.cim(k, xs, xs) == 0.0, f"{family} triple {i}: cim(x, x) != 0")
            result.check(c_xy == c_yx, f"{family} triple {i}: asymmetric cim {c_xy!r} vs {c_yx!r}")
            result.check(c_xy <= math.sqrt(k.peak) + 1e-15, f"{family} triple {i}: cim {c_xy!r} above sqrt(k(0))")
            if family == "gaussian":
                # 数学上严格小于 1，但 κ < 1e-16 时 1 − κ 舍入为 1
                result.check(c_xy <= 1.0, f"gaussian triple {i}: cim {c_xy!r} above 1")

            triangle = c_xz <= c_xy + c_yz + 1e-12
            if asserted:
                result.check(triangle, f"{family} triple {i}: {c_xz!r} > {c_xy!r} + {c_yz!r}")
            elif not triangle:
                violations += 1

        if not asserted:
            result.notes.append(f"{family}: triangle inequality failed on {violations}/{triples} triples (reported only)")
    return result


# === Pinsker ===

def pinsker_suite(pairs: int | None = None, samples: int | None = None, seed: int = 3) -> SuiteResult:
    pairs = pairs or config.VERIFY_PINSKER_PAIRS
    samples = samples or config.VERIFY_PINSKER_SAMPLES
    rng = np.random.default_rng(seed)
    result = SuiteResult("pinsker")

    for i in range(pairs):
        p, q = _random_pair(rng, (1, 2, 4)[i % 3])
        res = gaussian.pinsker_check(p, q, samples, rng)
        result.check(res.holds, f"pair {i}: tv^2 {res.tv_estimate ** 2:.6g} > kl {res.kl:.6g}")
    return result


# === Taylor ===

def taylor_suite(points: int = 50) -> SuiteResult:
    result = SuiteResult("taylor")
    for sigma_k in (0.5, 1.0, 2.0):
        k = kern.Kernel("gaussian", sigma_k)
        for ratio in np.linspace(0.0, 2.0, points):
            r = float(ratio * sigma_k)
            partial = metric.gaussian_taylor_partial_sum(r, sigma_k, 20)
            exact = kern.kernel_eval(k, [r])
            result.check(abs(partial - exact) <= 1e-9,
                         f"r={r:.4f}, sigma_k={sigma_k}: partial {partial!r} vs exact {exact!r}")
    return result


# === 梯度 ===

def _op_cases(rng: np.random.Generator) -> dict[str, tuple[Callable[..., ad.Tensor], list[np.ndarray]]]:
    x = rng.uniform(-1.0, 1.0, (2, 3))
    y = rng.uniform(-1.0, 1.0, (2, 3))
    # 分段算子的输入避开折点
    apart = x + rng.choice([-1.0, 1.0], (2, 3)) * rng.uniform(0.01, 1.0, (2, 3))
    magnitude = np.where(rng.uniform(size=(2, 3)) < 0.5, rng.uniform(0.0, 0.45, (2, 3)), rng.uniform(0.55, 1.0, (2, 3)))
    off_kink = rng.choice([-1.0, 1.0], (2, 3)) * magnitude
    pos = rng.uniform(0.5, 2.0, (2, 3))
    row = rng.uniform(0.5, 2.0, 3)
    w = rng.uniform(-1.0, 1.0, (3, 4))
    cond = rng.uniform(size=(2, 3)) > 0.5
    return {
        "add":      (lambda a, b: a + b, [x, row]),
        "sub":      (lambda a, b: a - b, [x, y]),
        "mul":      (lambda a, b: a * b, [x, y]),
        "div":      (lambda a, b: a / b, [x, pos]),
        "neg":      (lambda a: -a, [x]),
        "matmul":   (lambda a, b: a @ b, [x, w]),
        "tanh":     (lambda a: a.tanh(), [x]),
        "exp":      (lambda a: a.exp(), [x]),
        "log":      (lambda a: a.log(), [pos]),
        "sqrt":     (lambda a: a.sqrt(), [pos]),
        "square":   (lambda a: a.square(), [x]),
        "sum":      (lambda a: a.sum(axis=1), [x]),
        "mean":     (lambda a: a.mean(axis=0), [x]),
        "maximum":  (lambda a, b: ad.maximum(a, b), [x, apart]),
        "minimum":  (lambda a, b: ad.minimum(a, b), [x, apart]),
        "clip":     (lambda a: a.clip(-0.5, 0.5), [off_kink]),
        "where":    (lambda a, b: ad.where(cond, a, b), [x, y]),
        "norm":     (lambda a: a.norm(), [pos]),
        "reshape":  (lambda a: a.reshape(3, 2), [x]),
    }


def _compare_grads(result: SuiteResult, label: str, f: Callable[..., ad.Tensor], at: list[np.ndarray],
                   rel: float) -> None:
    analytic = [g.data for g in ad.grad(f, at)]
    numeric = ad.finite_difference_grad(f, at)
    for k, (a, b) in enumerate(zip(analytic, numeric)):
        ok = all(_close(float(u), float(v), rel, 1e-6) for u, v in zip(a.ravel(), b.ravel()))
        result.check(ok, f"{label}: input {k} gradient differs from finite differences (max abs diff "
                         f"{float(np.max(np.abs(a - b))):.3g})")


def _tiny_batch(rng: np.random.Generator, old: ActorCritic, size: int = 8) -> Trajectory:
    states = rng.standard_normal((size, old.state_dim))
    actions = rng.standard_normal((size, old.action_dim))
    log_probs = gaussian.batch_log_prob(old.frozen_distribution(states), actions).data
    adv = rng.standard_normal(size)
    return Trajectory(
        states=states,
        actions=actions,
        rewards=np.zeros(size),
        log_probs=log_probs,
        dones=np.zeros(size, dtype=bool),
        final_state=states[-1],
        advantages=(adv - adv.mean()) / adv.std(),
    )


def grad_suite(draws: int | None = None, op_instances: int = 100, seed: int = 4) -> SuiteResult:
    """
    每个已注册算子与有限差分比对 (相对 1e-4)；
    三个代理目标与 CIM 惩罚项在 8 个转移的小批量上比对 (相对 1e-3)
    """
    draws = draws or config.VERIFY_GRAD_DRAWS
    rng = np.random.default_rng(seed)
    result = SuiteResult("grad")

    for _ in range(op_instances):
        cases = _op_cases(rng)
        for kind in ad.OP_REGISTRY:
            if kind not in cases:
                result.check(False, f"op '{kind}' has no gradient check")
                continue
            fn, inputs = cases[kind]
            weights = rng.uniform(-1.0, 1.0, np.shape(fn(*[ad.Tensor(v) for v in inputs]).data))
            _compare_grads(result, f"op {kind}", lambda *xs, fn=fn, wt=weights: (fn(*xs) * wt).sum(), inputs, 1e-4)

    k = kern.Kernel("gaussian", 1.0)
    for i in range(draws):
        old = ActorCritic(3, 2, rng, hidden=(8,), log_std_init=-0.5, action_scale=(1.5, 1.5))
        batch = _tiny_batch(rng, old)
        old_dist = old.frozen_distribution(batch.states)
        new = old.copy()
        new.set_actor_params([p + 0.05 * rng.standard_normal(p.shape) for p in old.actor_params()])
        at = new.actor_params()
        noise = rng.standard_normal((len(batch), 2))

        objectives = {
            "surrogate_clip": lambda *ps: surrogate.surrogate_clip(batch, new.distribution(batch.states, ps), 0.2),
            "surrogate_kl":   lambda *ps: surrogate.surrogate_kl(batch, new.distribution(batch.states, ps), old_dist, 0.5),
            "surrogate_cim":  lambda *ps: surrogate.surrogate_cim(batch, new.distribution(batch.states, ps), old_dist,
                                                                  1.0, k, noise),
            "cim_penalty":    lambda *ps: metric.cim_penalty(k, old_dist, new.distribution(batch.states, ps), noise),
        }
        for label, f in objectives.items():
            _compare_grads(result, f"draw {i} {label}", f, at, 1e-3)
    return result


# === β 控制器 ===

def controller_suite() -> SuiteResult:
    result = SuiteResult("controller")
    update = surrogate.adaptive_beta_update
    d_targ, beta = config.KL_D_TARG, config.KL_BETA_INIT

    result.check(update(beta, 0.05, d_targ) == 0.25, "halving branch")
    result.check(update(beta, 0.2, d_targ) == 1.0, "doubling branch")
    result.check(update(beta, 0.1, d_targ) == beta, "dead zone")
    result.check(update(update(beta, 0.1, d_targ), 0.1, d_targ) == beta, "dead zone is idempotent")
    result.check(update(beta, d_targ / 1.5, d_targ) == beta, "lower edge stays in the dead zone")
    result.check(update(beta, d_targ * 1.5, d_targ) == beta, "upper edge stays in the dead zone")
    b = beta
    for d in (0.0, 1e3, 0.0, 0.0, 1e3):
        b = update(b, d, d_targ)
        result.check(0.0 < b < math.inf, f"beta left (0, inf): {b}")
    return result


SUITES: dict[str, Callable[[], SuiteResult]] = {
    "kl":         kl_suite,
    "asymmetry":  asymmetry_suite,
    "cim":        cim_suite,
    "pinsker":    pinsker_suite,
    "taylor":     taylor_suite,
    "grad":       grad_suite,
    "controller": controller_suite,
}


def run_suites(names: list[str] | None = None) -> list[SuiteResult]:
    """
    依次运行指定套件 (默认全部)；套件内部抛异常记为失败
    """
    selected = names or list(SUITES)
    results = []
    for name in selected:
        logger.info(f"运行校验套件: {name}")
        try:
            res = SUITES[name]()
        except Exception as e:
            logger.exception(f"校验套件 {name} 异常: {e}")
            res = SuiteResult(name, passed=False, failures=[f"raised {type(e).__name__}: {e}"])

        if res.passed:
            logger.info(f"套件 {name} 通过 ({res.checks} 项检查)")
        else:
            for message in res.failures:
                logger.error(f"套件 {name} 失败: {message}")
        results.append(res)
    return results


def format_table(results: list[SuiteResult]) -> str:
    width = max(len(r.name) for r in results) if results else 5
    lines = [f"{'suite':<{width}}  result  checks  notes", "-" * (width + 30)]
    for r in results:
        notes = "; ".join(r.notes)
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.checks:>6}  {notes}")
        for message in r.failures:
            lines.append(f"{'':<{width}}    - {message}")
    return "\n".join(lines)


__all__ = [
    "SuiteResult",
    "SUITES",
    "kl_suite",
    "asymmetry_suite",
    "cim_suite",
    "pinsker_suite",
    "taylor_suite",
    "grad_suite",
    "controller_suite",
    "run_suites",
    "format_table",
]
