# main.py
# 命令行入口: python -m src.main <子命令>
#
# @date 26-10-18
#

import argparse
import sys

from src import logger
from src.errors import ConfigError
from src.harness.commands import (
    EXIT_FAILURE,
    EXIT_USAGE,
    cmd_diag_asymmetry,
    cmd_diag_bound,
    cmd_plot,
    cmd_train,
    cmd_verify,
)
from src.harness.runconfig import RunConfig, parse_seeds
from src.harness.verify import SUITES
from src.correntropy.kernel import KERNEL_FAMILIES
from src.envs import ENV_REGISTRY
from src.ppo.trainer import SIGMA_MODES, VARIANTS
from src.autodiff.optim import OPTIMIZER_KINDS


BANNER = r"""
       _       _       _
  _ __| |     | | __ _| |__
 | '__| |_____| |/ _` | '_ \
 | |  | |_____| | (_| | |_) |
 |_|  |_|     |_|\__,_|_.__/   clip / kl / cim PPO
"""

# 命令行参数名 -> RunConfig 字段
TRAIN_OVERRIDES = {
    "algo": "algo",
    "env": "env",
    "iterations": "iterations",
    "jobs": "jobs",
    "timing": "timing",
    "clip_eps": "clip_epsilon",
    "beta": "beta_init",
    "d_targ": "d_targ",
    "alpha": "alpha",
    "kernel": "kernel",
    "bandwidth": "bandwidth",
    "sigma_mode": "sigma_mode",
    "noise_draws": "noise_draws",
    "gamma": "gamma",
    "actor_lr": "actor_lr",
    "critic_lr": "critic_lr",
    "batch_size": "batch_size",
    "actor_steps": "actor_update_steps",
    "critic_steps": "critic_update_steps",
    "optimizer": "optimizer",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m src.main", description="PPO 惩罚项对比实验 (Clip / 自适应 KL / CIM)")
    parser.add_argument("--debug", action="store_true", help="打印调试日志")
    sub = parser.add_subparsers(dest="command", required=True)

    # === train ===
    train = sub.add_parser("train", help="多种子训练并写学习曲线 CSV")
    train.add_argument("--config", help="INI 配置文件 ([run] 段)")
    train.add_argument("--algo", choices=VARIANTS)
    train.add_argument("--env", choices=tuple(ENV_REGISTRY))
    train.add_argument("--seeds", help="逗号分隔的种子列表，如 0,1,2")
    train.add_argument("--iterations", type=int)
    train.add_argument("--jobs", type=int, help="并行 worker 上限 (默认等于种子数)")
    train.add_argument("--out", help="输出目录 (优先于 RL_LAB_OUT)")
    train.add_argument("--timing", action="store_true", default=None, help="记录真实耗时 (结果不再逐位可复现)")
    train.add_argument("--clip-eps", type=float)
    train.add_argument("--beta", type=float, help="KL 惩罚初始 β")
    train.add_argument("--d-targ", type=float)
    train.add_argument("--alpha", type=float, help="CIM 惩罚权重")
    train.add_argument("--kernel", choices=KERNEL_FAMILIES)
    train.add_argument("--bandwidth", type=float)
    train.add_argument("--sigma-mode", choices=SIGMA_MODES)
    train.add_argument("--noise-draws", type=int)
    train.add_argument("--gamma", type=float)
    train.add_argument("--actor-lr", type=float)
    train.add_argument("--critic-lr", type=float)
    train.add_argument("--batch-size", type=int)
    train.add_argument("--actor-steps", type=int)
    train.add_argument("--critic-steps", type=int)
    train.add_argument("--optimizer", choices=OPTIMIZER_KINDS)
    train.set_defaults(handler=_run_train, sub_parser=train)

    # === diag-asymmetry ===
    asym = sub.add_parser("diag-asymmetry", help="KL 非对称性网格")
    asym.add_argument("--mu1", type=float, default=1.0)
    asym.add_argument("--mu2", type=float, default=2.0)
    asym.add_argument("--sigma-min", type=float, default=0.01)
    asym.add_argument("--sigma-max", type=float, default=10.0)
    asym.add_argument("--grid", type=int, default=50)
    asym.add_argument("--scale", choices=("log", "linear"), default="log")
    asym.add_argument("--out", help="输出 CSV 路径")
    asym.set_defaults(handler=_run_diag_asymmetry, sub_parser=asym)

    # === diag-bound ===
    bound = sub.add_parser("diag-bound", help="非对称下界随策略维度的变化")
    bound.add_argument("--ratio", dest="h", type=float, default=2.0, help="每维标准差比 σ2/σ1")
    bound.add_argument("--beta1", type=float, default=1.0)
    bound.add_argument("--beta2", type=float, default=1.0)
    bound.add_argument("--max-dim", type=int, default=10)
    bound.add_argument("--out", help="输出 CSV 路径")
    bound.set_defaults(handler=_run_diag_bound, sub_parser=bound)

    # === plot ===
    plot = sub.add_parser("plot", help="学习曲线 CSV -> SVG")
    plot.add_argument("csv", nargs="+")
    plot.add_argument("--out", help="输出 SVG 路径")
    plot.add_argument("--title", default="")
    plot.set_defaults(handler=_run_plot, sub_parser=plot)

    # === verify ===
    verify = sub.add_parser("verify", help="运行数学性质校验套件")
    verify.add_argument("--suite", action="append", choices=tuple(SUITES), help="只运行指定套件 (可重复)")
    verify.set_defaults(handler=_run_verify, sub_parser=verify)

    return parser


def _run_train(args: argparse.Namespace) -> int:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    overrides = {field: getattr(args, flag) for flag, field in TRAIN_OVERRIDES.items()}
    if args.seeds is not None:
        overrides["seeds"] = parse_seeds(args.seeds)
    cfg = cfg.with_overrides(**overrides)

    if not cfg.algo:
        args.sub_parser.error("--algo is required (or set 'algo' in the --config file)")

    print(BANNER, file=sys.stderr)
    logger.info(f"开始训练: algo={cfg.algo} env={cfg.env} seeds={cfg.seeds} iterations={cfg.iterations}")
    return cmd_train(cfg, args.out)


def _run_diag_asymmetry(args: argparse.Namespace) -> int:
    out = args.out or RunConfig().output_dir() / "diag_asymmetry.csv"
    return cmd_diag_asymmetry(args.mu1, args.mu2, args.sigma_min, args.sigma_max, args.grid, out, args.scale)


def _run_diag_bound(args: argparse.Namespace) -> int:
    out = args.out or RunConfig().output_dir() / "diag_bound.csv"
    return cmd_diag_bound(args.h, args.beta1, args.beta2, args.max_dim, out)


def _run_plot(args: argparse.Namespace) -> int:
    out = args.out or RunConfig().output_dir() / "curves.svg"
    return cmd_plot(args.csv, out, args.title)


def _run_verify(args: argparse.Namespace) -> int:
    return cmd_verify(args.suite)


def main(argv: list[str] | None = None) -> int:
    """
    Returns:
        int: 0 成功 / 1 运行或校验失败 / 2 用法或配置错误
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if args.debug:
        logger.set_debug_mode(True)

    try:
        return args.handler(args)
    except SystemExit as e:
        return int(e.code or 0)
    except ConfigError as e:
        args.sub_parser.print_usage(sys.stderr)
        logger.error(f"配置错误: {e}")
        return EXIT_USAGE
    except KeyboardInterrupt:
        logger.info("收到退出信号，正在关闭...")
        return EXIT_FAILURE
    except Exception as e:
        logger.exception(f"运行失败: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
