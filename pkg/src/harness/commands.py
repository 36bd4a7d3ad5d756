# commands.py
# 命令行子命令的实现 (返回退出码)
#
# @date 26-10-18
#

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from src import config, logger
from src.errors import ContractError
from src.harness import diagnostics
from src.harness.csvlog import (
    CurveCsvWriter,
    aggregate_runs,
    read_curve_csv,
    row_from_record,
    tail_return_mean,
    write_curve_csv,
    write_table_csv,
)
from src.harness.runconfig import RunConfig
from src.harness.svg import Curve, render_curves
from src.harness.verify import format_table, run_suites
from src.harness.worker import SeedWorker, WorkerManager
from src.ppo.trainer import train


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def seed_csv_path(out_dir: Path, cfg: RunConfig, seed: int) -> Path:
    return out_dir / f"{cfg.algo}_{cfg.env}_seed{seed}.csv"


def merged_csv_path(out_dir: Path, cfg: RunConfig) -> Path:
    return out_dir / f"{cfg.algo}_{cfg.env}_merged.csv"


def cmd_train(cfg: RunConfig, out_flag: str | None = None) -> int:
    """
    每个种子一个 worker 线程，逐行写各自的 CSV；全部成功后写聚合 CSV

    Raises:
        ConfigError: 配置非法 (由调用方映射为退出码 2)
    """
    cfg.validate()
    out_dir = cfg.output_dir(out_flag)
    out_dir.mkdir(parents=True, exist_ok=True)
    penalty = cfg.to_penalty_config()

    manager = WorkerManager(cfg.jobs)
    for seed in cfg.seeds:
        path = seed_csv_path(out_dir, cfg, seed)

        def run(worker: SeedWorker, path: Path = path):
            with CurveCsvWriter(path) as writer:
                log = train(
                    penalty,
                    cfg.env,
                    worker.seed,
                    cfg.iterations,
                    on_record=lambda record: writer.append(row_from_record(record)),
                    record_wall_time=cfg.timing,
                )
            return [row_from_record(r) for r in log.records]

        manager.add_worker(SeedWorker(seed, run))

    if not manager.run_all():
        names = ", ".join(w.name for w in manager.failed)
        logger.error(f"训练失败: {names}；已写出的 CSV 行保留在 {out_dir}")
        return EXIT_FAILURE

    merged = aggregate_runs([w.result for w in manager.workers])  # type: ignore[misc]
    merged_path = merged_csv_path(out_dir, cfg)
    write_curve_csv(merged_path, merged)

    for worker in manager.workers:
        tail = tail_return_mean(worker.result, config.SUMMARY_TAIL)  # type: ignore[arg-type]
        logger.info(f"{cfg.algo} 种子 {worker.seed}: 最后 {config.SUMMARY_TAIL} 次迭代平均回报 {tail:.1f}")

    for seed in cfg.seeds:
        print(seed_csv_path(out_dir, cfg, seed))
    print(merged_path)
    logger.info(f"训练完成: {len(cfg.seeds)} 个种子 × {cfg.iterations} 次迭代，结果写入 {out_dir}")
    return EXIT_OK


def cmd_diag_asymmetry(
    mu1: float,
    mu2: float,
    sigma_low: float,
    sigma_high: float,
    grid: int,
    out: str | Path,
    scale: str = "log",
) -> int:
    """
    写 (σ1, σ2) 网格上的正反向 KL 与差
    """
    try:
        rows = diagnostics.asymmetry_grid(mu1, mu2, sigma_low, sigma_high, grid, scale)  # type: ignore[arg-type]
    except ContractError as e:
        logger.error(f"参数非法: {e}")
        return EXIT_USAGE

    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = write_table_csv(path, diagnostics.ASYMMETRY_HEADER, rows)
    biggest = max(r[4] for r in rows)
    print(f"{path}: {count} rows, max |KL(p||q) - KL(q||p)| = {biggest:.6g}")
    return EXIT_OK


def cmd_diag_bound(h: float, beta1: float, beta2: float, max_dim: int, out: str | Path) -> int:
    """
    写下界随策略维度变化的表
    """
    try:
        rows = diagnostics.bound_vs_dimension(h, beta1, beta2, max_dim)
    except ContractError as e:
        logger.error(f"参数非法: {e}")
        return EXIT_USAGE

    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = write_table_csv(path, diagnostics.BOUND_HEADER, rows)
    print(f"{path}: {count} rows, bound at n={max_dim}: {rows[-1][2]:.6g}")
    return EXIT_OK


def cmd_plot(csv_paths: Sequence[str | Path], out: str | Path, title: str = "") -> int:
    """
    多条学习曲线画到一个 SVG；任一输入不合格时不写文件
    """
    curves = []
    for p in csv_paths:
        try:
            rows = read_curve_csv(p)
        except (OSError, ContractError) as e:
            logger.error(f"无法读取 {p}: {e}")
            return EXIT_USAGE
        if not rows:
            logger.error(f"{p} 只有表头，没有数据行")
            return EXIT_USAGE
        curves.append(Curve(label=Path(p).stem, rows=rows))

    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_curves(curves, title=title), encoding="utf-8")
    print(path)
    return EXIT_OK


def cmd_verify(suites: Sequence[str] | None = None) -> int:
    """
    运行校验套件并打印结果表
    """
    results = run_suites(list(suites) if suites else None)
    print(format_table(results))
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error(f"校验失败的套件: {', '.join(failed)}")
        return EXIT_FAILURE
    return EXIT_OK


__all__ = [
    "EXIT_OK",
    "EXIT_FAILURE",
    "EXIT_USAGE",
    "seed_csv_path",
    "merged_csv_path",
    "cmd_train",
    "cmd_diag_asymmetry",
    "cmd_diag_bound",
    "cmd_plot",
    "cmd_verify",
]
