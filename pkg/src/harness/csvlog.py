# csvlog.py
# 学习曲线 CSV 的读写与多种子聚合
#
# @date 26-10-18
#

from __future__ import annotations

import csv
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from src.errors import ContractError
from src.ppo.trainer import IterationRecord


CURVE_COLUMNS = [
    "iteration",
    "env_steps",
    "return_mean",
    "return_std_over_seeds",
    "penalty_value",
    "beta",
    "wall_time_s",
    "nonfinite_grad_count",
]


@dataclass(frozen=True)
class CurveRow:
    iteration:             int
    env_steps:             int
    return_mean:           float
    return_std_over_seeds: float
    penalty_value:         float
    beta:                  float
    wall_time_s:           float
    nonfinite_grad_count:  int


_INT_COLUMNS = {"iteration", "env_steps", "nonfinite_grad_count"}


def row_from_record(record: IterationRecord) -> CurveRow:
    """单个种子的记录 (跨种子标准差为 0)"""
    return CurveRow(
        iteration=record.iteration,
        env_steps=record.env_steps,
        return_mean=record.return_mean,
        return_std_over_seeds=0.0,
        penalty_value=record.penalty_value,
        beta=record.beta,
        wall_time_s=record.wall_time_s,
        nonfinite_grad_count=record.nonfinite_grad_count,
    )


def format_cell(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


class CurveCsvWriter:
    """
    逐行追加写 CSV，每行写完立即 flush (训练中途失败时已写的行保留)
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._fp: IO[str] = open(self.path, "w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._fp, lineterminator="\n")
        self._writer.writerow(CURVE_COLUMNS)
        self._fp.flush()

    def append(self, row: CurveRow) -> None:
        self._writer.writerow([format_cell(v) for v in astuple(row)])
        self._fp.flush()

    def close(self) -> None:
        if not self._fp.closed:
            self._fp.close()

    def __enter__(self) -> "CurveCsvWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_curve_csv(path: str | Path, rows: Iterable[CurveRow]) -> None:
    with CurveCsvWriter(path) as writer:
        for row in rows:
            writer.append(row)


def read_curve_csv(path: str | Path) -> list[CurveRow]:
    """
    读取学习曲线 CSV

    Raises:
        ContractError: 表头不符 / 列数不符 / 数值无法解析
    """
    with open(path, "r", encoding="utf-8", newline="") as fp:
        reader = csv.reader(fp)
        header = next(reader, None)
        if header != CURVE_COLUMNS:
            raise ContractError(f"'{path}' does not match the curve CSV schema: header {header}")

        rows = []
        names = [f.name for f in fields(CurveRow)]
        for lineno, cells in enumerate(reader, start=2):
            if len(cells) != len(CURVE_COLUMNS):
                raise ContractError(f"'{path}' line {lineno}: expected {len(CURVE_COLUMNS)} cells, got {len(cells)}")
            try:
                values = {n: int(c) if n in _INT_COLUMNS else float(c) for n, c in zip(names, cells)}
            except ValueError as e:
                raise ContractError(f"'{path}' line {lineno}: {e}") from e
            rows.append(CurveRow(**values))
    return rows


def aggregate_runs(runs: Sequence[Sequence[CurveRow]]) -> list[CurveRow]:
    """
    按迭代聚合多个种子: return 取均值与总体标准差 (ddof=0)，
    其余浮点列取均值，非有限梯度计数求和

    Raises:
        ContractError: 没有输入 / 各种子的行数或迭代序号不一致
    """
    if not runs:
        raise ContractError("nothing to aggregate")
    length = len(runs[0])
    if any(len(r) != length for r in runs):
        raise ContractError("runs have different numbers of iterations")

    merged = []
    for i in range(length):
        rows = [r[i] for r in runs]
        if len({row.iteration for row in rows}) != 1:
            raise ContractError(f"iteration index mismatch at row {i}")
        returns = np.array([row.return_mean for row in rows])
        merged.append(CurveRow(
            iteration=rows[0].iteration,
            env_steps=rows[0].env_steps,
            return_mean=float(np.mean(returns)),
            return_std_over_seeds=float(np.std(returns)),
            penalty_value=float(np.mean([row.penalty_value for row in rows])),
            beta=float(np.mean([row.beta for row in rows])),
            wall_time_s=float(np.mean([row.wall_time_s for row in rows])),
            nonfinite_grad_count=int(sum(row.nonfinite_grad_count for row in rows)),
        ))
    return merged


def tail_return_mean(rows: Sequence[CurveRow], window: int) -> float:
    """
    最后 window 行 return_mean 的平均 (行数不足时取全部)

    Raises:
        ContractError: 没有行 / window < 1
    """
    if window < 1:
        raise ContractError("window must be >= 1")
    if not rows:
        raise ContractError("no rows to summarize")
    return float(np.mean([row.return_mean for row in rows[-window:]]))


def write_table_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    """
    写诊断表 (诊断网格等)

    Returns:
        int: 数据行数
    """
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
            count += 1
    return count


__all__ = [
    "CURVE_COLUMNS",
    "CurveRow",
    "CurveCsvWriter",
    "row_from_record",
    "format_cell",
    "write_curve_csv",
    "read_curve_csv",
    "aggregate_runs",
    "tail_return_mean",
    "write_table_csv",
]
