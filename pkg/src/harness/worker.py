# worker.py
# 种子工作线程 与 工作线程管理器
#
# @date 26-10-18
#

import threading as t
from typing import Callable

from src import logger


class SeedWorker:
    """
    在独立线程里跑一个种子的训练
    每个 worker 独占自己的环境、策略、随机数源与输出文件
    """

    def __init__(
        self,
        seed: int,
        run_func: Callable[["SeedWorker"], object],
        name: str | None = None,
    ):
        """
        Args:
            seed (int): 随机种子
            run_func (Callable[[SeedWorker], object]): 线程里执行的函数，返回值存入 result
            name (str | None, optional): worker 名称. 若为None则默认为"seed-[种子]".
        """

        self.seed: int = int(seed)
        self.run_func: Callable[["SeedWorker"], object] = run_func

        # 运行状态
        self.thread: t.Thread | None = None
        self.result: object | None = None
        self.error: BaseException | None = None
        self.finished: bool = False

        self.name: str = f"seed-{seed}" if not name else name

    def _target(self, gate: t.Semaphore | None) -> None:
        if gate is not None:
            gate.acquire()
        try:
            logger.info(f"{self.name} 开始运行")
            self.result = self.run_func(self)
            logger.info(f"{self.name} 运行结束")
        except Exception as e:
            self.error = e
            logger.exception(f"{self.name} 运行失败: {e}")
        finally:
            self.finished = True
            if gate is not None:
                gate.release()

    def start(self, gate: t.Semaphore | None = None) -> None:
        """
        启动线程

        Args:
            gate (Semaphore | None): 限制同时运行的 worker 数
        """
        self.thread = t.Thread(target=self._target, args=(gate,), name=self.name, daemon=True)
        self.thread.start()
        logger.debug(f"{self.name} 已启动")

    def join(self) -> None:
        if self.thread is not None:
            self.thread.join()

    @property
    def ok(self) -> bool:
        return self.finished and self.error is None

    def __str__(self) -> str:
        state = "未完成" if not self.finished else ("成功" if self.error is None else "失败")
        return f"Worker {self.name} (种子: {self.seed}, 状态: {state})"


class WorkerManager:
    """
    管理一组种子 worker，最多 jobs 个同时运行

    worker 是线程，训练中的小矩阵 numpy 运算大多持有 GIL，
    所以 jobs > 1 主要带来交错执行，几乎没有多核加速。
    """

    def __init__(self, jobs: int = 0) -> None:
        """
        Args:
            jobs (int): 并行上限，0 表示不限 (等于 worker 数)
        """
        self.jobs: int = jobs
        self.workers: list[SeedWorker] = []

    def add_worker(self, worker: SeedWorker) -> None:
        """
        添加 worker

        Raises:
            ValueError: 种子重复
        """
        for existing in self.workers:
            if existing.seed == worker.seed:
                logger.error(f"无法添加 {worker.name}: 种子 {worker.seed} 已被 {existing.name} 使用")
                raise ValueError(f"种子 {worker.seed} 已被使用")

        self.workers.append(worker)
        logger.debug(f"worker 已添加: {worker.name}")

    def run_all(self) -> bool:
        """
        启动全部 worker 并等待结束

        Returns:
            bool: 是否全部成功
        """
        limit = self.jobs if self.jobs > 0 else max(len(self.workers), 1)
        gate = t.Semaphore(limit)
        logger.info(f"启动 {len(self.workers)} 个 worker (并行上限 {limit})")

        for worker in self.workers:
            worker.start(gate)
        for worker in self.workers:
            worker.join()

        failed = [w for w in self.workers if not w.ok]
        for w in failed:
            logger.error(f"{w} : {w.error!r}")
        return not failed

    @property
    def failed(self) -> list[SeedWorker]:
        return [w for w in self.workers if not w.ok]


__all__ = ["SeedWorker", "WorkerManager"]
