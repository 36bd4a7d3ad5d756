# mlp.py
# 全连接网络 (tanh 隐藏层 + 线性输出头)
#
# @date 26-10-18
#

from __future__ import annotations

from typing import Sequence

import numpy as np

from src.autodiff.tensor import Tensor
from src.errors import ContractError


class Mlp:
    """
    多层感知机
    参数按 [W0, b0, W1, b1, ...] 顺序保存为 float64 数组，W_i 形状 (w_i, w_{i+1})。
    """

    def __init__(
        self,
        widths: Sequence[int],
        rng: np.random.Generator | None = None,
        out_scale: float = 1.0,
    ):
        """
        Args:
            widths (Sequence[int]): 各层宽度，如 (3, 64, 64, 1)
            rng (np.random.Generator | None): 初始化随机数源，None 时全零初始化
            out_scale (float): 输出层权重缩放 (策略均值头通常取小值)
        """

        if len(widths) < 2 or any(w < 1 for w in widths):
            raise ContractError(f"invalid layer widths: {widths}")

        self.widths: list[int] = [int(w) for w in widths]
        self.params: list[np.ndarray] = []

        n_layers = len(self.widths) - 1
        for i in range(n_layers):
            fan_in, fan_out = self.widths[i], self.widths[i + 1]
            if rng is None:
                w = np.zeros((fan_in, fan_out))
            else:
                # Glorot 均匀分布
                limit = np.sqrt(6.0 / (fan_in + fan_out))
                w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
                if i == n_layers - 1:
                    w = w * out_scale
            self.params.append(w)
            self.params.append(np.zeros(fan_out))

    @property
    def in_width(self) -> int:
        return self.widths[0]

    @property
    def out_width(self) -> int:
        return self.widths[-1]

    @property
    def param_count(self) -> int:
        return int(sum(p.size for p in self.params))

    def copy(self) -> "Mlp":
        """深拷贝 (旧策略快照用)"""
        net = Mlp.__new__(Mlp)
        net.widths = list(self.widths)
        net.params = [p.copy() for p in self.params]
        return net

    def forward(self, x, params: Sequence[Tensor] | None = None) -> Tensor:
        """
        前向计算

        Args:
            x: 输入，形状 (B, in) 或 (in,)
            params: Tape 上的参数张量；为 None 时使用自身参数且不记录
        Returns:
            Tensor: 形状 (B, out) 或 (out,)
        Raises:
            ContractError: 输入最后一维与网络输入宽度不一致
        """

        h = x if isinstance(x, Tensor) else Tensor._wrap(np.asarray(x, dtype=np.float64))
        if h.shape[-1] != self.in_width or h.ndim not in (1, 2):
            raise ContractError(f"input shape {h.shape} does not match input width {self.in_width}")

        squeeze = h.ndim == 1
        if squeeze:
            h = h.reshape(1, self.in_width)

        ps = params if params is not None else [Tensor._wrap(p) for p in self.params]
        if len(ps) != len(self.params):
            raise ContractError("parameter list does not match network layout")

        n_layers = len(self.widths) - 1
        for i in range(n_layers):
            h = h @ ps[2 * i] + ps[2 * i + 1]
            if i < n_layers - 1:
                h = h.tanh()

        if squeeze:
            h = h.reshape(self.out_width)
        return h


def mlp_forward(net: Mlp, input) -> Tensor:
    """
    不记录计算图的前向计算

    Args:
        net (Mlp): 网络
        input: 形状 (B, in) 或 (in,)
    """
    return net.forward(input)


__all__ = ["Mlp", "mlp_forward"]
