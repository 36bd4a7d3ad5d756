# tensor.py
# 反向模式自动微分: Tensor / Tape / 算子注册表
#
# @date 26-10-18
#

"""
最小的反向模式自动微分实现。

Tensor 包装一个 float64 的 numpy 数组 (行优先)。若某个输入挂在 Tape 上，
运算结果会作为新节点追加到同一条 Tape，节点编号天然满足拓扑序
(输入总是先于使用者出现)。Tape.gradient 从输出节点倒序扫描一遍，
每个可达节点的伴随量恰好被处理一次。
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from src.errors import ContractError, GraphError


# === 算子注册表 ===

OP_REGISTRY: dict[str, type["Op"]] = {}


def register_op(kind: str) -> Callable[[type["Op"]], type["Op"]]:
    """
    注册一个算子类

    Args:
        kind (str): 算子名称 (唯一)
    """

    def deco(cls: type["Op"]) -> type["Op"]:
        if kind in OP_REGISTRY:
            raise GraphError(f"op '{kind}' registered twice")
        cls.kind = kind
        OP_REGISTRY[kind] = cls
        return cls

    return deco


class Op:
    """
    算子基类。forward 可以把反向需要的局部量缓存到 self 上。
    """

    kind: str = "unregistered"

    def forward(self, *xs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, g: np.ndarray) -> tuple[np.ndarray | None, ...]:
        raise NotImplementedError


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """把广播后的梯度求和回输入形状"""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, s in enumerate(shape):
        if s == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g.reshape(shape)


@register_op("add")
class Add(Op):
    def forward(self, x, y):
        return x + y

    def backward(self, g):
        return g, g


@register_op("sub")
class Sub(Op):
    def forward(self, x, y):
        return x - y

    def backward(self, g):
        return g, -g


@register_op("mul")
class Mul(Op):
    def forward(self, x, y):
        self.x, self.y = x, y
        return x * y

    def backward(self, g):
        return g * self.y, g * self.x


@register_op("div")
class Div(Op):
    def forward(self, x, y):
        self.x, self.y = x, y
        return x / y

    def backward(self, g):
        return g / self.y, -g * self.x / (self.y * self.y)


@register_op("neg")
class Neg(Op):
    def forward(self, x):
        return -x

    def backward(self, g):
        return (-g,)


@register_op("matmul")
class MatMul(Op):
    def forward(self, x, w):
        if x.ndim != 2 or w.ndim != 2 or x.shape[1] != w.shape[0]:
            raise ContractError(f"matmul shape mismatch: {x.shape} @ {w.shape}")
        self.x, self.w = x, w
        return x @ w

    def backward(self, g):
        return g @ self.w.T, self.x.T @ g


@register_op("tanh")
class Tanh(Op):
    def forward(self, x):
        self.out = np.tanh(x)
        return self.out

    def backward(self, g):
        return (g * (1.0 - self.out * self.out),)


@register_op("exp")
class Exp(Op):
    def forward(self, x):
        self.out = np.exp(x)
        return self.out

    def backward(self, g):
        return (g * self.out,)


@register_op("log")
class Log(Op):
    def forward(self, x):
        self.x = x
        return np.log(x)

    def backward(self, g):
        return (g / self.x,)


@register_op("sqrt")
class Sqrt(Op):
    """在 0 处取零次梯度"""

    def forward(self, x):
        self.out = np.sqrt(x)
        return self.out

    def backward(self, g):
        grad = np.zeros_like(self.out)
        np.divide(0.5 * g, self.out, out=grad, where=self.out > 0)
        return (grad,)


@register_op("square")
class Square(Op):
    def forward(self, x):
        self.x = x
        return x * x

    def backward(self, g):
        return (2.0 * g * self.x,)


@register_op("sum")
class Sum(Op):
    def __init__(self, axis: int | None = None, keepdims: bool = False):
        self.axis = axis
        self.keepdims = keepdims

    def forward(self, x):
        self.shape = x.shape
        return np.sum(x, axis=self.axis, keepdims=self.keepdims)

    def backward(self, g):
        if self.axis is not None and not self.keepdims:
            g = np.expand_dims(g, self.axis)
        return (np.broadcast_to(g, self.shape),)


@register_op("mean")
class Mean(Op):
    def __init__(self, axis: int | None = None):
        self.axis = axis

    def forward(self, x):
        self.shape = x.shape
        self.count = x.size if self.axis is None else x.shape[self.axis]
        return np.mean(x, axis=self.axis)

    def backward(self, g):
        if self.axis is not None:
            g = np.expand_dims(g, self.axis)
        return (np.broadcast_to(g / self.count, self.shape),)


@register_op("maximum")
class Maximum(Op):
    """相等时梯度给第一个输入"""

    def forward(self, x, y):
        self.mask = x >= y
        return np.maximum(x, y)

    def backward(self, g):
        return g * self.mask, g * ~self.mask


@register_op("minimum")
class Minimum(Op):
    """相等时梯度给第一个输入"""

    def forward(self, x, y):
        self.mask = x <= y
        return np.minimum(x, y)

    def backward(self, g):
        return g * self.mask, g * ~self.mask


@register_op("clip")
class Clip(Op):
    def __init__(self, low: float, high: float):
        self.low, self.high = low, high

    def forward(self, x):
        self.mask = (x >= self.low) & (x <= self.high)
        return np.clip(x, self.low, self.high)

    def backward(self, g):
        return (g * self.mask,)


@register_op("where")
class Where(Op):
    def __init__(self, cond: np.ndarray):
        self.cond = np.asarray(cond, dtype=bool)

    def forward(self, x, y):
        return np.where(self.cond, x, y)

    def backward(self, g):
        return g * self.cond, g * ~self.cond


@register_op("norm")
class RowNorm(Op):
    """最后一维上的欧氏范数，在 0 处取零次梯度"""

    def forward(self, x):
        self.x = x
        self.out = np.sqrt(np.sum(x * x, axis=-1))
        return self.out

    def backward(self, g):
        scale = np.zeros_like(self.out)
        np.divide(g, self.out, out=scale, where=self.out > 0)
        return (self.x * scale[..., None],)


@register_op("reshape")
class Reshape(Op):
    def __init__(self, shape: tuple[int, ...]):
        self.new_shape = shape

    def forward(self, x):
        self.shape = x.shape
        return x.reshape(self.new_shape)

    def backward(self, g):
        return (g.reshape(self.shape),)


# === Tape ===

@dataclass
class Node:
    """
    Tape 上的节点
    """

    kind:   str              # 算子名 或 "variable" / "constant"
    inputs: tuple[int, ...]  # 输入节点编号
    op:     Op | None        # 叶子节点为 None
    shape:  tuple[int, ...]


class Tape:
    """
    只追加的计算记录。一次 gradient 之后必须 reset 才能再次反向传播。
    """

    def __init__(self) -> None:
        self.nodes: list[Node] = []
        self._consumed: bool = False

    def __len__(self) -> int:
        return len(self.nodes)

    def _append(self, node: Node) -> int:
        if self._consumed:
            raise GraphError("tape already consumed by a backward pass; call reset() first")
        self.nodes.append(node)
        return len(self.nodes) - 1

    def variable(self, value) -> "Tensor":
        """
        注册一个需要求梯度的叶子

        Args:
            value: Tensor / ndarray / 标量
        """
        data = value.data if isinstance(value, Tensor) else _external_array(value)
        node = self._append(Node("variable", (), None, data.shape))
        return Tensor._wrap(data, self, node)

    def constant(self, value) -> "Tensor":
        """注册一个不求梯度的叶子"""
        data = value.data if isinstance(value, Tensor) else np.asarray(value, dtype=np.float64)
        node = self._append(Node("constant", (), None, data.shape))
        return Tensor._wrap(data, self, node)

    def _node_of(self, t: "Tensor") -> int:
        if t.tape is None:
            return self.constant(t).node  # type: ignore[return-value]
        if t.tape is not self:
            raise GraphError("tensors from different tapes cannot be combined")
        return t.node  # type: ignore[return-value]

    def record(self, op: Op, inputs: Sequence["Tensor"], out: np.ndarray) -> "Tensor":
        """
        记录一次运算

        Raises:
            GraphError: 算子未注册
        """
        if OP_REGISTRY.get(op.kind) is not type(op):
            raise GraphError(f"op '{type(op).__name__}' is not registered")
        ids = tuple(self._node_of(t) for t in inputs)
        node = self._append(Node(op.kind, ids, op, out.shape))
        return Tensor._wrap(out, self, node)

    def gradient(self, output: "Tensor", wrt: Sequence["Tensor"]) -> list["Tensor"]:
        """
        从标量输出做一次反向传播

        Args:
            output (Tensor): 标量输出
            wrt (Sequence[Tensor]): 求导对象 (本 Tape 上的节点)
        Returns:
            list[Tensor]: 与 wrt 同形状的梯度
        Raises:
            ContractError: 输出不是标量
            GraphError: Tape 已被消费 / 张量不属于本 Tape
        """
        if self._consumed:
            raise GraphError("backward called twice on the same tape without reset()")
        if output.data.size != 1:
            raise ContractError(f"gradient needs a scalar output, got shape {output.shape}")
        for t in wrt:
            if t.tape is not self:
                raise GraphError("gradient target is not recorded on this tape")

        if output.tape is not None and output.tape is not self:
            raise GraphError("output is recorded on a different tape")

        adjoints: list[np.ndarray | None] = [None] * len(self.nodes)
        if output.tape is self:
            adjoints[output.node] = np.ones(self.nodes[output.node].shape)  # type: ignore[index]
            start = output.node
        else:
            start = -1  # 输出与输入无关

        for i in range(start, -1, -1):
            adj = adjoints[i]
            node = self.nodes[i]
            if adj is None or node.op is None:
                continue
            for src, g in zip(node.inputs, node.op.backward(adj)):
                if g is None:
                    continue
                g = _unbroadcast(np.asarray(g, dtype=np.float64), self.nodes[src].shape)
                adjoints[src] = g if adjoints[src] is None else adjoints[src] + g

        self._consumed = True

        grads = []
        for t in wrt:
            adj = adjoints[t.node]  # type: ignore[index]
            grads.append(Tensor._wrap(np.zeros(t.shape) if adj is None else np.array(adj)))
        return grads

    def reset(self) -> None:
        """清空 Tape，之后可以重新记录"""
        self.nodes.clear()
        self._consumed = False


# === Tensor ===

def _external_array(value) -> np.ndarray:
    data = np.array(value, dtype=np.float64)
    if not np.all(np.isfinite(data)):
        raise ContractError("tensor input contains NaN or Inf")
    return data


def _apply(op: Op, *inputs) -> "Tensor":
    ts = [x if isinstance(x, Tensor) else Tensor._wrap(np.asarray(x, dtype=np.float64)) for x in inputs]
    out = np.asarray(op.forward(*[t.data for t in ts]), dtype=np.float64)
    tape = next((t.tape for t in ts if t.tape is not None), None)
    if tape is None:
        return Tensor._wrap(out)
    return tape.record(op, ts, out)


class Tensor:
    """
    n 维 float64 数组 + (可选) 所在 Tape 上的节点编号
    """

    __slots__ = ("data", "tape", "node")
    __array_ufunc__ = None  # ndarray 与 Tensor 混合运算时走 Tensor 的反射运算符

    def __init__(self, data) -> None:
        """
        Args:
            data: 外部输入 (列表 / ndarray / 标量)
        Raises:
            ContractError: 含 NaN / Inf
        """
        self.data: np.ndarray = _external_array(data)
        self.tape: Tape | None = None
        self.node: int | None = None

    @classmethod
    def _wrap(cls, data: np.ndarray, tape: Tape | None = None, node: int | None = None) -> "Tensor":
        t = cls.__new__(cls)
        t.data = data
        t.tape = tape
        t.node = node
        return t

    # === 基本属性 ===

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor._wrap(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, taped={self.tape is not None})"

    # === 运算符 ===

    def __add__(self, o):
        return _apply(Add(), self, o)

    def __radd__(self, o):
        return _apply(Add(), o, self)

    def __sub__(self, o):
        return _apply(Sub(), self, o)

    def __rsub__(self, o):
        return _apply(Sub(), o, self)

    def __mul__(self, o):
        return _apply(Mul(), self, o)

    def __rmul__(self, o):
        return _apply(Mul(), o, self)

    def __truediv__(self, o):
        return _apply(Div(), self, o)

    def __rtruediv__(self, o):
        return _apply(Div(), o, self)

    def __neg__(self):
        return _apply(Neg(), self)

    def __matmul__(self, o):
        return _apply(MatMul(), self, o)

    # === 一元运算 ===

    def tanh(self):
        return _apply(Tanh(), self)

    def exp(self):
        return _apply(Exp(), self)

    def log(self):
        return _apply(Log(), self)

    def sqrt(self):
        return _apply(Sqrt(), self)

    def square(self):
        return _apply(Square(), self)

    def sum(self, axis: int | None = None, keepdims: bool = False):
        return _apply(Sum(axis, keepdims), self)

    def mean(self, axis: int | None = None):
        return _apply(Mean(axis), self)

    def clip(self, low: float, high: float):
        return _apply(Clip(low, high), self)

    def norm(self):
        return _apply(RowNorm(), self)

    def reshape(self, *shape: int):
        return _apply(Reshape(tuple(shape)), self)


def maximum(x, y) -> Tensor:
    return _apply(Maximum(), x, y)


def minimum(x, y) -> Tensor:
    return _apply(Minimum(), x, y)


def where(cond, x, y) -> Tensor:
    return _apply(Where(cond), x, y)


# === 求导入口 ===

def grad(f: Callable[..., Tensor], at: Sequence) -> list[Tensor]:
    """
    对标量函数求梯度

    Args:
        f: 由已注册算子组成的标量函数
        at: 求导点 (每个参数一个数组)
    Returns:
        list[Tensor]: ∂f/∂x_i，形状与输入一致
    Raises:
        ContractError: 输出不是标量 / 输入含 NaN、Inf
        GraphError: 图中出现未注册算子
    """
    tape = Tape()
    xs = [tape.variable(x) for x in at]
    y = f(*xs)
    if not isinstance(y, Tensor):
        y = Tensor._wrap(np.asarray(y, dtype=np.float64))
    return tape.gradient(y, xs)


def finite_difference_grad(f: Callable[..., Tensor], at: Sequence, step: float = 1e-5) -> list[np.ndarray]:
    """
    中心差分梯度 (校验用)

    Args:
        f: 标量函数，接收 Tensor 返回 Tensor
        at: 求导点
        step: 差分步长
    """
    base = [np.array(x.data if isinstance(x, Tensor) else x, dtype=np.float64) for x in at]

    def evaluate(arrays: list[np.ndarray]) -> float:
        return float(np.asarray(f(*[Tensor._wrap(a) for a in arrays]).data).reshape(-1)[0])

    grads = []
    for k, x in enumerate(base):
        g = np.zeros_like(x)
        for idx in np.ndindex(x.shape):
            shifted = [a.copy() for a in base]
            shifted[k][idx] = x[idx] + step
            up = evaluate(shifted)
            shifted[k][idx] = x[idx] - step
            down = evaluate(shifted)
            g[idx] = (up - down) / (2.0 * step)
        grads.append(g)
    return grads


__all__ = [
    "OP_REGISTRY",
    "register_op",
    "Op",
    "Node",
    "Tape",
    "Tensor",
    "maximum",
    "minimum",
    "where",
    "grad",
    "finite_difference_grad",
]
