# errors.py
# 项目异常定义
#
# @date 26-10-18
#


class LabError(Exception):
    """
    项目内所有异常的基类
    """


class ContractError(LabError, ValueError):
    """
    调用前置条件不满足 (形状/维度不匹配、带宽非正、外部输入含 NaN/Inf ...)
    """


class GraphError(LabError):
    """
    自动微分计算图构造错误 (未注册的算子、重复反向传播 ...)
    """


class ConfigError(LabError, ValueError):
    """
    运行配置错误 (未知键、非法取值)
    """


class NonFiniteGradientWarning(RuntimeWarning):
    """
    梯度含 NaN/Inf，本次优化步被跳过
    """


__all__ = [
    "LabError",
    "ContractError",
    "GraphError",
    "ConfigError",
    "NonFiniteGradientWarning",
]
