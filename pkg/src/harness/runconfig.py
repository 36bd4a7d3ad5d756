# runconfig.py
# 实验运行配置 (INI 文件 [run] 段)
#
# @date 26-10-18
#

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from src import config
from src import logger
from src.envs import ENV_REGISTRY
from src.errors import ConfigError
from src.ppo.trainer import VARIANTS, PenaltyConfig


SECTION = "run"


@dataclass
class RunConfig:
    """
    一次实验 (多个种子) 的完整配置；键名即字段名
    """

    algo:        str = ""                # clip | kl | cim (必填)
    env:         str = "pendulum"        # pendulum | pointmass
    seeds:       list[int] = field(default_factory=lambda: [0])
    iterations:  int = 100
    jobs:        int = 0                 # 并行种子数上限，0 表示与种子数相同
    out:         str = ""                # 输出目录 (优先级低于 --out 与环境变量)
    timing:      bool = False            # 是否记录真实耗时

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

    # === 转换 ===

    def to_penalty_config(self) -> PenaltyConfig:
        shared = {f.name for f in fields(PenaltyConfig)} - {"variant"}
        return PenaltyConfig(variant=self.algo, **{k: getattr(self, k) for k in shared})  # type: ignore[arg-type]

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """用非 None 的值覆盖字段 (命令行参数优先于文件)"""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def validate(self) -> None:
        """
        Raises:
            ConfigError: 缺少 algo / 取值非法
        """
        if not self.algo:
            raise ConfigError("algo is required (clip | kl | cim)")
        if self.algo not in VARIANTS:
            raise ConfigError(f"unknown algo '{self.algo}', expected one of {VARIANTS}")
        if self.env not in ENV_REGISTRY:
            raise ConfigError(f"unknown env '{self.env}', expected one of {tuple(ENV_REGISTRY)}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError(f"duplicate seeds in {self.seeds}")
        if any(s < 0 for s in self.seeds):
            raise ConfigError("seeds must be non-negative")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.jobs < 0:
            raise ConfigError("jobs must be >= 0")
        self.to_penalty_config().validate()

    def output_dir(self, flag: str | None = None) -> Path:
        """
        输出目录优先级: --out > 环境变量 RL_LAB_OUT > 文件 out 键 > config.OUTPUT_DIR
        """
        for candidate in (flag, os.environ.get(config.OUTPUT_DIR_ENV), self.out):
            if candidate:
                return Path(candidate)
        return Path(config.OUTPUT_DIR)

    # === 读写 ===

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        """
        读取 INI 配置文件

        Raises:
            ConfigError: 文件不存在 / 缺少 [run] 段 / 未知键 / 取值无法解析
        """
        parser = configparser.ConfigParser(interpolation=None)
        try:
            read = parser.read(path, encoding="utf-8")
        except configparser.Error as e:
            raise ConfigError(f"cannot parse config '{path}': {e}") from e
        if not read:
            raise ConfigError(f"config file '{path}' not found")
        if not parser.has_section(SECTION):
            raise ConfigError(f"config file '{path}' has no [{SECTION}] section")

        known = {f.name: f for f in fields(cls)}
        values: dict[str, Any] = {}
        for key, raw in parser.items(SECTION):
            if key not in known:
                raise ConfigError(f"unknown config key '{key}' in '{path}'")
            values[key] = _parse_value(key, str(known[key].type), raw)

        extra = [s for s in parser.sections() if s != SECTION]
        if extra:
            raise ConfigError(f"unknown config sections {extra} in '{path}'")

        logger.info(f"已读取运行配置: {path}")
        return cls(**values)

    def save(self, path: str | Path) -> None:
        """写出全部字段 (浮点数用 repr，保证读回后完全一致)"""
        parser = configparser.ConfigParser(interpolation=None)
        parser[SECTION] = {f.name: _format_value(getattr(self, f.name)) for f in fields(self)}
        with open(path, "w", encoding="utf-8", newline="\n") as fp:
            parser.write(fp)


def parse_seeds(raw: str) -> list[int]:
    """解析 "0,1,2" 形式的种子列表"""
    items = [s.strip() for s in str(raw).split(",") if s.strip()]
    try:
        return [int(s) for s in items]
    except ValueError as e:
        raise ConfigError(f"invalid seed list '{raw}'") from e


def _parse_value(key: str, type_name: str, raw: str) -> Any:
    try:
        match type_name:
            case "int":
                return int(raw)
            case "float":
                return float(raw)
            case "bool":
                lowered = raw.strip().lower()
                if lowered not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(raw)
                return lowered in ("true", "1", "yes")
            case "list[int]":
                return parse_seeds(raw)
            case _:
                return raw.strip()
    except ValueError as e:
        raise ConfigError(f"invalid value for '{key}': {raw!r}") from e


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ",".join(str(v) for v in value)
    return str(value)


__all__ = ["RunConfig", "parse_seeds"]
