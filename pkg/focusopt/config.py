"""
配置 - 配置项定义、config.toml 读取与运行参数校验
"""

import copy
import math
import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional

from .utils.constants import (
    BESSEL_ABS_TOL,
    CROSSING_TOL,
    EIGEN_SEED,
    LAMBDA_RTOL,
    PANEL_NODES,
    PANEL_WIDTH,
    POWER_MAX_ITERATIONS,
    POWER_RAYLEIGH_TOL,
    Convention,
)
from .utils.errors import DomainError
from .utils.helpers import THREADS_ENV
from .utils.logger import get_logger

logger = get_logger("focusopt_config")

DEFAULT_CONFIG_PATH = "config.toml"


@dataclass(frozen=True)
class ConfigField:
    """单个配置项"""

    type: type
    default: Any
    description: str = ""
    choices: Optional[tuple] = None


config_schema = {
    # =============================================================================
    # 运行参数
    # =============================================================================
    "run": {
        "d": ConfigField(type=int, default=3, description="空间维数"),
        "r_min": ConfigField(type=float, default=0.05, description="半径格点起点"),
        "r_max": ConfigField(type=float, default=2 * math.pi, description="半径格点终点"),
        "r_step": ConfigField(type=float, default=0.05, description="半径格点步长"),
        "kmax": ConfigField(type=int, default=3, description="谱表最高次数 k"),
        "resolution": ConfigField(type=int, default=24, description="球面网格分辨率（d=3 时为极向节点数）"),
        "convention": ConfigField(
            type=str,
            default="oracle",
            description="Λ 前置系数约定: oracle(与离散算子一致)/paper(定义式中的 (2π)^{d/2}·|S^{d−1}| 系数)",
            choices=("oracle", "paper"),
        ),
        "format": ConfigField(type=str, default="csv", description="输出格式: csv/json", choices=("csv", "json")),
        "threads": ConfigField(type=int, default=None, description="工作线程数，缺省读 FOCUSOPT_THREADS"),
    },

    # =============================================================================
    # 数值参数
    # =============================================================================
    "numerics": {
        "panel_width": ConfigField(type=float, default=PANEL_WIDTH, description="径向积分面板宽度"),
        "panel_nodes": ConfigField(type=int, default=PANEL_NODES, description="每个面板的 Gauss–Legendre 节点数"),
        "lambda_rtol": ConfigField(type=float, default=LAMBDA_RTOL, description="Λ 面板加倍的相对容差"),
        "crossing_tol": ConfigField(type=float, default=CROSSING_TOL, description="二分求根容差"),
        "bessel_abs_tol": ConfigField(type=float, default=BESSEL_ABS_TOL, description="参考 Bessel 积分的绝对容差"),
    },

    # =============================================================================
    # 离散算子
    # =============================================================================
    "oracle": {
        "eigen_provider": ConfigField(
            type=str,
            default="auto",
            description="特征值求解器: power(幂迭代)/dense(LAPACK)/auto(幂迭代失败时改用 dense)",
            choices=("power", "dense", "auto"),
        ),
        "max_iterations": ConfigField(type=int, default=POWER_MAX_ITERATIONS, description="幂迭代步数上限"),
        "rayleigh_tol": ConfigField(type=float, default=POWER_RAYLEIGH_TOL, description="Rayleigh 商收敛容差"),
        "seed": ConfigField(type=int, default=EIGEN_SEED, description="幂迭代起始向量的随机种子"),
    },

    # =============================================================================
    # 缓存与历史
    # =============================================================================
    "storage": {
        "enabled": ConfigField(type=bool, default=False, description="是否启用 Λ 缓存与验证历史"),
        "db_path": ConfigField(type=str, default="focusopt_cache.db", description="SQLite 数据库路径"),
    },

    "logging": {
        "level": ConfigField(type=str, default="WARNING", description="日志级别",
                             choices=("DEBUG", "INFO", "WARNING", "ERROR")),
    },
}


def default_config() -> Dict[str, Dict[str, Any]]:
    """由 config_schema 生成默认配置"""
    return {
        section: {key: copy.deepcopy(field.default) for key, field in fields.items()}
        for section, fields in config_schema.items()
    }


def _coerce(section: str, key: str, value: Any) -> Any:
    field = config_schema.get(section, {}).get(key)
    if field is None or value is None:
        return value
    try:
        if field.type is bool and not isinstance(value, bool):
            raise TypeError
        if field.type is int and isinstance(value, float) and not value.is_integer():
            raise TypeError
        coerced = field.type(value)
    except (TypeError, ValueError):
        raise DomainError(f"配置项 {section}.{key} 应为 {field.type.__name__}: {value!r}")
    if field.choices and coerced not in field.choices:
        raise DomainError(f"配置项 {section}.{key} 只能取 {'/'.join(field.choices)}: {coerced!r}")
    return coerced


def merge_config(base: Dict[str, Dict[str, Any]], updates: Mapping[str, Mapping[str, Any]]) -> Dict[str, Dict[str, Any]]:
    """按节合并；未知的节与键记一条警告后保留"""
    merged = copy.deepcopy(base)
    for section, values in updates.items():
        if not isinstance(values, Mapping):
            raise DomainError(f"配置节 [{section}] 必须是表")
        if section not in config_schema:
            logger.warning(f"未知的配置节: [{section}]")
        target = merged.setdefault(section, {})
        for key, value in values.items():
            if value is None:
                continue
            if section in config_schema and key not in config_schema[section]:
                logger.warning(f"未知的配置项: {section}.{key}")
            target[key] = _coerce(section, key, value)
    return merged


def load_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Mapping[str, Any]]] = None) -> Dict[str, Dict[str, Any]]:
    """
    读取配置

    优先级: 命令行 > 环境变量 FOCUSOPT_THREADS > config.toml > 默认值

    Args:
        path: config.toml 路径；为 None 时读取当前目录下存在的 config.toml
        overrides: 命令行给出的 {节: {键: 值}}，值为 None 的项忽略

    Returns:
        完整配置字典
    """
    config = default_config()

    explicit = path is not None
    path = path or DEFAULT_CONFIG_PATH
    if os.path.exists(path):
        try:
            with open(path, "rb") as handle:
                file_config = tomllib.load(handle)
        except tomllib.TOMLDecodeError as e:
            raise DomainError(f"配置文件 {path} 解析失败: {str(e)}")
        config = merge_config(config, file_config)
        logger.debug(f"已读取配置文件 {path}")
    elif explicit:
        raise DomainError(f"配置文件不存在: {path}")

    threads = os.environ.get(THREADS_ENV)
    if threads:
        config = merge_config(config, {"run": {"threads": threads}})

    if overrides:
        config = merge_config(config, overrides)
    return config


@dataclass(frozen=True)
class RunConfig:
    """一次命令运行的参数"""

    d: int = 3
    r_min: float = 0.05
    r_max: float = 2 * math.pi
    r_step: float = 0.05
    kmax: int = 3
    resolution: int = 24
    convention: Convention = Convention.ORACLE_CONSISTENT
    format: str = "csv"
    output_path: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "convention", Convention.parse(self.convention))
        if self.d < 2:
            raise DomainError(f"维数必须 ≥ 2: {self.d}")
        if not self.r_min > 0:
            raise DomainError(f"r_min 必须为正: {self.r_min}")
        if not self.r_step > 0:
            raise DomainError(f"r_step 必须为正: {self.r_step}")
        if self.r_max < self.r_min:
            raise DomainError(f"r_max 不能小于 r_min: {self.r_max} < {self.r_min}")
        if self.kmax < 0:
            raise DomainError(f"kmax 不能为负: {self.kmax}")
        if self.resolution < 8:
            raise DomainError(f"resolution 必须 ≥ 8: {self.resolution}")
        if self.format not in ("csv", "json"):
            raise DomainError(f"不支持的输出格式: {self.format}")

    @classmethod
    def from_config(cls, config: Dict[str, Any], output_path: Optional[str] = None) -> "RunConfig":
        run = config.get("run", {})
        return cls(
            d=int(run.get("d", 3)),
            r_min=float(run.get("r_min", 0.05)),
            r_max=float(run.get("r_max", 2 * math.pi)),
            r_step=float(run.get("r_step", 0.05)),
            kmax=int(run.get("kmax", 3)),
            resolution=int(run.get("resolution", 24)),
            convention=run.get("convention", "oracle"),
            format=str(run.get("format", "csv")),
            output_path=output_path,
        )
