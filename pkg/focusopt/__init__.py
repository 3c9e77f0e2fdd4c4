"""
focusopt - 单色标量波与 Maxwell 波的最优聚焦

Λ_{d,k}(R) 谱函数、Maxwell 顶端特征值与极值密度 ℓ、逐点场界、能量密度曲线，
以及与之独立的离散算子校验。
"""

from .config import ConfigField, RunConfig, config_schema, default_config, load_config
from .utils.constants import Convention, DensityMode
from .utils.errors import AccuracyError, BracketError, DomainError, FocusError, IterationError

__version__ = "1.0.0"

__all__ = [
    'ConfigField',
    'RunConfig',
    'config_schema',
    'default_config',
    'load_config',
    'Convention',
    'DensityMode',
    'FocusError',
    'DomainError',
    'AccuracyError',
    'BracketError',
    'IterationError',
    '__version__',
]
