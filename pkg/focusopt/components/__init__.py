"""
组件模块
"""

from .commands import (
    BaseCommand,
    LambdaCommand,
    DensityCommand,
    CrossingsCommand,
    VerifyCommand,
    FieldCommand,
    COMMANDS,
)

__all__ = [
    'BaseCommand',
    'LambdaCommand',
    'DensityCommand',
    'CrossingsCommand',
    'VerifyCommand',
    'FieldCommand',
    'COMMANDS',
]
