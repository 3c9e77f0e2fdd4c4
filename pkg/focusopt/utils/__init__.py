"""
工具模块
"""

from .constants import Convention, DensityMode, PAPER_NORMALIZER
from .errors import (
    FocusError,
    DomainError,
    AccuracyError,
    BracketError,
    IterationError,
    CancellationWarning,
)
from .helpers import format_float, atomic_write_text, radius_lattice, resolve_workers, to_builtin
from .logger import get_logger

__all__ = [
    'Convention',
    'DensityMode',
    'PAPER_NORMALIZER',
    'FocusError',
    'DomainError',
    'AccuracyError',
    'BracketError',
    'IterationError',
    'CancellationWarning',
    'format_float',
    'atomic_write_text',
    'radius_lattice',
    'resolve_workers',
    'to_builtin',
    'get_logger',
]
