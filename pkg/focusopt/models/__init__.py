"""
数据模型模块 - 网格、密度、报告与持久化记录
"""

from .grids import SphereGrid, BallGrid
from .densities import ScalarDensity, TangentDensity, FieldSample
from .reports import (
    SpectralTable,
    CriterionReport,
    CheckResult,
    FarFieldReport,
    PerturbationReport,
    VerificationSummary,
)
from .gram import OracleGram, Subspace
from .database import db, init_db, close_db
from .lambda_record import LambdaRecord
from .verification_record import VerificationRecord

__all__ = [
    'SphereGrid',
    'BallGrid',
    'ScalarDensity',
    'TangentDensity',
    'FieldSample',
    'SpectralTable',
    'CriterionReport',
    'CheckResult',
    'FarFieldReport',
    'PerturbationReport',
    'VerificationSummary',
    'OracleGram',
    'Subspace',
    'db',
    'init_db',
    'close_db',
    'LambdaRecord',
    'VerificationRecord',
]
