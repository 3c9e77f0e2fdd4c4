"""
服务模块
"""

from .spectrum_service import SpectrumService
from .field_service import FieldService
from .oracle_service import OracleService
from .store_service import StoreService
from .verify_service import VerifyService

__all__ = ['SpectrumService', 'FieldService', 'OracleService', 'StoreService', 'VerifyService']
