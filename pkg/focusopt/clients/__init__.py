"""
客户端模块
"""

from .eigen_client import EigenClient, BaseEigenProvider, PowerIterationProvider, DenseProvider

__all__ = ['EigenClient', 'BaseEigenProvider', 'PowerIterationProvider', 'DenseProvider']
