"""
特征值客户端 - 统一的对称矩阵最大特征对求解接口
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Tuple

import numpy as np
from scipy import linalg

from ..utils.constants import EIGEN_SEED, POWER_MAX_ITERATIONS, POWER_RAYLEIGH_TOL
from ..utils.errors import DomainError, IterationError
from ..utils.logger import get_logger

logger = get_logger("focusopt_eigen")

Eigenpairs = Tuple[np.ndarray, np.ndarray]

MAX_EIGENPAIRS = 20


class BaseEigenProvider(ABC):
    """求解器基类"""

    @abstractmethod
    def top(self, matrix: np.ndarray, count: int) -> Eigenpairs:
        """返回最大的 count 个特征值（降序）及对应的列向量"""
        pass


class PowerIterationProvider(BaseEigenProvider):
    """幂迭代 + Hotelling 收缩"""

    def __init__(self, config: Dict[str, Any]):
        self.config = config
        self.max_iterations = int(config.get("max_iterations", POWER_MAX_ITERATIONS))
        self.tol = float(config.get("rayleigh_tol", POWER_RAYLEIGH_TOL))
        self.seed = int(config.get("seed", EIGEN_SEED))

    def _single(self, matrix: np.ndarray, start: np.ndarray, scale: float) -> Tuple[float, np.ndarray]:
        v = start / np.linalg.norm(start)
        w = matrix @ v
        lam = float(v @ w)
        for iteration in range(1, self.max_iterations + 1):
            norm = np.linalg.norm(w)
            if norm == 0.0:
                return 0.0, v
            v = w / norm
            w = matrix @ v
            new_lam = float(v @ w)
            residual = float(np.linalg.norm(w - new_lam * v))
            converged = abs(new_lam - lam) <= self.tol * abs(new_lam)
            if converged and residual <= 1e-8 * abs(new_lam) + 1e-14 * scale:
                logger.debug(f"幂迭代 {iteration} 步收敛: λ={new_lam:.12e}")
                return new_lam, v
            lam = new_lam
        raise IterationError(f"幂迭代 {self.max_iterations} 步未收敛（λ≈{lam:.6e}，可能存在近简并）")

    def top(self, matrix: np.ndarray, count: int) -> Eigenpairs:
        """逐个求最大特征对，每求得一个就从矩阵中收缩掉"""
        rng = np.random.default_rng(self.seed)
        work = np.array(matrix, dtype=float, copy=True)
        n = work.shape[0]
        values = []
        vectors = []
        scale = 0.0
        for _ in range(count):
            start = rng.standard_normal(n)
            # 与已求得的特征向量正交化
            for u in vectors:
                start -= (u @ start) * u
            lam, v = self._single(work, start, scale)
            for u in vectors:
                v -= (u @ v) * u
            v /= np.linalg.norm(v)
            scale = max(scale, abs(lam))
            values.append(lam)
            vectors.append(v)
            work -= lam * np.outer(v, v)
        order = np.argsort(-np.array(values), kind="stable")
        return np.array(values)[order], np.column_stack(vectors)[:, order]


class DenseProvider(BaseEigenProvider):
    """LAPACK 稠密对称特征分解，只取最大的若干个"""

    def __init__(self, config: Dict[str, Any]):
        self.config = config

    def top(self, matrix: np.ndarray, count: int) -> Eigenpairs:
        n = matrix.shape[0]
        values, vectors = linalg.eigh(matrix, subset_by_index=[n - count, n - 1])
        order = np.argsort(-values, kind="stable")
        return values[order], vectors[:, order]


class EigenClient:
    """特征值客户端 - 按 eigen_provider 选择求解器"""

    def __init__(self, config: Dict[str, Any]):
        self.config = config
        self.provider_type = config.get("eigen_provider", "auto")
        self.provider = self._create_provider()

    def _create_provider(self) -> BaseEigenProvider:
        """创建求解器实例"""
        if self.provider_type in {"power", "auto"}:
            return PowerIterationProvider(self.config)
        if self.provider_type == "dense":
            return DenseProvider(self.config)
        raise ValueError(f"不支持的求解器类型: {self.provider_type}")

    def top_eigenpairs(self, matrix: np.ndarray, count: int) -> Eigenpairs:
        """
        对称矩阵的最大 count 个特征对

        Args:
            matrix: 实对称矩阵
            count: 个数，1 ≤ count ≤ 20

        Returns:
            (降序特征值, 列特征向量)
        """
        if not 1 <= count <= MAX_EIGENPAIRS:
            raise DomainError(f"特征对个数必须在 1..{MAX_EIGENPAIRS}: {count}")
        count = min(count, matrix.shape[0])
        try:
            return self.provider.top(matrix, count)
        except IterationError as e:
            if self.provider_type != "auto":
                raise
            logger.warning(f"幂迭代失败，改用稠密求解: {str(e)}")
            return DenseProvider(self.config).top(matrix, count)
