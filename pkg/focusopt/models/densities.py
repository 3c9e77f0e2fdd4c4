"""
远场密度与场取样
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..utils.constants import TANGENT_TOL
from ..utils.errors import DomainError
from .grids import SphereGrid


def _freeze_complex(values) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ScalarDensity:
    """球面上的标量密度 f(ξ)"""

    grid: SphereGrid
    values: np.ndarray  # (N,)

    def __post_init__(self):
        values = _freeze_complex(self.values)
        if values.shape != (self.grid.size,):
            raise DomainError(f"标量密度形状 {values.shape} 与网格 {self.grid.size} 不符")
        object.__setattr__(self, "values", values)

    @property
    def norm_squared(self) -> float:
        return float(np.dot(self.grid.weights, np.abs(self.values) ** 2))

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.norm_squared))

    def is_normalized(self, tol: float = 1e-10) -> bool:
        return abs(self.norm_squared - 1.0) <= tol

    def normalized(self) -> "ScalarDensity":
        """L² 归一化后的副本"""
        norm = self.norm
        if norm == 0.0:
            raise DomainError("零密度无法归一化")
        return ScalarDensity(self.grid, self.values / norm)

    def scaled(self, factor: complex) -> "ScalarDensity":
        return ScalarDensity(self.grid, self.values * factor)


@dataclass(frozen=True, eq=False)
class TangentDensity:
    """球面上的切向量密度 𝐞(ξ)，满足 ξ·𝐞(ξ) = 0"""

    grid: SphereGrid
    values: np.ndarray  # (N, d)

    def __post_init__(self):
        values = _freeze_complex(self.values)
        if values.shape != (self.grid.size, self.grid.d):
            raise DomainError(f"切向密度形状 {values.shape} 与网格不符")
        radial = np.abs(np.einsum("ij,ij->i", self.grid.nodes, values))
        scale = max(1.0, float(np.max(np.abs(values))) if values.size else 1.0)
        if radial.size and float(np.max(radial)) > TANGENT_TOL * scale:
            raise DomainError(f"密度不是切向的: max|ξ·e| = {float(np.max(radial)):.3e}")
        object.__setattr__(self, "values", values)

    @property
    def d(self) -> int:
        return self.grid.d

    @property
    def norm_squared(self) -> float:
        pointwise = np.sum(np.abs(self.values) ** 2, axis=1)
        return float(np.dot(self.grid.weights, pointwise))

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.norm_squared))

    def is_normalized(self, tol: float = 1e-10) -> bool:
        return abs(self.norm_squared - 1.0) <= tol

    def normalized(self) -> "TangentDensity":
        """L² 归一化后的副本"""
        norm = self.norm
        if norm == 0.0:
            raise DomainError("零密度无法归一化")
        return TangentDensity(self.grid, self.values / norm)

    def scaled(self, factor: complex) -> "TangentDensity":
        return TangentDensity(self.grid, self.values * factor)


@dataclass(frozen=True, eq=False)
class FieldSample:
    """空间点 x 处的合成场；标量密度时 E 为长度 1 的数组、B 为 None"""

    x: np.ndarray
    E: np.ndarray
    B: Optional[np.ndarray] = None

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.E))
