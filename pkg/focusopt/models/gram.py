"""
离散 Gram 矩阵
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .grids import SphereGrid


class Subspace(str, Enum):
    """离散化所作用的函数空间"""

    FULL_SCALAR = "full_scalar"
    FULL_VECTOR = "full_vector"
    TANGENT = "tangent"


@dataclass(frozen=True, eq=False)
class OracleGram:
    """
    L*L（或 Π L*L Π）在球面网格上的 Nyström 离散

    矩阵为实对称，元素 √w_i K(ξ_i,ξ_j) √w_j；FULL_VECTOR 为 K ⊗ I_d，
    TANGENT 在每个节点的正交切标架下取块 K_ij·T_iᵀT_j。
    """

    grid: SphereGrid
    R: float
    subspace: Subspace
    matrix: np.ndarray
    # TANGENT 时每个节点的切标架 (N, d, d−1)
    frames: Optional[np.ndarray] = None

    def __post_init__(self):
        arr = np.ascontiguousarray(self.matrix, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)
        if self.frames is not None:
            frames = np.ascontiguousarray(self.frames, dtype=float)
            frames.setflags(write=False)
            object.__setattr__(self, "frames", frames)

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def block(self) -> int:
        """每个节点占用的行数"""
        if self.subspace == Subspace.FULL_SCALAR:
            return 1
        if self.subspace == Subspace.FULL_VECTOR:
            return self.grid.d
        return self.grid.d - 1

    @property
    def sqrt_weights(self) -> np.ndarray:
        """按矩阵行展开的 √w"""
        return np.repeat(np.sqrt(self.grid.weights), self.block)
