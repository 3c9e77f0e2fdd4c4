"""
求积网格 - 球面与球体
"""

from dataclasses import dataclass

import numpy as np


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """S^{d−1} 上的求积节点与权重，构造后不可变"""

    d: int
    resolution: int
    nodes: np.ndarray  # (N, d) 单位向量，极角下标优先、方位角下标其次
    weights: np.ndarray  # (N,) 正权重
    degree: int  # 精确积分的多项式次数
    n_polar: int
    n_azimuth: int

    def __post_init__(self):
        object.__setattr__(self, "nodes", _freeze(self.nodes))
        object.__setattr__(self, "weights", _freeze(self.weights))

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    def __len__(self) -> int:
        return self.size


@dataclass(frozen=True, eq=False)
class BallGrid:
    """B_R(0) 上的径向 × 球面乘积求积"""

    d: int
    R: float
    nodes: np.ndarray  # (M·N, d)，径向下标优先
    weights: np.ndarray
    radii: np.ndarray  # 径向 Gauss–Legendre 节点
    radial_weights: np.ndarray  # 已乘 r^{d−1}
    sphere: SphereGrid

    def __post_init__(self):
        for name in ("nodes", "weights", "radii", "radial_weights"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])
