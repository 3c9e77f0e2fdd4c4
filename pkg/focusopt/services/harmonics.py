"""
低次齐次调和多项式
"""

from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from ..utils.errors import DomainError

# 有限差分 Laplace 检查
LAPLACIAN_STEP = 1e-2
LAPLACIAN_POINTS = 5
LAPLACIAN_SEED = 4


@dataclass(frozen=True)
class HarmonicPolynomial:
    """R^d 上的 k 次齐次多项式，evaluate 接受 (N, d) 数组"""

    name: str
    d: int
    degree: int
    evaluate: Callable[[np.ndarray], np.ndarray]

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.d:
            raise DomainError(f"{self.name}: 点的维数 {pts.shape[1]} ≠ {self.d}")
        return np.asarray(self.evaluate(pts), dtype=float)


def _constant(d: int) -> HarmonicPolynomial:
    return HarmonicPolynomial("1", d, 0, lambda x: np.ones(x.shape[0]))


def _coordinate(d: int, j: int) -> HarmonicPolynomial:
    return HarmonicPolynomial(f"x{j + 1}", d, 1, lambda x: x[:, j])


def _square_difference(d: int, j: int) -> HarmonicPolynomial:
    return HarmonicPolynomial(f"x1^2-x{j + 1}^2", d, 2, lambda x: x[:, 0] ** 2 - x[:, j] ** 2)


def _product(d: int, i: int, j: int) -> HarmonicPolynomial:
    return HarmonicPolynomial(f"x{i + 1}x{j + 1}", d, 2, lambda x: x[:, i] * x[:, j])


def _cubic(d: int) -> HarmonicPolynomial:
    if d == 2:
        return HarmonicPolynomial("x1^3-3x1x2^2", 2, 3, lambda x: x[:, 0] ** 3 - 3 * x[:, 0] * x[:, 1] ** 2)
    return HarmonicPolynomial("x1x2x3", d, 3, lambda x: x[:, 0] * x[:, 1] * x[:, 2])


def standard_family(d: int) -> List[HarmonicPolynomial]:
    """
    常用调和多项式族：1；ξ_j；ξ₁²−ξ_j²；ξ_iξ_j；以及一个三次多项式

    Args:
        d: 维数，≥ 2

    Returns:
        多项式列表，按次数排列
    """
    if d < 2:
        raise DomainError(f"维数必须 ≥2: {d}")
    family = [_constant(d)]
    family += [_coordinate(d, j) for j in range(d)]
    family += [_square_difference(d, j) for j in range(1, d)]
    family += [_product(d, i, j) for i in range(d) for j in range(i + 1, d)]
    family.append(_cubic(d))
    return family


def find_harmonic(d: int, name: str) -> HarmonicPolynomial:
    """按名字查找标准族成员"""
    for poly in standard_family(d):
        if poly.name == name:
            return poly
    raise DomainError(f"d={d} 没有名为 {name} 的调和多项式")


def of_degree(d: int, k: int) -> HarmonicPolynomial:
    """标准族中第一个 k 次多项式"""
    for poly in standard_family(d):
        if poly.degree == k:
            return poly
    raise DomainError(f"d={d} 的标准族没有 {k} 次多项式")


def laplacian(poly: HarmonicPolynomial, points: np.ndarray, step: float = LAPLACIAN_STEP) -> np.ndarray:
    """二阶中心差分近似 ΔP"""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    center = poly(pts)
    total = np.zeros(pts.shape[0])
    for axis in range(poly.d):
        shift = np.zeros(poly.d)
        shift[axis] = step
        total += (poly(pts + shift) - 2.0 * center + poly(pts - shift)) / step ** 2
    return total


def is_harmonic(poly: HarmonicPolynomial, points: int = LAPLACIAN_POINTS,
                seed: int = LAPLACIAN_SEED, tol: float = 1e-6) -> bool:
    """在若干随机点上抽查 ΔP ≈ 0"""
    rng = np.random.default_rng(seed)
    sample = rng.normal(size=(points, poly.d))
    scale = max(1.0, float(np.max(np.abs(poly(sample)))))
    return bool(np.max(np.abs(laplacian(poly, sample))) <= tol * scale)
