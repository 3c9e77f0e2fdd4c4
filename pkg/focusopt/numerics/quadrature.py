"""
求积规则 - 球面网格、球体网格与加权求和
"""

import math
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import special

from ..models.grids import BallGrid, SphereGrid
from ..utils.errors import DomainError
from ..utils.helpers import deterministic_sum
from ..utils.logger import get_logger
from .specfun import surface_area

logger = get_logger("focusopt_quadrature")

Integrand = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def gauss_legendre(n: int, a: float, b: float):
    """区间 [a, b] 上的 n 点 Gauss–Legendre 节点和权重"""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def sphere_grid(d: int, resolution: int) -> SphereGrid:
    """
    构造 S^{d−1} 上的乘积求积网格

    d=2 为 2·resolution 个等距角度（梯形规则）；d=3 为 cos(极角) 上 resolution 个
    Gauss–Legendre 节点乘以 2·resolution 个等距方位角，极轴取 x₃。

    Args:
        d: 维数，只支持 2 和 3
        resolution: 分辨率，≥ 4

    Returns:
        SphereGrid
    """
    if d not in (2, 3):
        raise DomainError(f"球面网格只支持 d=2,3: {d}")
    if int(resolution) != resolution or resolution < 4:
        raise DomainError(f"分辨率必须是 ≥4 的整数: {resolution}")
    resolution = int(resolution)
    n_azimuth = 2 * resolution
    phi = 2.0 * math.pi * np.arange(n_azimuth) / n_azimuth
    dphi = 2.0 * math.pi / n_azimuth

    if d == 2:
        nodes = np.column_stack([np.cos(phi), np.sin(phi)])
        weights = np.full(n_azimuth, dphi)
        return SphereGrid(d=2, resolution=resolution, nodes=nodes, weights=weights,
                          degree=n_azimuth - 1, n_polar=1, n_azimuth=n_azimuth)

    z, wz = np.polynomial.legendre.leggauss(resolution)
    sin_theta = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    zz = np.repeat(z, n_azimuth)
    ss = np.repeat(sin_theta, n_azimuth)
    pp = np.tile(phi, resolution)
    nodes = np.column_stack([ss * np.cos(pp), ss * np.sin(pp), zz])
    # 重新归一，消除 sin/cos 舍入
    nodes /= np.linalg.norm(nodes, axis=1)[:, None]
    weights = np.repeat(wz, n_azimuth) * dphi
    return SphereGrid(d=3, resolution=resolution, nodes=nodes, weights=weights,
                      degree=2 * resolution - 1, n_polar=resolution, n_azimuth=n_azimuth)


def ball_grid(d: int, R: float, radial_points: int, sphere: SphereGrid) -> BallGrid:
    """
    构造 B_R(0) 上的乘积网格：径向 Gauss–Legendre（权重含 r^{d−1}）× 球面网格

    Args:
        d: 维数，必须与 sphere.d 一致
        R: 半径，> 0
        radial_points: 径向节点数，≥ 4
        sphere: 球面网格

    Returns:
        BallGrid
    """
    if sphere.d != d:
        raise DomainError(f"维数不一致: d={d}, sphere.d={sphere.d}")
    if not R > 0:
        raise DomainError(f"球半径必须为正: {R}")
    if radial_points < 4:
        raise DomainError(f"径向节点数必须 ≥4: {radial_points}")
    radii, wr = gauss_legendre(int(radial_points), 0.0, float(R))
    wr = wr * radii ** (d - 1)
    nodes = (radii[:, None, None] * sphere.nodes[None, :, :]).reshape(-1, d)
    weights = (wr[:, None] * sphere.weights[None, :]).reshape(-1)
    return BallGrid(d=d, R=float(R), nodes=nodes, weights=weights,
                    radii=radii, radial_weights=wr, sphere=sphere)


def _evaluate(grid, integrand: Integrand) -> np.ndarray:
    values = integrand(grid.nodes) if callable(integrand) else integrand
    values = np.asarray(values)
    if values.shape[0] != grid.size:
        raise DomainError(f"被积函数取值个数 {values.shape[0]} 与节点数 {grid.size} 不符")
    return values


def _weighted_sum(grid, integrand: Integrand, workers: int):
    values = _evaluate(grid, integrand)
    shaped = grid.weights.reshape((-1,) + (1,) * (values.ndim - 1))
    total = deterministic_sum(shaped * values, workers)
    if np.ndim(total) == 0:
        return total.item() if hasattr(total, "item") else total
    return np.asarray(total)


def integrate_sphere(grid: SphereGrid, integrand: Integrand, workers: int = 1):
    """
    球面积分 ∫ integrand dσ 的加权求和

    Args:
        grid: 球面网格
        integrand: 节点数组 -> 取值的函数，或已在节点上取好的数组（标量或 d 维向量）
        workers: 线程数，结果与之无关

    Returns:
        标量或长度 d 的数组
    """
    return _weighted_sum(grid, integrand, workers)


def integrate_ball(grid: BallGrid, integrand: Integrand, workers: int = 1):
    """球体积分，用法同 integrate_sphere"""
    return _weighted_sum(grid, integrand, workers)


def monomial_sphere_integral(alpha: Sequence[int]) -> float:
    """
    单项式 ξ^α 在 S^{d−1} 上的精确积分

    任一指数为奇数时为 0，否则为 2·ΠΓ(β_i)/Γ(Σβ_i)，β_i = (α_i+1)/2。
    """
    if any(a % 2 for a in alpha):
        return 0.0
    betas = [(a + 1) / 2.0 for a in alpha]
    log_value = sum(special.gammaln(b) for b in betas) - special.gammaln(sum(betas))
    return 2.0 * math.exp(log_value)


def max_exactness_error(grid: SphereGrid, max_degree: Optional[int] = None) -> float:
    """对所有次数不超过网格精确次数（或 max_degree）的单项式，返回最大相对误差"""
    worst = 0.0
    top = grid.degree if max_degree is None else min(grid.degree, max_degree)
    for total in range(top + 1):
        for alpha in _compositions(total, grid.d):
            exact = monomial_sphere_integral(alpha)
            approx = integrate_sphere(grid, lambda x, a=alpha: np.prod(x ** np.array(a), axis=1))
            scale = max(1.0, abs(exact))
            worst = max(worst, abs(approx - exact) / scale)
    logger.debug(f"网格 d={grid.d} res={grid.resolution} 精确次数 {top}，最大误差 {worst:.3e}")
    return worst


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def total_weight_error(grid: SphereGrid) -> float:
    """权重和相对 |S^{d−1}| 的误差"""
    area = surface_area(grid.d)
    return abs(float(np.sum(grid.weights)) - area) / area
