"""
离散算子服务 - 用闭式球核离散 L*L 与 Π L*L Π，作为解析特征值的独立参照
"""

import math
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, special

from ..clients import EigenClient
from ..models.densities import ScalarDensity, TangentDensity
from ..models.gram import OracleGram, Subspace
from ..models.grids import SphereGrid
from ..models.reports import PerturbationReport
from ..numerics.quadrature import ball_grid, integrate_ball, sphere_grid
from ..numerics.specfun import ball_volume, bessel_j, surface_area
from ..utils.constants import GRID_MARGIN, KERNEL_SERIES_SWITCH
from ..utils.errors import AccuracyError, DomainError
from ..utils.helpers import ordered_map
from ..utils.logger import get_logger
from .field_service import random_scalar_density, synthesize_many

logger = get_logger("focusopt_oracle")

Density = Union[ScalarDensity, TangentDensity]

# 按行分块组装
ASSEMBLY_BLOCK = 128

PERTURBATION_SAMPLES = 20
PERTURBATION_SEED = 7
PERTURBATION_RADIAL_POINTS = 8


def ball_kernel(d: int, R: float, q) -> Union[float, np.ndarray]:
    """
    ∫_{B_R} e^{ix·ζ} dx，|ζ| = q

    d=3 为 4π(sin u − u cos u)/q³（u = Rq），u < 1e−4 时改用四项 Taylor 级数；
    一般 d 为 (2π)^{d/2}·R^{d/2}·J_{d/2}(Rq)/q^{d/2}。

    Args:
        d: 维数
        R: 球半径
        q: 标量或数组，≥ 0

    Returns:
        与 q 同形状的核值；q = 0 时为 |B_R|
    """
    q_arr = np.asarray(q, dtype=float)
    if np.any(q_arr < 0):
        raise DomainError("核的自变量必须非负")
    flat = np.atleast_1d(q_arr)
    u = R * flat
    small = u < KERNEL_SERIES_SWITCH
    out = np.empty_like(flat)
    if d == 3:
        us = u[small]
        out[small] = 4.0 * math.pi * R ** 3 * (
            1.0 / 3.0 - us ** 2 / 30.0 + us ** 4 / 840.0 - us ** 6 / 45360.0
        )
        ub, qb = u[~small], flat[~small]
        out[~small] = 4.0 * math.pi * (np.sin(ub) - ub * np.cos(ub)) / qb ** 3
    else:
        nu = d / 2.0
        us = u[small]
        lead = 2.0 ** (-nu) / special.gamma(nu + 1.0)
        series = lead * (1.0 - us ** 2 / (4.0 * (nu + 1.0)) + us ** 4 / (32.0 * (nu + 1.0) * (nu + 2.0)))
        out[small] = (2.0 * math.pi) ** nu * R ** d * series
        ub = u[~small]
        if ub.size:
            unique, inverse = np.unique(ub, return_inverse=True)
            j = np.asarray(bessel_j(nu, unique))[inverse]
            out[~small] = (2.0 * math.pi) ** nu * R ** d * j / ub ** nu
    if np.ndim(q_arr) == 0:
        return float(out[0])
    return out.reshape(q_arr.shape)


def tangent_frames(nodes: np.ndarray) -> np.ndarray:
    """
    每个节点 ξ 处 ξ^⊥ 的正交标架

    Returns:
        (N, d, d−1) 数组，列为切向量
    """
    n, d = nodes.shape
    if d == 2:
        t = np.column_stack([-nodes[:, 1], nodes[:, 0]])
        return t[:, :, None]
    if d != 3:
        raise DomainError(f"切标架只支持 d=2,3: {d}")
    axis = np.argmin(np.abs(nodes), axis=1)
    a = np.eye(3)[axis]
    t1 = a - np.sum(a * nodes, axis=1)[:, None] * nodes
    t1 /= np.linalg.norm(t1, axis=1)[:, None]
    t2 = np.cross(nodes, t1)
    return np.stack([t1, t2], axis=2)


def _check_grid(grid: SphereGrid, R: float) -> None:
    if not R > 0:
        raise DomainError(f"球半径必须为正: {R}")
    if grid.resolution < 2.0 * R + GRID_MARGIN:
        raise AccuracyError(
            f"网格分辨率 {grid.resolution} 不足以离散 R={R} 的球核（需要 ≥ {math.ceil(2 * R + GRID_MARGIN)}）"
        )


def _kernel_rows(grid: SphereGrid, R: float, rows: slice) -> np.ndarray:
    nodes = grid.nodes
    cosines = np.clip(nodes[rows] @ nodes.T, -1.0, 1.0)
    dist = np.sqrt(np.clip(2.0 - 2.0 * cosines, 0.0, None))
    return ball_kernel(grid.d, R, dist)


def assemble(grid: SphereGrid, R: float, subspace: Union[Subspace, str] = Subspace.FULL_SCALAR,
             workers: int = 1) -> OracleGram:
    """
    Nyström 离散：元素 √w_i K(ξ_i,ξ_j) √w_j，K(ξ,ξ′) = ∫_{B_R} e^{ix·(ξ′−ξ)} dx

    Args:
        grid: 球面网格，要求 resolution ≥ 2R + 16
        R: 球半径
        subspace: FULL_SCALAR / FULL_VECTOR（K ⊗ I_d）/ TANGENT（切标架下的块 K_ij·T_iᵀT_j）
        workers: 按行分块并行的线程数

    Returns:
        OracleGram
    """
    subspace = Subspace(subspace)
    _check_grid(grid, R)
    if subspace == Subspace.TANGENT and grid.d != 3:
        raise DomainError("TANGENT 离散只支持 d=3")
    n = grid.size
    blocks = [slice(i, min(i + ASSEMBLY_BLOCK, n)) for i in range(0, n, ASSEMBLY_BLOCK)]
    kernel = np.vstack(ordered_map(lambda rows: _kernel_rows(grid, R, rows), blocks, workers))
    s = np.sqrt(grid.weights)
    scalar = s[:, None] * kernel * s[None, :]
    scalar = 0.5 * (scalar + scalar.T)

    frames = None
    if subspace == Subspace.FULL_SCALAR:
        matrix = scalar
    elif subspace == Subspace.FULL_VECTOR:
        matrix = np.kron(scalar, np.eye(grid.d))
    else:
        frames = tangent_frames(grid.nodes)
        m = grid.d - 1
        overlap = np.einsum("iak,jal->ikjl", frames, frames)
        matrix = (scalar[:, None, :, None] * overlap).reshape(n * m, n * m)
        matrix = 0.5 * (matrix + matrix.T)
    logger.info(f"组装 {subspace.value} 矩阵: R={R} 分辨率 {grid.resolution}，阶数 {matrix.shape[0]}")
    return OracleGram(grid=grid, R=float(R), subspace=subspace, matrix=matrix, frames=frames)


def check_invariants(gram: OracleGram, symmetry_tol: float = 1e-13, psd_tol: float = 1e-10) -> Dict[str, Any]:
    """
    对称性与半正定性检查

    Returns:
        {"asymmetry": …, "min_eigenvalue": …, "symmetric": bool, "psd": bool}
    """
    A = gram.matrix
    scale = max(1.0, float(np.max(np.abs(A))))
    asym = float(np.max(np.abs(A - A.T))) / scale
    n = A.shape[0]
    min_eig = float(linalg.eigh(A, eigvals_only=True, subset_by_index=[0, 0])[0])
    result = {
        "asymmetry": asym,
        "min_eigenvalue": min_eig,
        "symmetric": asym <= symmetry_tol,
        "psd": min_eig >= -psd_tol,
    }
    if not (result["symmetric"] and result["psd"]):
        logger.warning(f"矩阵不变量失败: {result}")
    return result


def eigenfunction(gram: OracleGram, vector: np.ndarray) -> np.ndarray:
    """把特征向量去权重 (除以 √w) 还原为节点上的函数值"""
    grid = gram.grid
    s = np.sqrt(grid.weights)
    if gram.subspace == Subspace.FULL_SCALAR:
        return vector / s
    if gram.subspace == Subspace.FULL_VECTOR:
        return vector.reshape(grid.size, grid.d) / s[:, None]
    coeffs = vector.reshape(grid.size, grid.d - 1)
    return np.einsum("iak,ik->ia", gram.frames, coeffs) / s[:, None]


def top_eigenpairs(gram: OracleGram, count: int, client: Optional[EigenClient] = None) -> List[Tuple[float, np.ndarray]]:
    """
    最大的 count 个特征对，特征函数已去权重

    Args:
        gram: 离散算子
        count: 个数，≤ 20
        client: 求解客户端，缺省为 auto（幂迭代，失败时改用稠密求解）

    Returns:
        [(特征值, 节点上的特征函数)]，按特征值降序
    """
    client = client or EigenClient({})
    values, vectors = client.top_eigenpairs(gram.matrix, count)
    return [(float(values[i]), eigenfunction(gram, vectors[:, i])) for i in range(len(values))]


def _coefficients(gram: OracleGram, density: Density) -> np.ndarray:
    grid = gram.grid
    if density.grid is not grid and density.grid.size != grid.size:
        raise DomainError("密度与矩阵不在同一网格上")
    s = np.sqrt(grid.weights)
    if gram.subspace == Subspace.FULL_SCALAR:
        if not isinstance(density, ScalarDensity):
            raise DomainError("FULL_SCALAR 需要标量密度")
        return s * density.values
    if not isinstance(density, TangentDensity):
        raise DomainError(f"{gram.subspace.value} 需要向量密度")
    if gram.subspace == Subspace.FULL_VECTOR:
        return (s[:, None] * density.values).reshape(-1)
    coeffs = np.einsum("iak,ia->ik", gram.frames, density.values)
    return (s[:, None] * coeffs).reshape(-1)


def rayleigh(gram: OracleGram, density: Density) -> float:
    """
    Rayleigh 商 ‖L density‖²_{B_R} / ‖density‖²

    复密度按实部、虚部分别计算后相加。
    """
    y = _coefficients(gram, density)
    A = gram.matrix
    a, b = y.real, y.imag
    numerator = float(a @ A @ a + b @ A @ b)
    denominator = float(a @ a + b @ b)
    if denominator == 0.0:
        raise DomainError("零密度没有 Rayleigh 商")
    return numerator / denominator


def match_clusters(eigenvalues: Sequence[float], targets: Sequence[Tuple[float, int]]) -> List[Dict[str, Any]]:
    """
    把离散谱与解析值对应：每个目标取最接近的 multiplicity 个特征值

    Args:
        eigenvalues: 离散特征值
        targets: [(解析值, 重数)]

    Returns:
        每个目标的最大相对误差与取到的特征值
    """
    pool = list(eigenvalues)
    report = []
    for value, multiplicity in targets:
        chosen = sorted(pool, key=lambda e: abs(e - value))[:multiplicity]
        for e in chosen:
            pool.remove(e)
        rel = max(abs(e - value) / abs(value) for e in chosen) if chosen else math.inf
        report.append({"target": value, "multiplicity": multiplicity, "eigenvalues": chosen, "max_rel_error": rel})
    return report


def rotate_span_residual(grid: SphereGrid, functions: Sequence[np.ndarray]) -> float:
    """
    特征函数到 ℓ 旋转张成空间 span{Π e_j} 的相对残差（取最大）

    Args:
        grid: 球面网格
        functions: (N, d) 节点函数
    """
    basis = np.stack([np.eye(grid.d)[j] - grid.nodes[:, j:j + 1] * grid.nodes for j in range(grid.d)])
    s = np.sqrt(grid.weights)[:, None]
    B = np.column_stack([(s * b).reshape(-1) for b in basis])
    Q, _ = np.linalg.qr(B)
    worst = 0.0
    for f in functions:
        y = (s * f).reshape(-1)
        residual = y - Q @ (Q.T @ y)
        worst = max(worst, float(np.linalg.norm(residual) / np.linalg.norm(y)))
    return worst


def count_above(gram: OracleGram, threshold: float, client: Optional[EigenClient] = None,
                window: int = 8, rel_gap: float = 1e-8) -> int:
    """离散谱中严格大于 threshold·(1+rel_gap) 的特征值个数（只看前 window 个）"""
    client = client or EigenClient({"eigen_provider": "dense"})
    values, _ = client.top_eigenpairs(gram.matrix, window)
    return int(np.sum(values > threshold * (1.0 + rel_gap)))


def perturbation_check(grid: SphereGrid, R: float, samples: int = PERTURBATION_SAMPLES,
                       seed: int = PERTURBATION_SEED, workers: int = 1,
                       densities: Optional[Sequence[ScalarDensity]] = None) -> PerturbationReport:
    """
    L 与秩一算子 L₀f = ∫f dσ 之差的范数界

    ‖(L−L₀)f‖_{B_R} ≤ |S^{d−1}|·R^{(d+2)/2}/√(d+2)，‖Lf‖_{B_R} ≤ (|B_R|·|S^{d−1}|)^{1/2}

    Args:
        grid: 球面网格
        R: 球半径
        samples: 随机单位密度个数
        seed: 随机种子
        densities: 直接指定的密度（给定时忽略 samples/seed）

    Returns:
        PerturbationReport
    """
    _check_grid(grid, R)
    d = grid.d
    area = surface_area(d)
    diff_bound = area * R ** ((d + 2) / 2.0) / math.sqrt(d + 2)
    norm_bound = math.sqrt(ball_volume(d, R) * area)
    inner = sphere_grid(d, max(8, grid.resolution // 2)) if d == 3 else grid
    ball = ball_grid(d, R, PERTURBATION_RADIAL_POINTS, inner)
    if densities is None:
        rng = np.random.default_rng(seed)
        densities = [random_scalar_density(grid, rng) for _ in range(samples)]

    max_diff = 0.0
    max_norm = 0.0
    violations = 0
    for f in densities:
        f = f.normalized()
        field = np.array([s.E[0] for s in synthesize_many(f, ball.nodes, workers)])
        mean = complex(np.dot(grid.weights, f.values))
        norm_L = math.sqrt(float(integrate_ball(ball, np.abs(field) ** 2)))
        norm_diff = math.sqrt(float(integrate_ball(ball, np.abs(field - mean) ** 2)))
        max_diff = max(max_diff, norm_diff / diff_bound)
        max_norm = max(max_norm, norm_L / norm_bound)
        if norm_diff > diff_bound * (1 + 1e-12) or norm_L > norm_bound * (1 + 1e-12):
            violations += 1
    logger.info(f"扰动界 R={R}: 最大比值 {max_diff:.4f} / {max_norm:.4f}，违反 {violations}")
    return PerturbationReport(
        d=d,
        R=float(R),
        samples=len(densities),
        max_difference_ratio=max_diff,
        max_norm_ratio=max_norm,
        violations=violations,
        difference_bound=diff_bound,
        norm_bound=norm_bound,
    )


def normalized_top_spectrum(grid: SphereGrid, R: float, subspace: Union[Subspace, str],
                            count: int, client: Optional[EigenClient] = None) -> np.ndarray:
    """小半径时的前 count 个特征值除以 |B_R|，极限为秩受限算子的谱"""
    gram = assemble(grid, R, subspace)
    client = client or EigenClient({"eigen_provider": "dense"})
    values, _ = client.top_eigenpairs(gram.matrix, count)
    return values / ball_volume(grid.d, R)


def off_cluster_exponent(grid: SphereGrid, radii: Sequence[float],
                         client: Optional[EigenClient] = None) -> Dict[str, Any]:
    """
    顶端特征值之外最大特征值随 R 的幂律指数（对 log–log 做线性回归）

    Returns:
        {"radii": …, "top": …, "off_cluster": …, "exponent": …, "top_exponent": …}
    """
    client = client or EigenClient({"eigen_provider": "dense"})
    tops, offs = [], []
    for R in radii:
        gram = assemble(grid, R, Subspace.FULL_SCALAR)
        values, _ = client.top_eigenpairs(gram.matrix, 2)
        tops.append(float(values[0]))
        offs.append(float(values[1]))
    logs = np.log(np.asarray(radii, dtype=float))
    exponent = float(np.polyfit(logs, np.log(offs), 1)[0])
    top_exponent = float(np.polyfit(logs, np.log(tops), 1)[0])
    logger.info(f"簇外特征值指数 {exponent:.4f}，顶端指数 {top_exponent:.4f}")
    return {
        "radii": [float(r) for r in radii],
        "top": tops,
        "off_cluster": offs,
        "exponent": exponent,
        "top_exponent": top_exponent,
    }


class OracleService:
    """按配置组装离散算子并求特征对"""

    def __init__(self, config: Dict[str, Any], workers: int = 1):
        self.config = config
        self.oracle_config = config.get("oracle", {})
        self.workers = workers
        self.client = EigenClient(self.oracle_config)

    def assemble(self, grid: SphereGrid, R: float, subspace: Union[Subspace, str]) -> OracleGram:
        return assemble(grid, R, subspace, self.workers)

    def top_eigenpairs(self, gram: OracleGram, count: int) -> List[Tuple[float, np.ndarray]]:
        return top_eigenpairs(gram, count, self.client)

    def eigenvalues(self, gram: OracleGram, count: int) -> np.ndarray:
        values, _ = self.client.top_eigenpairs(gram.matrix, count)
        return values
