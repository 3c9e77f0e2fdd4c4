"""
场服务 - 远场密度、场合成、逐点界、闭式调和场与远场检验
"""

import math
from itertools import product
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.transform import Rotation

from ..models.densities import FieldSample, ScalarDensity, TangentDensity
from ..models.grids import SphereGrid
from ..models.reports import FarFieldReport
from ..numerics.quadrature import integrate_sphere
from ..numerics.specfun import BesselOrder, bessel_j, surface_area
from ..utils.constants import GRID_MARGIN, UNIT_TOL
from ..utils.errors import AccuracyError, DomainError
from ..utils.helpers import as_unit_vectors, ordered_map
from ..utils.logger import get_logger
from .harmonics import HarmonicPolynomial, is_harmonic, standard_family

logger = get_logger("focusopt_fields")

Density = Union[ScalarDensity, TangentDensity]

# 批量合成时每块的点数（固定，保证结果与线程数无关）
SYNTHESIS_BLOCK = 64

# 远场检验
FAR_FIELD_MIN_R = 50.0
FAR_FIELD_SAMPLES = 16
FAR_FIELD_DIRECTIONS = 8
FAR_FIELD_SEED = 11

# 导数界检验
DERIVATIVE_STEP = 1e-2
DERIVATIVE_SLACK = 1e-6


def ell(d: int, xi) -> np.ndarray:
    """
    ℓ(ξ) = e₁ − ξ₁·ξ，固定单位向量在 ξ 切平面上的投影

    Args:
        d: 维数
        xi: 单位向量 (d,) 或 (N, d)

    Returns:
        与 xi 同形状的切向量
    """
    arr = np.asarray(xi, dtype=float)
    if arr.shape[-1] != d:
        raise DomainError(f"ξ 的维数 {arr.shape[-1]} ≠ {d}")
    unit = as_unit_vectors(arr.reshape(-1, d), UNIT_TOL)
    out = -unit[:, :1] * unit
    out[:, 0] += 1.0
    return out.reshape(arr.shape)


def ell_expansion(grid: SphereGrid) -> np.ndarray:
    """
    ℓ 的球谐展开在节点上的值

    ℓ₁ = (d−1)/d − (1/d)·Σ_{j≥2}(ξ₁²−ξ_j²)，ℓ_j = −ξ₁ξ_j（j ≥ 2）
    """
    d = grid.d
    family = {p.name: p for p in standard_family(d)}
    nodes = grid.nodes
    out = np.zeros((grid.size, d))
    first = np.full(grid.size, (d - 1) / d)
    for j in range(2, d + 1):
        first -= family[f"x1^2-x{j}^2"](nodes) / d
    out[:, 0] = first
    for j in range(2, d + 1):
        out[:, j - 1] = -family[f"x1x{j}"](nodes)
    return out


def ell_expansion_check(grid: SphereGrid) -> float:
    """ℓ 与其球谐展开在所有节点上的最大差"""
    if grid.d < 2:
        raise DomainError(f"维数必须 ≥2: {grid.d}")
    return float(np.max(np.abs(ell(grid.d, grid.nodes) - ell_expansion(grid))))


def project_tangent(grid: SphereGrid, v) -> TangentDensity:
    """
    节点上的切向投影 Π：𝐞(ξ) = v(ξ) − (ξ·v(ξ))ξ

    Args:
        grid: 球面网格
        v: (N, d) 数组、常向量 (d,) 或节点 -> 值的函数

    Returns:
        TangentDensity
    """
    nodes = grid.nodes
    values = v(nodes) if callable(v) else v
    values = np.asarray(values, dtype=complex)
    if values.shape == (grid.d,):
        values = np.broadcast_to(values, (grid.size, grid.d))
    radial = np.einsum("ij,ij->i", nodes, values)
    projected = values - radial[:, None] * nodes
    # 再投影一次消除舍入残差
    radial = np.einsum("ij,ij->i", nodes, projected)
    return TangentDensity(grid, projected - radial[:, None] * nodes)


def ell_density(grid: SphereGrid) -> TangentDensity:
    """𝐞 = ℓ"""
    return TangentDensity(grid, ell(grid.d, grid.nodes))


def constant_density(grid: SphereGrid, value: complex = 1.0) -> ScalarDensity:
    return ScalarDensity(grid, np.full(grid.size, value, dtype=complex))


def harmonic_density(grid: SphereGrid, poly: HarmonicPolynomial) -> ScalarDensity:
    """调和多项式在球面上的限制"""
    return ScalarDensity(grid, poly(grid.nodes))


def rotation_matrix(axis: Sequence[float], angle: float) -> np.ndarray:
    """
    轴角参数的旋转矩阵

    Args:
        axis: d=3 时为旋转轴；d=2 时传长度 2 的任意向量，只用角度

    Returns:
        d×d 正交矩阵
    """
    axis = np.asarray(axis, dtype=float)
    if axis.shape == (2,):
        c, s = math.cos(angle), math.sin(angle)
        return np.array([[c, -s], [s, c]])
    if axis.shape != (3,) or np.linalg.norm(axis) == 0:
        raise DomainError("旋转轴必须是非零三维向量")
    rotvec = axis / np.linalg.norm(axis) * angle
    return Rotation.from_rotvec(rotvec).as_matrix()


def ell_rotate(grid: SphereGrid, Q: np.ndarray) -> TangentDensity:
    """ℓ 的旋转 Π(Q e₁)"""
    return project_tangent(grid, np.asarray(Q, dtype=float)[:, 0])


def rotated_density(grid: SphereGrid, func: Callable[[np.ndarray], np.ndarray], Q: np.ndarray) -> TangentDensity:
    """
    由解析向量场构造旋转后的密度 ξ ↦ Q·𝐞(Qᵀξ)

    Args:
        grid: 球面网格
        func: (N, d) -> (N, d) 的向量场
        Q: 旋转矩阵
    """
    Q = np.asarray(Q, dtype=float)
    values = func(grid.nodes @ Q) @ Q.T
    return project_tangent(grid, values)


def remove_rotate_component(density: TangentDensity) -> TangentDensity:
    """去掉在 {Π e_j} 张成空间上的分量（L² 正交投影）"""
    grid = density.grid
    basis = [project_tangent(grid, np.eye(grid.d)[j]).values.real for j in range(grid.d)]
    w = grid.weights
    gram = np.array([[np.dot(w, np.sum(a * b, axis=1)) for b in basis] for a in basis])
    rhs = np.array([np.dot(w, np.sum(density.values * a, axis=1)) for a in basis])
    coeffs = np.linalg.solve(gram, rhs)
    values = density.values - sum(c * a for c, a in zip(coeffs, basis))
    return TangentDensity(grid, values)


def random_tangent_density(grid: SphereGrid, rng: np.random.Generator, smooth: bool = True) -> TangentDensity:
    """
    随机切向密度（已归一化）

    smooth=True 时为低次多项式向量场的投影，否则为节点上独立的复高斯值再投影。
    """
    d = grid.d
    if smooth:
        b = rng.normal(size=d) + 1j * rng.normal(size=d)
        M = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        C = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        nodes = grid.nodes
        values = b[None, :] + nodes @ M.T + (nodes ** 2) @ C.T
    else:
        values = rng.normal(size=(grid.size, d)) + 1j * rng.normal(size=(grid.size, d))
    return project_tangent(grid, values).normalized()


def random_scalar_density(grid: SphereGrid, rng: np.random.Generator) -> ScalarDensity:
    """节点上独立复高斯值的归一化标量密度"""
    values = rng.normal(size=grid.size) + 1j * rng.normal(size=grid.size)
    return ScalarDensity(grid, values).normalized()


def required_resolution(r: float) -> int:
    """场合成在 |x| = r 处所需的最低分辨率"""
    return int(math.ceil(2.0 * r + GRID_MARGIN))


def _check_resolution(grid: SphereGrid, r: float) -> None:
    if grid.resolution < 2.0 * r + GRID_MARGIN:
        raise AccuracyError(
            f"网格分辨率 {grid.resolution} 不足以合成 |x|={r:.4g} 处的场（需要 ≥ {required_resolution(r)}）"
        )


def _as_points(d: int, points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != d:
        raise DomainError(f"点的维数 {pts.shape[1]} ≠ {d}")
    return pts


def _wedge(nodes: np.ndarray, values: np.ndarray) -> np.ndarray:
    # d=3 为叉积 ξ×𝐞，d=2 为标量 ξ₁e₂ − ξ₂e₁
    if nodes.shape[1] == 3:
        return np.cross(nodes, values)
    return (nodes[:, 0] * values[:, 1] - nodes[:, 1] * values[:, 0])[:, None]


def _synthesize_block(density: Density, pts: np.ndarray) -> List[FieldSample]:
    grid = density.grid
    phase = np.exp(1j * (pts @ grid.nodes.T)) * grid.weights[None, :]
    if isinstance(density, ScalarDensity):
        u = phase @ density.values
        return [FieldSample(x=pts[i].copy(), E=np.array([u[i]])) for i in range(pts.shape[0])]
    E = phase @ density.values
    B = -(phase @ _wedge(grid.nodes, density.values))
    return [FieldSample(x=pts[i].copy(), E=E[i], B=B[i]) for i in range(pts.shape[0])]


def synthesize_many(density: Density, points, workers: int = 1) -> List[FieldSample]:
    """
    批量场合成，按固定大小分块并行

    Args:
        density: 标量或切向密度
        points: (M, d) 空间点
        workers: 线程数

    Returns:
        与输入顺序一致的 FieldSample 列表
    """
    pts = _as_points(density.grid.d, points)
    if pts.shape[0] == 0:
        return []
    _check_resolution(density.grid, float(np.max(np.linalg.norm(pts, axis=1))))
    blocks = [pts[i:i + SYNTHESIS_BLOCK] for i in range(0, pts.shape[0], SYNTHESIS_BLOCK)]
    samples: List[FieldSample] = []
    for chunk in ordered_map(lambda b: _synthesize_block(density, b), blocks, workers):
        samples.extend(chunk)
    return samples


def synthesize(density: Density, x) -> FieldSample:
    """
    场合成 E(x) = ∫ e^{ixξ}·density(ξ) dσ；切向密度另给 B(x) = −∫ e^{ixξ} ξ∧𝐞(ξ) dσ

    Args:
        density: ScalarDensity 或 TangentDensity
        x: 空间点

    Returns:
        FieldSample；标量密度时 E 为长度 1 的数组
    """
    return synthesize_many(density, [x])[0]


def divergence(density: TangentDensity, x) -> float:
    """|∫ e^{ixξ} iξ·𝐞 dσ|，切向密度合成场的散度"""
    grid = density.grid
    pts = _as_points(grid.d, x)
    _check_resolution(grid, float(np.linalg.norm(pts[0])))
    radial = np.einsum("ij,ij->i", grid.nodes, density.values)
    values = np.exp(1j * (grid.nodes @ pts[0])) * 1j * radial
    return abs(integrate_sphere(grid, values))


def harmonic_field(d: int, k: int, P: HarmonicPolynomial, x, check: bool = True):
    """
    调和多项式密度的闭式场 (2π)^{d/2}·i^k·|x|^{−(d−2)/2}·J_{(d+2k−2)/2}(|x|)·P(x/|x|)

    Args:
        d: 维数
        k: P 的次数
        P: 齐次调和多项式
        x: 点 (d,) 或 (M, d)
        check: 是否用有限差分抽查 ΔP = 0

    Returns:
        复数或复数数组；x = 0 时取极限
    """
    if P.d != d or P.degree != k:
        raise DomainError(f"多项式 {P.name} 与 (d={d}, k={k}) 不符")
    if check and not is_harmonic(P):
        raise DomainError(f"{P.name} 不是调和多项式")
    single = np.ndim(x) == 1
    pts = _as_points(d, x)
    r = np.linalg.norm(pts, axis=1)
    out = np.zeros(pts.shape[0], dtype=complex)
    zero = r == 0.0
    if np.any(zero) and k == 0:
        out[zero] = surface_area(d) * float(P(np.eye(d)[:1])[0])
    nz = ~zero
    if np.any(nz):
        rr = r[nz]
        radial = (2.0 * math.pi) ** (d / 2.0) * rr ** (-(d - 2) / 2.0) * bessel_j(BesselOrder.for_lambda(d, k), rr)
        out[nz] = (1j ** k) * radial * P(pts[nz] / rr[:, None])
    return complex(out[0]) if single else out


def origin_bound(d: int, kind: str = "scalar") -> float:
    """
    原点处 |E(0)| ≤ C·‖density‖ 的最佳常数

    Args:
        d: 维数
        kind: "scalar" 为 |S^{d−1}|^{1/2}，"maxwell" 为 ((d−1)|S^{d−1}|/d)^{1/2}
    """
    area = surface_area(d)
    if kind == "scalar":
        return math.sqrt(area)
    if kind == "maxwell":
        return math.sqrt((d - 1) * area / d)
    raise DomainError(f"未知的界类型: {kind}")


def band_mask(center: float, half_width: float, axis: int = 0) -> Callable[[np.ndarray], np.ndarray]:
    """带状区域 |ξ_axis − center| < half_width 的指示函数"""
    def mask(nodes: np.ndarray) -> np.ndarray:
        return np.abs(nodes[:, axis] - center) < half_width
    return mask


def masked_optimum(d: int, mask: Callable[[np.ndarray], np.ndarray], grid: SphereGrid) -> Tuple[TangentDensity, float]:
    """
    支集限制在 Ω 上时的最优密度 ℓ·χ_Ω（归一化）及其 |E(0)|

    Args:
        d: 维数
        mask: 节点 -> 布尔数组
        grid: 球面网格

    Returns:
        (密度, |E(0)|)；Ω 上 ℓ 恒为 0 时返回零密度和 0
    """
    if grid.d != d:
        raise DomainError(f"维数不一致: d={d}, grid.d={grid.d}")
    chi = np.asarray(mask(grid.nodes), dtype=bool)
    if not np.any(chi):
        raise DomainError("掩码区域在网格上为空")
    values = ell(d, grid.nodes) * chi[:, None]
    density = TangentDensity(grid, values)
    if density.norm == 0.0:
        logger.warning("ℓ 在掩码区域上恒为 0")
        return density, 0.0
    density = density.normalized()
    achieved = synthesize(density, np.zeros(d)).magnitude
    return density, achieved


def _fit_sin_cos(rho: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    design = np.column_stack([np.sin(rho), np.cos(rho)]).astype(complex)
    coeffs, *_ = np.linalg.lstsq(design, values, rcond=None)
    return coeffs[0], coeffs[1]


def far_field_directions(d: int, count: int = FAR_FIELD_DIRECTIONS, seed: int = FAR_FIELD_SEED) -> np.ndarray:
    """远场检验用的固定方向集"""
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(count, d))
    return dirs / np.linalg.norm(dirs, axis=1)[:, None]


def far_field_check(density: Density, r: float,
                    profile: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                    directions: Optional[np.ndarray] = None,
                    workers: int = 1) -> FarFieldReport:
    """
    大 |x| 处的远场检验

    在 [r/2, r/2+2π) 与 [r, r+2π) 上各取 16 个等距样本：包络之比给出衰减指数，
    在后一段上拟合 ρ^{(d−1)/2}E(ρx̂) = A sin ρ + B cos ρ，A 与 profile(x̂) 的相关系数即角分布吻合度。

    Args:
        density: 偶密度
        r: 半径，≥ 50
        profile: 预期角分布，缺省切向密度用 ℓ、标量密度用常数 1
        directions: 方向集，缺省为固定的 8 个方向
        workers: 线程数

    Returns:
        FarFieldReport
    """
    if r < FAR_FIELD_MIN_R:
        raise DomainError(f"远场检验要求 r ≥ {FAR_FIELD_MIN_R}: {r}")
    grid = density.grid
    d = grid.d
    _check_resolution(grid, r + 2.0 * math.pi)
    if directions is None:
        directions = far_field_directions(d)
    directions = as_unit_vectors(directions, 1e-9)
    if profile is None:
        if isinstance(density, TangentDensity):
            profile = lambda x: ell(d, x)
        else:
            profile = lambda x: np.ones((x.shape[0], 1))
    half_power = (d - 1) / 2.0
    offsets = 2.0 * math.pi * np.arange(FAR_FIELD_SAMPLES) / FAR_FIELD_SAMPLES
    near_rho = r / 2.0 + offsets
    far_rho = r + offsets

    points = np.concatenate([
        (near_rho[None, :, None] * directions[:, None, :]).reshape(-1, d),
        (far_rho[None, :, None] * directions[:, None, :]).reshape(-1, d),
    ])
    samples = synthesize_many(density, points, workers)
    n_dir = directions.shape[0]
    fields = np.array([s.E for s in samples]).reshape(2, n_dir, FAR_FIELD_SAMPLES, -1)

    near_env = math.sqrt(float(np.mean(np.abs(fields[0]) ** 2)))
    far_env = math.sqrt(float(np.mean(np.abs(fields[1]) ** 2)))
    mid_near = r / 2.0 + math.pi * (FAR_FIELD_SAMPLES - 1) / FAR_FIELD_SAMPLES
    mid_far = r + math.pi * (FAR_FIELD_SAMPLES - 1) / FAR_FIELD_SAMPLES
    decay = math.log(near_env / far_env) / math.log(mid_far / mid_near)

    fitted = []
    for i in range(n_dir):
        scaled = fields[1, i] * far_rho[:, None] ** half_power
        a, _ = _fit_sin_cos(far_rho, scaled)
        fitted.append(a)
    fitted = np.array(fitted).reshape(-1)
    expected = np.asarray(profile(directions), dtype=complex).reshape(-1)
    denom = np.linalg.norm(fitted) * np.linalg.norm(expected)
    correlation = float(abs(np.vdot(expected, fitted)) / denom) if denom > 0 else 0.0
    amplitude = float(abs(np.vdot(expected, fitted)) / np.vdot(expected, expected).real) if denom > 0 else 0.0
    # 驻相近似：偶密度时振幅为 2/√(2π)
    predicted = 2.0 / math.sqrt(2.0 * math.pi)
    logger.info(f"远场 r={r}: 衰减指数 {decay:.4f}，相关 {correlation:.6f}，振幅 {amplitude:.6f}")
    return FarFieldReport(
        r=float(r),
        decay_exponent=decay,
        expected_exponent=half_power,
        profile_correlation=correlation,
        amplitude=amplitude,
        predicted_amplitude=predicted,
        amplitude_ratio=amplitude / predicted,
        directions=n_dir,
    )


def _stencil(alpha: Sequence[int], step: float) -> List[Tuple[np.ndarray, float]]:
    per_axis = []
    for order in alpha:
        if order == 0:
            per_axis.append([(0.0, 1.0)])
        elif order == 1:
            per_axis.append([(step, 0.5 / step), (-step, -0.5 / step)])
        elif order == 2:
            per_axis.append([(step, 1.0 / step ** 2), (0.0, -2.0 / step ** 2), (-step, 1.0 / step ** 2)])
        else:
            raise DomainError(f"单个方向的导数阶数不能超过 2: {alpha}")
    terms = []
    for combo in product(*per_axis):
        offset = np.array([c[0] for c in combo])
        coeff = float(np.prod([c[1] for c in combo]))
        terms.append((offset, coeff))
    return terms


def derivative_estimate(density: Density, x, alpha: Sequence[int], step: float = DERIVATIVE_STEP) -> np.ndarray:
    """
    中心差分 + 一次 Richardson 外推估计 ∂^α E(x)

    Args:
        density: 密度
        x: 点
        alpha: 多重指标，|α| ≤ 2
        step: 差分步长 h（与 h/2 组合外推）

    Returns:
        ∂^α E(x)（标量密度为长度 1 的数组）
    """
    d = density.grid.d
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != d or sum(alpha) > 2 or min(alpha) < 0:
        raise DomainError(f"多重指标不合法: {alpha}")
    x = np.asarray(x, dtype=float)

    def estimate(h: float) -> np.ndarray:
        terms = _stencil(alpha, h)
        samples = synthesize_many(density, [x + off for off, _ in terms])
        return sum(coeff * s.E for (_, coeff), s in zip(terms, samples))

    if sum(alpha) == 0:
        return synthesize(density, x).E
    coarse = estimate(step)
    fine = estimate(step / 2.0)
    return (4.0 * fine - coarse) / 3.0


def derivative_bound_check(density: Density, x, alpha: Sequence[int], step: float = DERIVATIVE_STEP) -> bool:
    """|∂^α E(x)| ≤ C·‖density‖（切向密度用 Maxwell 常数，标量密度用标量常数）"""
    kind = "maxwell" if isinstance(density, TangentDensity) else "scalar"
    bound = origin_bound(density.grid.d, kind) * density.norm
    value = float(np.linalg.norm(derivative_estimate(density, x, alpha, step)))
    logger.debug(f"∂^{tuple(alpha)}E = {value:.6e}，界 {bound:.6e}")
    return value <= bound * (1.0 + DERIVATIVE_SLACK) + DERIVATIVE_SLACK


class FieldService:
    """按配置构造密度并批量合成"""

    def __init__(self, config: Dict[str, Any], workers: int = 1):
        self.config = config
        self.run_config = config.get("run", {})
        self.workers = workers

    def build_density(self, grid: SphereGrid, spec: str) -> Density:
        """
        由文字描述构造密度

        支持 "ell"、"constant"、"harmonic:<k>"、"harmonic:<名字>"、"band:<center>:<half_width>"。
        """
        kind, _, arg = spec.partition(":")
        if kind == "ell":
            return ell_density(grid)
        if kind == "constant":
            return constant_density(grid)
        if kind == "harmonic":
            family = standard_family(grid.d)
            if arg.isdigit():
                matches = [p for p in family if p.degree == int(arg)]
            else:
                matches = [p for p in family if p.name == arg]
            if not matches:
                raise DomainError(f"没有匹配的调和多项式: {arg}")
            return harmonic_density(grid, matches[0])
        if kind == "band":
            try:
                center, half_width = (float(v) for v in arg.split(":"))
            except ValueError:
                raise DomainError(f"band 密度格式应为 band:<center>:<half_width>: {spec}")
            density, _ = masked_optimum(grid.d, band_mask(center, half_width), grid)
            return density
        raise DomainError(f"未知的密度类型: {spec}")

    def sample(self, density: Density, points) -> List[FieldSample]:
        return synthesize_many(density, points, self.workers)
