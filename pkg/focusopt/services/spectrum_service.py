"""
谱服务 - Λ_{d,k}(R)、Maxwell 特征值、最大特征值判据、交点与能量密度
"""

import math
import warnings
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from ..models.reports import CriterionReport, SpectralTable
from ..numerics.quadrature import gauss_legendre
from ..numerics.specfun import BesselOrder, ball_volume, bessel_j, surface_area
from ..utils.constants import (
    CROSSING_TOL,
    DENSITY_R_FLOOR,
    LAMBDA_RTOL,
    PANEL_NODES,
    PANEL_WIDTH,
    Convention,
    DensityMode,
)
from ..utils.errors import AccuracyError, BracketError, CancellationWarning, DomainError
from ..utils.helpers import ordered_map, resolve_workers
from ..utils.logger import get_logger

logger = get_logger("focusopt_spectrum")

Number = Union[float, Fraction]

# 判断 Λ₀、Λ₁ 为标量谱前两名时检查到的最高次数
SCALAR_ORDER_KMAX = 12

_TWO_THIRDS = Fraction(2, 3)


def _check_dk(d: int, k: int) -> None:
    if int(d) != d or d < 2:
        raise DomainError(f"维数必须是 ≥2 的整数: {d}")
    if int(k) != k or k < 0:
        raise DomainError(f"k 必须是非负整数: {k}")


def lambda_prefactor(d: int, convention: Convention = Convention.ORACLE_CONSISTENT) -> float:
    """
    Λ_{d,k} 的前置系数 C(d)

    Args:
        d: 维数
        convention: ORACLE_CONSISTENT 为 (2π)^d，PAPER_EQ_LAMBDADEF 为 (2π)^{d/2}|S^{d−1}|

    Returns:
        C(d)
    """
    convention = Convention.parse(convention)
    if convention == Convention.ORACLE_CONSISTENT:
        return (2.0 * math.pi) ** d
    return (2.0 * math.pi) ** (d / 2.0) * surface_area(d)


def _panel_sum(nu: float, R: float, panels: int, nodes: int) -> float:
    edges = np.linspace(0.0, R, panels + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        r, w = gauss_legendre(nodes, float(a), float(b))
        j = np.asarray(bessel_j(nu, r))
        total += float(np.dot(w, r * j * j))
    return total


@lru_cache(maxsize=4096)
def radial_integral(d: int, k: int, R: float,
                    panel_width: float = PANEL_WIDTH,
                    panel_nodes: int = PANEL_NODES,
                    rtol: float = LAMBDA_RTOL) -> float:
    """
    ∫₀^R r·J_{(d+2k−2)/2}(r)² dr，分段 Gauss–Legendre 并加倍面板做误差估计

    Args:
        d: 维数
        k: 球谐次数
        R: 上限
        panel_width: 面板宽度上限
        panel_nodes: 每个面板的节点数
        rtol: 粗细两次结果允许的相对差

    Returns:
        加密后的积分值
    """
    _check_dk(d, k)
    if not R > 0:
        raise DomainError(f"半径必须为正: {R}")
    nu = BesselOrder.for_lambda(d, k).nu
    panels = max(1, int(math.ceil(R / panel_width - 1e-12)))
    coarse = _panel_sum(nu, R, panels, panel_nodes)
    fine = _panel_sum(nu, R, 2 * panels, panel_nodes)
    diff = abs(fine - coarse)
    if diff > rtol * abs(fine) and diff > 1e-300:
        raise AccuracyError(
            f"Λ 径向积分未收敛: d={d} k={k} R={R} 相对差 {diff / abs(fine):.3e} > {rtol:.1e}"
        )
    logger.debug(f"径向积分 d={d} k={k} R={R:.6g}: {fine:.12e} ({2 * panels} 面板)")
    return fine


def lambda_value(d: int, k: int, R: float,
                 convention: Convention = Convention.ORACLE_CONSISTENT,
                 **numerics) -> float:
    """
    Λ_{d,k}(R) = C(d)·∫₀^R r·J_{(d+2k−2)/2}(r)² dr

    Args:
        d: 维数，≥ 2
        k: 球谐次数，≥ 0
        R: 球半径，> 0
        convention: 前置系数约定
        **numerics: 透传给 radial_integral 的 panel_width / panel_nodes / rtol

    Returns:
        Λ_{d,k}(R)
    """
    return lambda_prefactor(d, convention) * radial_integral(int(d), int(k), float(R), **numerics)


def maxwell_top_eigenvalue(d: int, R: float,
                           convention: Convention = Convention.ORACLE_CONSISTENT,
                           **numerics) -> float:
    """
    ℓ 的旋转在 Π L*L Π 下的特征值 ((d−1)Λ_{d,0} + Λ_{d,2})/d

    L*Lℓ = Λ₂ℓ + (Λ₀−Λ₂)(d−1)/d·e₁，投影后得到此值。
    """
    lam0 = lambda_value(d, 0, R, convention, **numerics)
    lam2 = lambda_value(d, 2, R, convention, **numerics)
    return ((d - 1) * lam0 + lam2) / d


def conservative_maxwell_eigenvalue(d: int, R: float,
                             convention: Convention = Convention.ORACLE_CONSISTENT,
                             **numerics) -> float:
    """保守式 (Λ_{d,0} − Λ_{d,2})(d−1)/d，是 maxwell_top_eigenvalue 的严格下界"""
    lam0 = lambda_value(d, 0, R, convention, **numerics)
    lam2 = lambda_value(d, 2, R, convention, **numerics)
    return (lam0 - lam2) * (d - 1) / d


def criterion_margin(d: int, R: float,
                     convention: Convention = Convention.ORACLE_CONSISTENT,
                     **numerics) -> CriterionReport:
    """
    最大特征值判据：Maxwell 候选特征值是否严格大于 Λ_{d,1}

    Args:
        d: 维数
        R: 半径
        convention: 前置系数约定（不影响 satisfied）

    Returns:
        CriterionReport
    """
    convention = Convention.parse(convention)
    lam = [lambda_value(d, k, R, convention, **numerics) for k in range(SCALAR_ORDER_KMAX + 1)]
    top = ((d - 1) * lam[0] + lam[2]) / d
    conservative = (lam[0] - lam[2]) * (d - 1) / d
    margin = top - lam[1]
    scalar_order_ok = min(lam[0], lam[1]) > max(lam[2:])
    return CriterionReport(
        d=d,
        R=float(R),
        convention=convention,
        maxwell_top=top,
        lambda1=lam[1],
        margin=margin,
        satisfied=margin > 0,
        conservative_top=conservative,
        conservative_margin=conservative - lam[1],
        scalar_order_ok=bool(scalar_order_ok),
    )


def h_poly(R: Number) -> Number:
    """
    h(R) = 2/3 − (2/3)·R⁴/(16·36) − R²/16

    整数或 Fraction 输入时精确返回 Fraction，否则返回 float。
    """
    if isinstance(R, (int, Fraction)) and not isinstance(R, bool):
        R = Fraction(R)
        return _TWO_THIRDS - _TWO_THIRDS * R ** 4 / 576 - R ** 2 / 16
    R = float(R)
    return 2.0 / 3.0 - (2.0 / 3.0) * R ** 4 / 576.0 - R ** 2 / 16.0


def h_corrected(R: Number) -> Number:
    """
    判据链的下界多项式 2/3 − R²/4

    margin ≥ (2/3)Λ₀ − Λ₁ > Λ₀·(2/3 − R²/4)，在 R < √(8/3) 时为正。
    """
    if isinstance(R, (int, Fraction)) and not isinstance(R, bool):
        R = Fraction(R)
        return _TWO_THIRDS - R ** 2 / 4
    R = float(R)
    return 2.0 / 3.0 - R ** 2 / 4.0


def find_crossing(f: Callable[[float], float], bracket: Sequence[float], tol: float = CROSSING_TOL) -> float:
    """
    二分法求根

    Args:
        f: 连续函数
        bracket: [a, b]，要求 f(a)·f(b) < 0
        tol: 根的绝对容差

    Returns:
        根
    """
    a, b = float(bracket[0]), float(bracket[1])
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise BracketError(f"区间 [{a}, {b}] 两端同号: f(a)={fa:.3e}, f(b)={fb:.3e}")
    root = optimize.bisect(f, a, b, xtol=tol, maxiter=200)
    logger.debug(f"区间 [{a}, {b}] 求得根 {root:.10f}")
    return float(root)


def scan_brackets(values: Sequence[float], lattice: Sequence[float]) -> List[Tuple[float, float]]:
    """在格点上找出相邻的变号区间"""
    brackets = []
    for i in range(len(lattice) - 1):
        if values[i] == 0.0 or values[i] * values[i + 1] < 0:
            brackets.append((float(lattice[i]), float(lattice[i + 1])))
    return brackets


def _mode_value(d: int, R: float, mode: DensityMode, k: int,
                convention: Convention, numerics: Dict[str, Any]) -> float:
    if mode == DensityMode.SCALAR:
        return lambda_value(d, k, R, convention, **numerics)
    if mode == DensityMode.MAXWELL:
        return maxwell_top_eigenvalue(d, R, convention, **numerics)
    return conservative_maxwell_eigenvalue(d, R, convention, **numerics)


def energy_density(d: int, R: float, mode: Union[DensityMode, str] = DensityMode.SCALAR, k: int = 0,
                   convention: Convention = Convention.ORACLE_CONSISTENT, **numerics) -> float:
    """
    能量密度 Λ/|B_R(0)|

    Args:
        d: 维数
        R: 半径
        mode: scalar（用 Λ_{d,k}）、maxwell（真特征值）或 maxwell_conservative（保守式）
        k: scalar 模式的次数
        convention: 前置系数约定

    Returns:
        密度值；R < 1e−3 时发出 CancellationWarning
    """
    mode = DensityMode(mode)
    if not R > 0:
        raise DomainError(f"半径必须为正: {R}")
    if R < DENSITY_R_FLOOR:
        warnings.warn(
            f"R={R} 低于 {DENSITY_R_FLOOR}，除以 |B_R| 会损失有效数字",
            CancellationWarning,
            stacklevel=2,
        )
    return _mode_value(d, R, mode, k, Convention.parse(convention), numerics) / ball_volume(d, R)


def density_limit(d: int, mode: Union[DensityMode, str] = DensityMode.SCALAR, k: int = 0,
                  convention: Convention = Convention.ORACLE_CONSISTENT) -> float:
    """R→0 时能量密度的解析极限"""
    mode = DensityMode(mode)
    if mode == DensityMode.SCALAR and k > 0:
        return 0.0
    limit = surface_area(d)
    if Convention.parse(convention) == Convention.PAPER_EQ_LAMBDADEF:
        limit *= lambda_prefactor(d, Convention.PAPER_EQ_LAMBDADEF) / lambda_prefactor(d)
    if mode != DensityMode.SCALAR:
        limit *= (d - 1) / d
    return limit


def half_max_radius(d: int, mode: Union[DensityMode, str] = DensityMode.SCALAR,
                    convention: Convention = Convention.ORACLE_CONSISTENT,
                    lattice: Optional[Sequence[float]] = None,
                    tol: float = CROSSING_TOL, **numerics) -> Optional[float]:
    """
    能量密度降到其 R→0 极限一半的半径

    先在格点上找变号，再二分；没有变号时返回 None。
    """
    mode = DensityMode(mode)
    half = 0.5 * density_limit(d, mode, 0, convention)
    if lattice is None:
        lattice = [0.05 * i for i in range(1, 126)]
    lattice = [r for r in lattice if r >= DENSITY_R_FLOOR]

    def excess(R: float) -> float:
        return energy_density(d, R, mode, 0, convention, **numerics) - half

    values = [excess(r) for r in lattice]
    brackets = scan_brackets(values, lattice)
    if not brackets:
        return None
    return find_crossing(excess, brackets[0], tol)


def check_monotonicity(d: int, R: float, kmax: int,
                       convention: Convention = Convention.ORACLE_CONSISTENT,
                       **numerics) -> Tuple[bool, Optional[Tuple[int, int]]]:
    """
    检查 Λ_{d,0} > Λ_{d,1} > … > Λ_{d,kmax}

    Returns:
        (是否严格递减, 第一个违反的 (k, k+1) 或 None)
    """
    values = [lambda_value(d, k, R, convention, **numerics) for k in range(int(kmax) + 1)]
    for k in range(len(values) - 1):
        if not values[k] > values[k + 1]:
            return False, (k, k + 1)
    return True, None


def ratio_bound_details(R: float, **numerics) -> Dict[str, Any]:
    """
    d=3 的相邻比值与两组界

    判定用 Λ₁/Λ₀ < R²/4、Λ₂/Λ₁ < R²/16；更紧的 R²/16、R²/36 只作观测值。
    """
    if not 0 < R <= math.pi / 2 + 1e-12:
        raise DomainError(f"比值界只在 0 < R ≤ π/2 上成立: {R}")
    lam = [lambda_value(3, k, R, **numerics) for k in range(3)]
    ratio10 = lam[1] / lam[0]
    ratio21 = lam[2] / lam[1]
    R2 = R * R
    return {
        "R": float(R),
        "ratio_1_0": ratio10,
        "ratio_2_1": ratio21,
        "bound_1_0": R2 / 4.0,
        "bound_2_1": R2 / 16.0,
        "tight_bound_1_0": R2 / 16.0,
        "tight_bound_2_1": R2 / 36.0,
        "holds": bool(ratio10 < R2 / 4.0 and ratio21 < R2 / 16.0),
        "tight_holds": bool(ratio10 < R2 / 16.0 and ratio21 < R2 / 36.0),
    }


def ratio_bound_check(R: float, **numerics) -> bool:
    """0 < R ≤ π/2 时相邻 Λ_{3,k} 比值界是否严格成立"""
    return ratio_bound_details(R, **numerics)["holds"]


def rank_one_eigenvalues(d: int) -> Dict[str, Tuple[float, int]]:
    """
    核恒为 1 的秩受限算子的非零特征值及重数

    Returns:
        {"scalar": (|S|, 1), "vector": (|S|, d), "tangent": (|S|(d−1)/d, d)}
    """
    area = surface_area(d)
    return {
        "scalar": (area, 1),
        "vector": (area, d),
        "tangent": (area * (d - 1) / d, d),
    }


class SpectrumService:
    """按配置计算谱表、判据与密度曲线；可选接入 Λ 缓存"""

    def __init__(self, config: Dict[str, Any], store=None, workers: Optional[int] = None):
        self.config = config
        self.run_config = config.get("run", {})
        self.numerics_config = config.get("numerics", {})
        self.store = store
        self.workers = workers if workers is not None else resolve_workers(config)
        self.convention = Convention.parse(self.run_config.get("convention", "oracle"))
        self.crossing_tol = float(self.numerics_config.get("crossing_tol", CROSSING_TOL))
        self.numerics = {
            "panel_width": float(self.numerics_config.get("panel_width", PANEL_WIDTH)),
            "panel_nodes": int(self.numerics_config.get("panel_nodes", PANEL_NODES)),
            "rtol": float(self.numerics_config.get("lambda_rtol", LAMBDA_RTOL)),
        }

    def _convention(self, convention: Optional[Convention]) -> Convention:
        return self.convention if convention is None else Convention.parse(convention)

    def lambda_value(self, d: int, k: int, R: float, convention: Optional[Convention] = None) -> float:
        """带缓存的 Λ_{d,k}(R)"""
        convention = self._convention(convention)
        if self.store is not None:
            cached = self.store.get_lambda(d, k, R, convention)
            if cached is not None:
                return cached
        value = lambda_value(d, k, R, convention, **self.numerics)
        if self.store is not None:
            self.store.put_lambda(d, k, R, convention, value)
        return value

    def build_table(self, d: int, radii: Sequence[float], kmax: int,
                    convention: Optional[Convention] = None) -> SpectralTable:
        """
        并行填充 (k, R) 格点；缓存读写只在调用线程中进行

        Args:
            d: 维数
            radii: 半径格点
            kmax: 最高次数
            convention: 前置系数约定，缺省用配置值

        Returns:
            SpectralTable
        """
        convention = self._convention(convention)
        ks = list(range(int(kmax) + 1))
        cells = [(k, float(r)) for r in radii for k in ks]
        known: Dict[Tuple[int, float], float] = {}
        if self.store is not None:
            for k, r in cells:
                cached = self.store.get_lambda(d, k, r, convention)
                if cached is not None:
                    known[(k, r)] = cached
        missing = [cell for cell in cells if cell not in known]
        computed = ordered_map(
            lambda cell: lambda_value(d, cell[0], cell[1], convention, **self.numerics),
            missing,
            self.workers,
        )
        known.update(zip(missing, computed))
        if self.store is not None and missing:
            self.store.put_many((d, k, r, convention, v) for (k, r), v in zip(missing, computed))
        values = np.array([[known[(k, float(r))] for k in ks] for r in radii])
        logger.info(f"谱表 d={d}: {len(radii)} 个半径 × {len(ks)} 个 k，新计算 {len(missing)} 项")
        return SpectralTable(d=d, convention=convention, radii=tuple(radii), ks=tuple(ks), values=values)

    def criterion(self, d: int, R: float, convention: Optional[Convention] = None) -> CriterionReport:
        return criterion_margin(d, R, self._convention(convention), **self.numerics)

    def density_curve(self, d: int, radii: Sequence[float], mode: Union[DensityMode, str],
                      convention: Optional[Convention] = None) -> List[float]:
        """给定格点上的能量密度"""
        convention = self._convention(convention)
        mode = DensityMode(mode)
        return ordered_map(
            lambda r: energy_density(d, r, mode, 0, convention, **self.numerics),
            list(radii),
            self.workers,
        )

    def half_max(self, d: int, mode: Union[DensityMode, str], radii: Sequence[float],
                 convention: Optional[Convention] = None) -> Optional[float]:
        return half_max_radius(d, mode, self._convention(convention), radii, self.crossing_tol, **self.numerics)

    def crossings(self, d: int, radii: Sequence[float]) -> Dict[str, Any]:
        """
        在半径格点上自动找标量交点 Λ_{d,0}=Λ_{d,1} 与判据变号点

        Returns:
            报告字典；没有变号的项记为 None
        """
        lattice = [float(r) for r in radii]
        conv = self.convention

        def scalar_gap(R: float) -> float:
            return lambda_value(d, 0, R, conv, **self.numerics) - lambda_value(d, 1, R, conv, **self.numerics)

        def true_margin(R: float) -> float:
            return maxwell_top_eigenvalue(d, R, conv, **self.numerics) - lambda_value(d, 1, R, conv, **self.numerics)

        def conservative_margin(R: float) -> float:
            return conservative_maxwell_eigenvalue(d, R, conv, **self.numerics) - lambda_value(d, 1, R, conv, **self.numerics)

        report: Dict[str, Any] = {}
        for name, func in (
            ("scalar_crossing", scalar_gap),
            ("criterion_crossing", true_margin),
            ("conservative_criterion_crossing", conservative_margin),
        ):
            values = ordered_map(func, lattice, self.workers)
            brackets = scan_brackets(values, lattice)
            if not brackets:
                logger.info(f"{name}: 格点上没有变号")
                report[name] = None
                continue
            root = find_crossing(func, brackets[0], self.crossing_tol)
            logger.info(f"{name}: 根 {root:.10f}，区间 {brackets[0]}")
            report[name] = {
                "root": root,
                "bracket": [brackets[0][0], brackets[0][1]],
                "tolerance": self.crossing_tol,
            }
        return report
