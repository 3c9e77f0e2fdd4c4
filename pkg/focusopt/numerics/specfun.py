"""
特殊函数 - 实阶 Bessel 函数、球面面积与球体积
"""

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import integrate, special

from ..utils.constants import BESSEL_ABS_TOL, HALF_INTEGER_ORDER_CAP
from ..utils.errors import AccuracyError, DomainError

ArrayLike = Union[float, np.ndarray]

# 小自变量幂级数的项数
SERIES_TERMS = 40


def surface_area(d: int) -> float:
    """
    单位球面 S^{d−1} 的面积 2π^{d/2}/Γ(d/2)

    Args:
        d: 空间维数，d ≥ 2

    Returns:
        |S^{d−1}|
    """
    if int(d) != d or d < 2:
        raise DomainError(f"维数必须是 ≥2 的整数: {d}")
    return 2.0 * math.pi ** (d / 2.0) / float(special.gamma(d / 2.0))


def ball_volume(d: int, R: float) -> float:
    """
    半径 R 的 d 维球体积 |S^{d−1}|·R^d/d

    Args:
        d: 空间维数
        R: 半径，R ≥ 0

    Returns:
        |B_R(0)|
    """
    if R < 0:
        raise DomainError(f"半径不能为负: {R}")
    return surface_area(d) * R ** d / d


@dataclass(frozen=True)
class BesselOrder:
    """Bessel 函数的阶 ν（ν > −1/2）"""

    nu: float
    half_integer: bool = field(init=False)

    def __post_init__(self):
        nu = float(self.nu)
        if not nu > -0.5:
            raise DomainError(f"Bessel 阶必须 > -1/2: {nu}")
        twice = 2.0 * nu
        flag = twice >= 1.0 and twice == round(twice) and int(round(twice)) % 2 == 1
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "half_integer", bool(flag))

    @property
    def closed_form(self) -> bool:
        """半整数阶且不超过递推上限时走闭式 + 递推"""
        return self.half_integer and self.nu <= HALF_INTEGER_ORDER_CAP

    @classmethod
    def for_lambda(cls, d: int, k: int) -> "BesselOrder":
        """Λ_{d,k} 用到的复合阶 (d+2k−2)/2"""
        return cls((d + 2 * k - 2) / 2.0)


def _as_order(order) -> BesselOrder:
    return order if isinstance(order, BesselOrder) else BesselOrder(order)


def _check_argument(t: ArrayLike) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(~np.isfinite(arr)):
        raise DomainError("Bessel 自变量必须是有限非负数")
    return arr


def _ascending_series(nu: float, t: np.ndarray) -> np.ndarray:
    # J_ν(t) = (t/2)^ν/Γ(ν+1) · Σ (−t²/4)^m / (m!(ν+1)_m)
    term = (t / 2.0) ** nu / special.gamma(nu + 1.0)
    total = term.copy()
    quarter = -(t * t) / 4.0
    for m in range(1, SERIES_TERMS + 1):
        term = term * quarter / (m * (m + nu))
        total = total + term
    return total


def _upward_recurrence(nu: float, t: np.ndarray) -> np.ndarray:
    # t ≥ ν+1 时向上递推是稳定的
    scale = np.sqrt(2.0 / (math.pi * t))
    j_prev = scale * np.sin(t)
    if nu == 0.5:
        return j_prev
    j_cur = scale * (np.sin(t) / t - np.cos(t))
    order = 1.5
    while order < nu:
        j_prev, j_cur = j_cur, (2.0 * order / t) * j_cur - j_prev
        order += 1.0
    return j_cur


def _half_integer_j(nu: float, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    positive = t > 0
    series = positive & (t < nu + 1.0) if nu >= 1.5 else np.zeros_like(positive)
    recur = positive & ~series
    if np.any(series):
        out[series] = _ascending_series(nu, t[series])
    if np.any(recur):
        out[recur] = _upward_recurrence(nu, t[recur])
    return out


def bessel_j(order, t: ArrayLike) -> ArrayLike:
    """
    第一类 Bessel 函数 J_ν(t)，t ≥ 0

    半整数阶走 J_{1/2}、J_{3/2} 闭式和向上递推（t < ν+1 时改用升幂级数），
    其余阶数交给积分表示 bessel_j_reference。

    Args:
        order: BesselOrder 或实数 ν
        t: 标量或数组

    Returns:
        与 t 同形状的 J_ν(t)
    """
    order = _as_order(order)
    arr = _check_argument(t)
    flat = np.atleast_1d(arr).astype(float)
    if order.closed_form:
        values = _half_integer_j(order.nu, flat)
    else:
        values = np.atleast_1d(bessel_j_reference(order, flat))
    values = np.where(flat == 0.0, 1.0 if order.nu == 0.0 else 0.0, values)
    if np.ndim(arr) == 0:
        return float(values[0])
    return values.reshape(arr.shape)


# QUADPACK 的 ier=2：舍入误差使请求的容差无法达到，此时以误差估计为准
_ROUNDOFF_MESSAGE = "occurrence of roundoff"


def _reference_scalar(nu: float, t: float, abs_tol: float) -> float:
    if t == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    alpha = nu - 0.5
    prefactor = (t / 2.0) ** nu / (special.gamma(nu + 0.5) * math.sqrt(math.pi))
    # (1−s)^α(1+s)^α 权函数由 QAWS 处理端点奇性；容差按前置系数换算到积分本身
    result = integrate.quad(
        lambda s: math.cos(t * s),
        -1.0,
        1.0,
        weight="alg",
        wvar=(alpha, alpha),
        epsabs=abs_tol / prefactor,
        epsrel=1e-12,
        limit=400,
        full_output=1,
    )
    value, abserr = result[0], result[1]
    scaled = prefactor * value
    scaled_err = prefactor * abserr
    within = scaled_err <= max(abs_tol, 1e-11 * abs(scaled))
    if len(result) > 3:
        message = str(result[3])
        if _ROUNDOFF_MESSAGE not in message or not within:
            raise AccuracyError(f"J_{nu}({t}) 积分未收敛: {message}")
    elif not within:
        raise AccuracyError(f"J_{nu}({t}) 误差估计 {scaled_err:.3e} 超出容差 {abs_tol:.1e}")
    return float(scaled)


def bessel_j_reference(order, t: ArrayLike, abs_tol: float = BESSEL_ABS_TOL) -> ArrayLike:
    """
    用积分表示直接计算 J_ν(t)，作为独立参照

    J_ν(t) = (t/2)^ν / (Γ(ν+½)√π) · ∫_{−1}^{1} cos(ts)(1−s²)^{ν−½} ds

    Args:
        order: BesselOrder 或实数 ν
        t: 标量或数组，适用范围 t ≤ 50
        abs_tol: 绝对误差容差，估计误差超出时抛 AccuracyError

    Returns:
        与 t 同形状的 J_ν(t)
    """
    order = _as_order(order)
    arr = _check_argument(t)
    flat = np.atleast_1d(arr).astype(float)
    unique, inverse = np.unique(flat, return_inverse=True)
    values = np.array([_reference_scalar(order.nu, float(x), abs_tol) for x in unique])
    values = values[inverse]
    if np.ndim(arr) == 0:
        return float(values[0])
    return values.reshape(arr.shape)
