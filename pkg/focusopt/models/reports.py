"""
结果记录 - 谱表、判据报告与检验结果
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..utils.constants import Convention
from ..utils.helpers import to_builtin


@dataclass(frozen=True, eq=False)
class SpectralTable:
    """(k, R) 格点上的 Λ_{d,k}(R)，行对应半径、列对应 k"""

    d: int
    convention: Convention
    radii: Tuple[float, ...]
    ks: Tuple[int, ...]
    values: np.ndarray  # (len(radii), len(ks))

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))

    @property
    def entries(self) -> Dict[Tuple[int, float], float]:
        """(k, R) -> Λ 映射视图"""
        return {
            (k, r): float(self.values[i, j])
            for i, r in enumerate(self.radii)
            for j, k in enumerate(self.ks)
        }

    def column(self, k: int) -> np.ndarray:
        return self.values[:, self.ks.index(k)]

    def value(self, k: int, R: float) -> float:
        return float(self.values[self.radii.index(float(R)), self.ks.index(k)])


@dataclass(frozen=True)
class CriterionReport:
    """最大特征值判据：Maxwell 候选特征值与 Λ_{d,1} 的比较"""

    d: int
    R: float
    convention: Convention
    maxwell_top: float
    lambda1: float
    margin: float
    satisfied: bool
    # 按保守式 (Λ₀−Λ₂)(d−1)/d 计算的下界
    conservative_top: float
    conservative_margin: float
    # Λ₀、Λ₁ 是否为标量谱中最大的两个
    scalar_order_ok: bool


@dataclass(frozen=True)
class CheckResult:
    """验证套件中单项检验的结果"""

    check_id: str
    status: str
    observed: Any
    tolerance: Any = None
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.check_id,
            "status": self.status,
            "observed": to_builtin(self.observed),
            "tolerance": to_builtin(self.tolerance),
            "detail": self.detail,
        }


@dataclass(frozen=True)
class FarFieldReport:
    """远场检验报告"""

    r: float
    decay_exponent: float
    expected_exponent: float
    profile_correlation: float
    amplitude: float
    predicted_amplitude: float
    amplitude_ratio: float
    directions: int


@dataclass(frozen=True)
class PerturbationReport:
    """L 与 L₀ 之差的范数界检验"""

    d: int
    R: float
    samples: int
    max_difference_ratio: float
    max_norm_ratio: float
    violations: int
    difference_bound: float
    norm_bound: float


@dataclass
class VerificationSummary:
    """一次验证运行的汇总"""

    run_id: str
    checks: List[CheckResult] = field(default_factory=list)
    config: Optional[Dict[str, Any]] = None

    @property
    def failed(self) -> List[CheckResult]:
        return [c for c in self.checks if c.status == "fail"]

    @property
    def passed(self) -> bool:
        return not self.failed
