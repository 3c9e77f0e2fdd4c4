"""
常量定义
"""

import math
from enum import Enum

from .errors import DomainError


class Convention(str, Enum):
    """Λ_{d,k}(R) 前置系数约定"""

    # (2π)^{d/2}·|S^{d−1}|，定义式中的系数
    PAPER_EQ_LAMBDADEF = "paper"
    # (2π)^d，与闭式场公式及离散算子一致
    ORACLE_CONSISTENT = "oracle"

    @classmethod
    def parse(cls, value) -> "Convention":
        """接受枚举本身、"paper"/"oracle" 或枚举名"""
        if isinstance(value, cls):
            return value
        text = str(value).strip()
        for member in cls:
            if text == member.value or text.upper() == member.name:
                return member
        raise DomainError(f"未知的前置系数约定: {value}")


class DensityMode(str, Enum):
    """能量密度曲线的种类"""

    SCALAR = "scalar"
    MAXWELL = "maxwell"
    MAXWELL_CONSERVATIVE = "maxwell_conservative"


# 图表中 d=3 的归一化常数 2^{7/2}·π^{5/2}
PAPER_NORMALIZER = 2.0 ** 3.5 * math.pi ** 2.5

# 数值容差
BESSEL_ABS_TOL = 1e-12
BESSEL_CROSS_TOL = 1e-10
LAMBDA_RTOL = 1e-10
CROSSING_TOL = 1e-8
UNIT_TOL = 1e-12
TANGENT_TOL = 1e-12

# 半整数阶闭式递推的阶数上限
HALF_INTEGER_ORDER_CAP = 10.5

# 径向积分面板
PANEL_WIDTH = math.pi / 4
PANEL_NODES = 16

# 小半径相消阈值
DENSITY_R_FLOOR = 1e-3

# 球核 q→0 级数切换阈值
KERNEL_SERIES_SWITCH = 1e-4

# 场合成的网格充分性: resolution ≥ 2|x| + GRID_MARGIN
GRID_MARGIN = 16

# 幂迭代
POWER_MAX_ITERATIONS = 100_000
POWER_RAYLEIGH_TOL = 1e-12
EIGEN_SEED = 20240611

# 检验状态
CHECK_PASS = "pass"
CHECK_FAIL = "fail"
CHECK_INFO = "info"

