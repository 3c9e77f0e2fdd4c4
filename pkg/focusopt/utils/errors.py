"""
异常定义
"""


class FocusError(Exception):
    """所有库内异常的基类"""


class DomainError(FocusError, ValueError):
    """参数超出定义域（维数、半径、阶数、非单位向量、空掩码等）"""


class AccuracyError(FocusError, ArithmeticError):
    """数值积分不收敛，或网格分辨率不足以保证精度"""


class BracketError(FocusError, ValueError):
    """求根区间两端没有变号"""


class IterationError(FocusError, RuntimeError):
    """幂迭代在迭代上限内没有收敛"""


class CancellationWarning(UserWarning):
    """小半径下除以球体积造成的有效数字损失"""


# 异常 -> 退出码
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_ACCURACY = 3


def exit_code_for(error: BaseException) -> int:
    """
    根据异常类型给出命令行退出码

    Args:
        error: 捕获到的异常

    Returns:
        退出码
    """
    if isinstance(error, (AccuracyError, IterationError)):
        return EXIT_ACCURACY
    return EXIT_USAGE
