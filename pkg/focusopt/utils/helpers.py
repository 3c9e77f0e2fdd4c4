"""
工具函数
"""

import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, TypeVar

import numpy as np

from .errors import DomainError

T = TypeVar("T")
R = TypeVar("R")

FLOAT_FORMAT = "%.12e"
THREADS_ENV = "FOCUSOPT_THREADS"

# 固定分块大小，归约结果与线程数无关
REDUCTION_CHUNK = 256


def format_float(value: float) -> str:
    """按固定格式输出浮点数，保证相同输入逐字节相同"""
    return FLOAT_FORMAT % float(value)


def resolve_workers(config: Optional[Dict[str, Any]] = None) -> int:
    """
    确定工作线程数

    Args:
        config: 配置字典，可带 run.threads

    Returns:
        线程数（至少 1）
    """
    value = None
    if config:
        value = config.get("run", {}).get("threads")
    if value is None:
        value = os.environ.get(THREADS_ENV)
    if value is None or value == "":
        return max(1, min(4, os.cpu_count() or 1))
    try:
        workers = int(value)
    except (TypeError, ValueError):
        raise DomainError(f"{THREADS_ENV} 不是整数: {value!r}")
    return max(1, workers)


def ordered_map(func: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """并行映射，结果顺序与输入一致"""
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def pairwise_combine(partials: Sequence[Any]) -> Any:
    """固定二叉树两两合并部分和"""
    if not partials:
        return 0.0
    level = list(partials)
    while len(level) > 1:
        merged = [level[i] + level[i + 1] for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            merged.append(level[-1])
        level = merged
    return level[0]


def deterministic_sum(values: np.ndarray, workers: int = 1) -> Any:
    """
    沿第 0 轴求和：固定分块 + 两两合并

    Args:
        values: 形如 (N, ...) 的数组
        workers: 线程数，只影响谁来算每一块，不影响结果

    Returns:
        求和结果（标量或数组）
    """
    values = np.asarray(values)
    n = values.shape[0]
    bounds = [(start, min(start + REDUCTION_CHUNK, n)) for start in range(0, n, REDUCTION_CHUNK)]
    partials = ordered_map(lambda b: values[b[0]:b[1]].sum(axis=0), bounds, workers)
    return pairwise_combine(partials)


def radius_lattice(r_min: float, r_max: float, r_step: float) -> List[float]:
    """
    生成半径格点 r_min + i·r_step（不超过 r_max）

    Args:
        r_min: 起点
        r_max: 终点
        r_step: 步长

    Returns:
        半径列表；步长大于区间时只有一个点
    """
    if r_step <= 0:
        raise DomainError(f"步长必须为正: {r_step}")
    count = int(math.floor((r_max - r_min) / r_step + 1e-9)) + 1
    count = max(count, 1)
    return [r_min + i * r_step for i in range(count)]


def atomic_write_text(path: str, text: str) -> None:
    """先写临时文件再 os.replace，避免留下半截输出"""
    # mkstemp 建的文件是 0600，替换前按 umask 恢复普通文件权限
    umask = os.umask(0)
    os.umask(umask)
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp_path = tempfile.mkstemp(prefix=".focusopt-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.chmod(tmp_path, 0o666 & ~umask)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def as_unit_vectors(points: Iterable[Sequence[float]], tol: float = 1e-12) -> np.ndarray:
    """检查并返回单位向量数组，非单位输入抛 DomainError"""
    arr = np.atleast_2d(np.asarray(points, dtype=float))
    norms = np.linalg.norm(arr, axis=1)
    if np.any(np.abs(norms - 1.0) > tol):
        raise DomainError("输入不是单位向量")
    return arr


def to_builtin(value: Any) -> Any:
    """把 numpy 标量/数组与元组递归转换为可 JSON 序列化的内置类型"""
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value
