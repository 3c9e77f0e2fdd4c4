"""
命令组件 - lambda / density / crossings / verify / field 子命令
"""

import csv
import io
import json
import math
import re
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config import RunConfig
from ..models.densities import TangentDensity
from ..numerics.quadrature import sphere_grid
from ..services import FieldService, OracleService, SpectrumService, StoreService, VerifyService
from ..services.field_service import required_resolution
from ..utils.constants import DENSITY_R_FLOOR, PAPER_NORMALIZER, Convention, DensityMode
from ..utils.errors import (
    EXIT_CHECK_FAILED,
    EXIT_OK,
    EXIT_USAGE,
    DomainError,
    FocusError,
    exit_code_for,
)
from ..utils.helpers import atomic_write_text, format_float, radius_lattice, resolve_workers, to_builtin
from ..utils.logger import get_logger

logger = get_logger("focusopt_commands")

CommandResult = Tuple[bool, Optional[str], int]

_POINT_SPLIT = re.compile(r"[,\s]+")


def render_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """逗号分隔、带表头；浮点数统一用 %.12e"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buffer.getvalue()


def render_json(payload: Dict[str, Any]) -> str:
    """UTF-8 JSON，键顺序按构造顺序固定"""
    return json.dumps(to_builtin(payload), ensure_ascii=False, indent=2) + "\n"


def parse_points(text: str, d: int, source: str = "<points>") -> np.ndarray:
    """
    解析点文件：每行一个 d 维点，逗号或空白分隔；空行与 # 注释行跳过

    Raises:
        DomainError: 带行号的解析错误
    """
    points = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p for p in _POINT_SPLIT.split(line) if p]
        if len(parts) != d:
            raise DomainError(f"{source} 第 {lineno} 行: 需要 {d} 个坐标，得到 {len(parts)} 个")
        try:
            point = [float(p) for p in parts]
        except ValueError:
            raise DomainError(f"{source} 第 {lineno} 行: 无法解析为数字: {line!r}")
        if not all(math.isfinite(v) for v in point):
            raise DomainError(f"{source} 第 {lineno} 行: 坐标必须有限")
        points.append(point)
    if not points:
        raise DomainError(f"{source} 中没有任何点")
    return np.array(points, dtype=float)


class BaseCommand:
    """命令基类：持有配置与服务，统一输出与错误到退出码的转换"""

    command_name = ""
    command_description = ""

    def __init__(self, config: Dict[str, Any], args: Optional[Dict[str, Any]] = None):
        self.config = config
        self.args = args or {}
        self.run_config = RunConfig.from_config(config, self.args.get("out"))
        self.workers = resolve_workers(config)
        self._store: Optional[StoreService] = None

    @property
    def store(self) -> Optional[StoreService]:
        storage = self.config.get("storage", {})
        if self._store is None and storage.get("enabled", False):
            self._store = StoreService(self.config)
        return self._store

    def spectrum_service(self) -> SpectrumService:
        return SpectrumService(self.config, store=self.store, workers=self.workers)

    def lattice(self) -> List[float]:
        rc = self.run_config
        return radius_lattice(rc.r_min, rc.r_max, rc.r_step)

    def emit(self, text: str) -> None:
        """写入 --out 指定的文件（原子替换），否则写到标准输出"""
        path = self.run_config.output_path
        if path:
            atomic_write_text(path, text)
            logger.info(f"已写入 {path}")
        else:
            sys.stdout.write(text)

    def execute(self) -> CommandResult:
        raise NotImplementedError

    def run(self) -> CommandResult:
        """执行命令，把库异常转换为 (成功, 消息, 退出码)"""
        try:
            return self.execute()
        except FocusError as e:
            error_msg = f"{self.command_name} 失败: {str(e)}"
            logger.error(error_msg)
            return False, error_msg, exit_code_for(e)
        except OSError as e:
            error_msg = f"{self.command_name} 读写文件失败: {str(e)}"
            logger.error(error_msg)
            return False, error_msg, EXIT_USAGE
        finally:
            if self._store is not None:
                self._store.close()
                self._store = None


class LambdaCommand(BaseCommand):
    """谱表命令"""

    command_name = "lambda"
    command_description = "输出 Λ_{d,k}(R) 谱表，k = 0…kmax"

    def execute(self) -> CommandResult:
        rc = self.run_config
        radii = self.lattice()
        table = self.spectrum_service().build_table(rc.d, radii, rc.kmax, rc.convention)
        normalizer = PAPER_NORMALIZER if rc.convention == Convention.PAPER_EQ_LAMBDADEF and rc.d == 3 else 1.0
        columns = ["R"] + [f"lambda_{k}" for k in table.ks]
        rows = [[float(r)] + [float(v) / normalizer for v in table.values[i]] for i, r in enumerate(table.radii)]

        if rc.format == "json":
            self.emit(render_json({
                "schema": "focusopt.lambda/1",
                "d": rc.d,
                "convention": rc.convention.value,
                "normalizer": normalizer,
                "columns": columns,
                "rows": rows,
            }))
        else:
            self.emit(render_csv(columns, rows))
        return True, f"谱表 {len(rows)} 行", EXIT_OK


class DensityCommand(BaseCommand):
    """能量密度命令"""

    command_name = "density"
    command_description = "输出能量密度曲线 Λ/|B_R| 及半高半径"

    def execute(self) -> CommandResult:
        rc = self.run_config
        mode = DensityMode(self.args.get("mode") or DensityMode.SCALAR.value)
        if rc.r_min < DENSITY_R_FLOOR:
            raise DomainError(f"能量密度要求 r_min ≥ {DENSITY_R_FLOOR}（相消误差）: {rc.r_min}")
        radii = self.lattice()
        service = self.spectrum_service()
        values = service.density_curve(rc.d, radii, mode, rc.convention)
        half = service.half_max(rc.d, mode, radii, rc.convention)
        if half is None:
            logger.info("格点范围内密度没有降到极限的一半")

        if rc.format == "json":
            self.emit(render_json({
                "schema": "focusopt.density/1",
                "d": rc.d,
                "mode": mode.value,
                "convention": rc.convention.value,
                "columns": ["R", "density"],
                "rows": [[float(r), float(v)] for r, v in zip(radii, values)],
                "half_max_radius": half,
            }))
        else:
            text = render_csv(["R", "density"], [[float(r), float(v)] for r, v in zip(radii, values)])
            text += f"half_max_radius,{format_float(half) if half is not None else ''}\n"
            self.emit(text)
        return True, f"密度曲线 {len(radii)} 行，半高半径 {half}", EXIT_OK


class CrossingsCommand(BaseCommand):
    """交点命令"""

    command_name = "crossings"
    command_description = "在半径格点上找标量交点与判据变号点"

    FIELDS = ("scalar_crossing", "criterion_crossing", "conservative_criterion_crossing")

    def execute(self) -> CommandResult:
        rc = self.run_config
        radii = self.lattice()
        report = self.spectrum_service().crossings(rc.d, radii)

        if rc.format == "csv":
            rows = []
            for name in self.FIELDS:
                entry = report.get(name)
                if entry is None:
                    rows.append([name, "", "", "", ""])
                else:
                    rows.append([name, entry["root"], entry["bracket"][0], entry["bracket"][1], entry["tolerance"]])
            self.emit(render_csv(["name", "root", "bracket_low", "bracket_high", "tolerance"], rows))
        else:
            payload = {
                "schema": "focusopt.crossings/1",
                "d": rc.d,
                "convention": rc.convention.value,
                "lattice": {"r_min": rc.r_min, "r_max": rc.r_max, "r_step": rc.r_step, "points": len(radii)},
            }
            payload.update({name: report.get(name) for name in self.FIELDS})
            self.emit(render_json(payload))
        found = sum(1 for name in self.FIELDS if report.get(name) is not None)
        return True, f"找到 {found} 个变号点", EXIT_OK


class VerifyCommand(BaseCommand):
    """验证命令"""

    command_name = "verify"
    command_description = "运行全部数值检验，任一检验失败时退出码为 1"

    def execute(self) -> CommandResult:
        if self.args.get("history"):
            return self._history()

        spectrum = self.spectrum_service()
        oracle = OracleService(self.config, self.workers)
        service = VerifyService(self.config, spectrum, oracle, self.workers)
        summary = service.run()
        report = VerifyService.to_report(summary)

        if self.run_config.format == "csv":
            rows = [
                [c["id"], c["status"], json.dumps(c["observed"]), json.dumps(c["tolerance"]), c["detail"]]
                for c in report["checks"]
            ]
            self.emit(render_csv(["id", "status", "observed", "tolerance", "detail"], rows))
        else:
            self.emit(render_json(report))

        if self.store is not None:
            self.store.record_checks(summary)

        failed = summary.failed
        if failed:
            ids = ", ".join(c.check_id for c in failed)
            return False, f"{len(failed)} 项检验失败: {ids}", EXIT_CHECK_FAILED
        return True, f"{len(summary.checks)} 项检验全部通过", EXIT_OK

    def _history(self) -> CommandResult:
        if self.store is None:
            raise DomainError("查看历史需要启用存储（--db 或 [storage].enabled）")
        runs = self.store.recent_runs(int(self.args.get("limit") or 5))
        if self.run_config.format == "csv":
            rows = [[r["run_id"], r["batch_id"], r["created_at"], r["pass"], r["fail"], r["info"]] for r in runs]
            self.emit(render_csv(["run_id", "batch_id", "created_at", "pass", "fail", "info"], rows))
        else:
            self.emit(render_json({"schema": "focusopt.history/1", "runs": runs}))
        return True, f"{len(runs)} 次运行记录", EXIT_OK


class FieldCommand(BaseCommand):
    """场取样命令"""

    command_name = "field"
    command_description = "在给定点上合成场 E（切向密度同时给出 B）"

    def _points(self) -> np.ndarray:
        d = self.run_config.d
        path = self.args.get("points")
        inline = self.args.get("x") or []
        if path:
            with open(path, "r", encoding="utf-8") as handle:
                return parse_points(handle.read(), d, path)
        if inline:
            return parse_points("\n".join(inline), d, "--x")
        raise DomainError("需要 --points 文件或至少一个 --x")

    def execute(self) -> CommandResult:
        rc = self.run_config
        points = self._points()
        reach = float(np.max(np.linalg.norm(points, axis=1)))
        resolution = max(rc.resolution, required_resolution(reach))
        if resolution > rc.resolution:
            logger.info(f"|x| 最大 {reach:.3f}，分辨率由 {rc.resolution} 提高到 {resolution}")
        grid = sphere_grid(rc.d, resolution)

        service = FieldService(self.config, self.workers)
        spec = self.args.get("density") or "ell"
        density = service.build_density(grid, spec)
        samples = service.sample(density, points)

        d = rc.d
        tangent = isinstance(density, TangentDensity)
        header = [f"x{j + 1}" for j in range(d)]
        names = [f"E{j + 1}" for j in range(d)] if tangent else ["u"]
        for name in names:
            header += [f"{name}_re", f"{name}_im"]
        header.append("abs_E" if tangent else "abs_u")
        if tangent:
            b_names = ["B"] if d == 2 else [f"B{j + 1}" for j in range(d)]
            for name in b_names:
                header += [f"{name}_re", f"{name}_im"]

        rows = []
        for sample in samples:
            row = [float(v) for v in sample.x]
            for value in np.atleast_1d(sample.E):
                row += [float(value.real), float(value.imag)]
            row.append(sample.magnitude)
            if tangent:
                for value in np.atleast_1d(sample.B):
                    row += [float(value.real), float(value.imag)]
            rows.append(row)

        if rc.format == "json":
            self.emit(render_json({
                "schema": "focusopt.field/1",
                "d": d,
                "density": spec,
                "resolution": resolution,
                "columns": header,
                "rows": rows,
            }))
        else:
            self.emit(render_csv(header, rows))
        return True, f"{len(rows)} 个点", EXIT_OK


COMMANDS = {
    cls.command_name: cls
    for cls in (LambdaCommand, DensityCommand, CrossingsCommand, VerifyCommand, FieldCommand)
}
