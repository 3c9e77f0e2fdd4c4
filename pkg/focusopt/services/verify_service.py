"""
验证服务 - 一次性运行全部数值检验并汇总为报告
"""

import hashlib
import json
import math
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from ..models.gram import Subspace
from ..models.reports import CheckResult, VerificationSummary
from ..numerics.quadrature import (
    integrate_sphere,
    max_exactness_error,
    sphere_grid,
    total_weight_error,
)
from ..numerics.specfun import BesselOrder, ball_volume, bessel_j, bessel_j_reference, surface_area
from ..utils.constants import CHECK_FAIL, CHECK_INFO, CHECK_PASS, Convention, DensityMode
from ..utils.logger import get_logger
from . import field_service as fields
from . import oracle_service as oracle
from . import spectrum_service as spectrum
from .harmonics import standard_family

logger = get_logger("focusopt_verify")

REPORT_SCHEMA = "focusopt.verify/1"

FAR_FIELD_DECAY_TOL = 0.05
FAR_FIELD_PROFILE_MIN = 0.999


def _status(ok: bool) -> str:
    return CHECK_PASS if ok else CHECK_FAIL


def run_id_for(config: Dict[str, Any]) -> str:
    """
    由影响计算结果的配置得到确定的运行编号

    只取 run（不含 threads）、numerics、oracle 三节；线程数、日志级别与存储设置不改变编号。
    """
    relevant = {
        "run": {k: v for k, v in config.get("run", {}).items() if k != "threads"},
        "numerics": config.get("numerics", {}),
        "oracle": config.get("oracle", {}),
    }
    payload = json.dumps(relevant, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha1(payload).hexdigest()[:16]


class VerifyService:
    """验证套件：特殊函数、求积、场界、谱判据、离散算子"""

    def __init__(self, config: Dict[str, Any], spectrum_service: spectrum.SpectrumService,
                 oracle_service: oracle.OracleService, workers: int = 1):
        self.config = config
        self.run_config = config.get("run", {})
        self.spectrum = spectrum_service
        self.oracle = oracle_service
        self.workers = workers
        self.resolution = int(self.run_config.get("resolution", 24))
        self.convention = Convention.parse(self.run_config.get("convention", "oracle"))
        self.numerics = spectrum_service.numerics

    # =========================================================================
    # 特殊函数
    # =========================================================================

    def check_bessel(self) -> List[CheckResult]:
        t = np.linspace(0.05, 10.0, 200)
        worst = 0.0
        for twice in (1, 3, 5, 7, 9):
            order = BesselOrder(twice / 2.0)
            worst = max(worst, float(np.max(np.abs(bessel_j(order, t) - bessel_j_reference(order, t)))))
        areas = {2: 2 * math.pi, 3: 4 * math.pi, 4: 2 * math.pi ** 2}
        area_err = max(abs(surface_area(d) - v) / v for d, v in areas.items())

        r = np.linspace(math.pi / 40, math.pi / 2, 20)
        ratio_ok = True
        tight_ok = True
        for k in (0.5, 1.5):
            ratio = np.asarray(bessel_j(k + 1, r)) / np.asarray(bessel_j(k, r))
            ratio_ok &= bool(np.all(ratio < r / (2 * k + 1)))
            tight_ok &= bool(np.all(ratio < r / (2 * k + 3)))
        return [
            CheckResult("specfun.bessel_cross", _status(worst <= 1e-10), worst, 1e-10,
                        "闭式/递推与积分表示之差，ν ∈ {1/2,…,9/2}，t ∈ [0.05, 10]"),
            CheckResult("specfun.surface_area", _status(area_err <= 1e-14), area_err, 1e-14),
            CheckResult("specfun.bessel_ratio", _status(ratio_ok), ratio_ok, "r/(2k+1)",
                        "J_{k+1}(r)/J_k(r) < r/(2k+1)，r ∈ (0, π/2]"),
            CheckResult("specfun.bessel_ratio_tight", CHECK_INFO, tight_ok, "r/(2k+3)",
                        "更紧的比值界，只作观测"),
        ]

    # =========================================================================
    # 求积
    # =========================================================================

    def check_quadrature(self) -> List[CheckResult]:
        grid = sphere_grid(3, self.resolution)
        weight_err = total_weight_error(grid)
        exact_err = max_exactness_error(grid, max_degree=8)
        ell_norm = integrate_sphere(grid, np.sum(fields.ell(3, grid.nodes) ** 2, axis=1))
        ell_err = abs(ell_norm - 8 * math.pi / 3) / (8 * math.pi / 3)
        circle = sphere_grid(2, 8)
        quartic = integrate_sphere(circle, circle.nodes[:, 0] ** 4)
        return [
            CheckResult("quadrature.weights", _status(weight_err <= 1e-12), weight_err, 1e-12),
            CheckResult("quadrature.exactness", _status(exact_err <= 1e-12), exact_err, 1e-12,
                        "次数 ≤ 8 的全部单项式"),
            CheckResult("quadrature.ell_norm", _status(ell_err <= 1e-12), ell_norm, 1e-12),
            CheckResult("quadrature.circle_quartic", _status(abs(quartic - 3 * math.pi / 4) <= 1e-12),
                        quartic, 1e-12),
        ]

    # =========================================================================
    # 场
    # =========================================================================

    def check_fields(self) -> List[CheckResult]:
        results = []
        grid = sphere_grid(3, max(self.resolution, fields.required_resolution(10.0)))
        radii = np.linspace(0.2, 10.0, 50)
        points = np.column_stack([radii * 0.6, radii * 0.0, radii * 0.8])
        samples = fields.synthesize_many(fields.constant_density(grid), points, self.workers)
        exact = 4 * math.pi * np.sin(radii) / radii
        err = max(abs(s.E[0] - e) for s, e in zip(samples, exact)) / (4 * math.pi)
        results.append(CheckResult("fields.constant_identity", _status(err <= 1e-9), err, 1e-9,
                                   "u(x) = 4π sin r/r，误差相对峰值 4π"))

        base = sphere_grid(3, self.resolution)
        rng = np.random.default_rng(2024)
        scalar_bound = fields.origin_bound(3, "scalar")
        maxwell_bound = fields.origin_bound(3, "maxwell")
        origin = np.zeros(3)
        scalar_violations = 0
        maxwell_violations = 0
        for _ in range(100):
            f = fields.random_scalar_density(base, rng)
            if fields.synthesize(f, origin).magnitude > scalar_bound * (1 + 1e-12):
                scalar_violations += 1
            e = fields.random_tangent_density(base, rng, smooth=False)
            if fields.synthesize(e, origin).magnitude > maxwell_bound * (1 + 1e-12):
                maxwell_violations += 1
        const_gap = abs(fields.synthesize(fields.constant_density(base).normalized(), origin).magnitude - scalar_bound)
        Q = fields.rotation_matrix([1.0, 2.0, 3.0], 0.7)
        rotate = fields.ell_rotate(base, Q).normalized()
        ell_gap = abs(fields.synthesize(rotate, origin).magnitude - maxwell_bound)
        ratio = (maxwell_bound / scalar_bound) ** 2
        results += [
            CheckResult("fields.scalar_bound", _status(scalar_violations == 0), scalar_violations, 0,
                        "100 个随机归一化标量密度"),
            CheckResult("fields.maxwell_bound", _status(maxwell_violations == 0), maxwell_violations, 0,
                        "100 个随机归一化切向密度"),
            CheckResult("fields.scalar_equality", _status(const_gap <= 1e-8), const_gap, 1e-8),
            CheckResult("fields.maxwell_equality", _status(ell_gap <= 1e-8), ell_gap, 1e-8),
            CheckResult("fields.bound_ratio", _status(abs(ratio - 2.0 / 3.0) <= 1e-15), ratio, 2.0 / 3.0),
        ]

        expansion = max(fields.ell_expansion_check(sphere_grid(d, 16)) for d in (2, 3))
        results.append(CheckResult("fields.ell_expansion", _status(expansion < 1e-13), expansion, 1e-13))

        worst = 0.0
        for d in (2, 3):
            hgrid = sphere_grid(d, 24)
            points = np.random.default_rng(d).uniform(-2.0, 2.0, size=(4, d))
            for poly in standard_family(d):
                closed = fields.harmonic_field(d, poly.degree, poly, points)
                synth = np.array([s.E[0] for s in fields.synthesize_many(fields.harmonic_density(hgrid, poly), points)])
                scale = max(1.0, float(np.max(np.abs(closed))))
                worst = max(worst, float(np.max(np.abs(closed - synth))) / scale)
        results.append(CheckResult("fields.harmonic_closed_form", _status(worst <= 1e-8), worst, 1e-8,
                                   "(d,k) ∈ {2,3}×{0,1,2,3}"))

        smooth = fields.random_tangent_density(base, np.random.default_rng(99))
        xs = np.random.default_rng(100).uniform(-3, 3, size=(10, 3))
        div = max(fields.divergence(smooth, x) for x in xs)
        results.append(CheckResult("fields.divergence", _status(div <= 1e-10), div, 1e-10))

        equivariance = self._rotation_equivariance(base)
        results.append(CheckResult("fields.rotation_equivariance", _status(equivariance <= 1e-10), equivariance, 1e-10,
                                   "E_Q(Qx) = Q·E(x)，B 同理"))
        return results

    @staticmethod
    def _rotation_equivariance(grid) -> float:
        def field(xi: np.ndarray) -> np.ndarray:
            return np.column_stack([xi[:, 1], xi[:, 2] ** 2, xi[:, 0] * xi[:, 1]])

        Q = fields.rotation_matrix([0.3, -1.0, 0.5], 1.1)
        base = fields.project_tangent(grid, field)
        rotated = fields.rotated_density(grid, field, Q)
        worst = 0.0
        for x in np.random.default_rng(11).uniform(-2.0, 2.0, size=(5, 3)):
            a = fields.synthesize(base, x)
            b = fields.synthesize(rotated, Q @ x)
            worst = max(worst, float(np.max(np.abs(Q @ a.E - b.E))), float(np.max(np.abs(Q @ a.B - b.B))))
        return worst

    # =========================================================================
    # 谱
    # =========================================================================

    def check_spectrum(self) -> List[CheckResult]:
        results = []
        conv = self.convention
        ok, witness = spectrum.check_monotonicity(3, math.pi / 2, 6, conv, **self.numerics)
        results.append(CheckResult("spectrum.monotonicity", _status(ok), witness, None,
                                   "d=3, R=π/2, k ≤ 6"))

        lattice = [math.pi / 2 * i / 20 for i in range(1, 21)]
        details = [spectrum.ratio_bound_details(R, **self.numerics) for R in lattice]
        results.append(CheckResult("spectrum.ratio_bounds", _status(all(x["holds"] for x in details)),
                                   max(x["ratio_1_0"] / x["bound_1_0"] for x in details), 1.0,
                                   "Λ₁/Λ₀ < R²/4, Λ₂/Λ₁ < R²/16"))
        results.append(CheckResult("spectrum.ratio_bounds_tight", CHECK_INFO,
                                   sum(1 for x in details if x["tight_holds"]), len(details),
                                   "更紧的 R²/16, R²/36 成立的格点数"))

        h2 = spectrum.h_poly(2)
        chain_ok = True
        poly_chain = 0
        for R in lattice:
            report = spectrum.criterion_margin(3, R, conv, **self.numerics)
            lam0 = spectrum.lambda_value(3, 0, R, conv, **self.numerics)
            lower = 2.0 / 3.0 * lam0 - report.lambda1
            chain_ok &= report.margin >= lower > lam0 * spectrum.h_corrected(R) > 0
            poly_chain += int(report.margin >= lam0 * spectrum.h_poly(R))
        results += [
            CheckResult("spectrum.h_exact", _status(h2 == Fraction(43, 108)), str(h2), "43/108"),
            CheckResult("spectrum.h_chain", _status(chain_ok), chain_ok, None,
                        "margin ≥ (2/3)Λ₀ − Λ₁ > Λ₀(2/3 − R²/4) > 0"),
            CheckResult("spectrum.h_chain_poly", CHECK_INFO, poly_chain, len(lattice),
                        "margin ≥ Λ₀·h(R) 成立的格点数"),
        ]

        small = spectrum.lambda_value(3, 0, 0.1, Convention.ORACLE_CONSISTENT, **self.numerics)
        ratio = small / (surface_area(3) * ball_volume(3, 0.1))
        results.append(CheckResult("spectrum.small_r", _status(abs(ratio - 1) <= 0.05), ratio, 0.05))

        same = all(
            spectrum.criterion_margin(3, R, Convention.ORACLE_CONSISTENT, **self.numerics).satisfied
            == spectrum.criterion_margin(3, R, Convention.PAPER_EQ_LAMBDADEF, **self.numerics).satisfied
            for R in (0.5, 1.0, 2.0, 2.6, 3.0)
        )
        results.append(CheckResult("spectrum.convention_invariance", _status(same), same, None))

        results += self._check_crossings()
        results += self._check_densities()
        return results

    def _check_crossings(self) -> List[CheckResult]:
        scan = [0.05 * i for i in range(1, 126)]
        report = self.spectrum.crossings(3, scan)
        refined_service = spectrum.SpectrumService(
            {**self.config, "numerics": {**self.config.get("numerics", {}), "panel_nodes": 2 * self.numerics["panel_nodes"]}},
            workers=self.workers,
        )
        refined = refined_service.crossings(3, scan)
        results = []
        for key, low, high in (
            ("scalar_crossing", 3.0, 3.3),
            ("conservative_criterion_crossing", 2.3, 2.7),
            ("criterion_crossing", 2.7, 2.8),
        ):
            entry = report.get(key)
            if entry is None:
                results.append(CheckResult(f"spectrum.{key}", CHECK_FAIL, None, [low, high], "没有找到变号"))
                continue
            root = entry["root"]
            stable = refined.get(key) is not None and abs(refined[key]["root"] - root) <= 1e-6
            results.append(CheckResult(f"spectrum.{key}", _status(low < root < high and stable), root,
                                       [low, high], "加倍面板节点后根的变化 ≤ 1e-6"))
        scalar = report.get("scalar_crossing")
        if scalar is not None:
            gap = abs(scalar["root"] - math.pi)
            results.append(CheckResult("spectrum.scalar_crossing_pi", _status(gap < 1e-6), gap, 1e-6,
                                       "Λ_{3,0}(π) = Λ_{3,1}(π)"))
        early = self.spectrum.crossings(3, [0.05 * i for i in range(1, 32)])
        none_early = all(v is None for k, v in early.items() if k != "conservative_criterion_crossing")
        results.append(CheckResult("spectrum.no_early_crossing", _status(none_early), none_early, None,
                                   "R ≤ π/2 的格点上没有标量交点和判据变号"))
        return results

    def _check_densities(self) -> List[CheckResult]:
        results = []
        lattice = [0.05 * i for i in range(1, 126)]
        windows = {
            DensityMode.SCALAR: (1.8, 2.2),
            DensityMode.MAXWELL: (1.7, 2.1),
            DensityMode.MAXWELL_CONSERVATIVE: (1.7, 2.1),
        }
        dense = np.linspace(0.1, 2.4, 47)
        for mode, (low, high) in windows.items():
            radius = self.spectrum.half_max(3, mode, lattice)
            ok = radius is not None and low <= radius <= high
            results.append(CheckResult(f"spectrum.half_max_{mode.value}", _status(ok), radius, [low, high]))
            curve = self.spectrum.density_curve(3, dense, mode)
            decreasing = bool(np.all(np.diff(curve) < 0))
            results.append(CheckResult(f"spectrum.density_decreasing_{mode.value}", _status(decreasing),
                                       decreasing, None, "[0.1, 2.4] 上严格递减"))
        return results

    # =========================================================================
    # 离散算子
    # =========================================================================

    def _gram(self, R: float, subspace: Subspace, resolution: Optional[int] = None):
        grid = sphere_grid(3, resolution or self.resolution)
        gram = self.oracle.assemble(grid, R, subspace)
        return grid, gram

    def check_oracle(self) -> List[CheckResult]:
        results = []
        conv = self.convention
        worst = 0.0
        invariant_ok = True
        top_ratio = None
        for R in (0.5, 1.0, 2.0, 3.0):
            _, gram = self._gram(R, Subspace.FULL_SCALAR)
            inv = oracle.check_invariants(gram)
            invariant_ok &= inv["symmetric"] and inv["psd"]
            values = self.oracle.eigenvalues(gram, 16)
            if top_ratio is None:
                top_ratio = float(values[0]) / spectrum.lambda_value(3, 0, R, conv, **self.numerics)
            targets = [(spectrum.lambda_value(3, k, R, conv, **self.numerics), 2 * k + 1) for k in range(4)]
            for entry in oracle.match_clusters(values, targets):
                worst = max(worst, entry["max_rel_error"])
        results.append(CheckResult("oracle.prefactor_ratio", _status(abs(top_ratio - 1) <= 1e-6), top_ratio, 1e-6,
                                   "R=0.5 时离散顶端特征值与解析 Λ₀ 之比"))
        results.append(CheckResult("oracle.scalar_clusters", _status(worst <= 1e-6), worst, 1e-6,
                                   "R ∈ {0.5,1,2,3}，k ≤ 3，簇大小 2k+1"))

        top_err = 0.0
        second_err = 0.0
        span_res = 0.0
        for R in (0.5, 1.5, 2.0):
            grid, gram = self._gram(R, Subspace.TANGENT)
            inv = oracle.check_invariants(gram)
            invariant_ok &= inv["symmetric"] and inv["psd"]
            pairs = self.oracle.top_eigenpairs(gram, 6)
            mu = spectrum.maxwell_top_eigenvalue(3, R, conv, **self.numerics)
            lam1 = spectrum.lambda_value(3, 1, R, conv, **self.numerics)
            top_err = max(top_err, max(abs(v - mu) / mu for v, _ in pairs[:3]))
            second_err = max(second_err, max(abs(v - lam1) / lam1 for v, _ in pairs[3:6]))
            span_res = max(span_res, oracle.rotate_span_residual(grid, [f for _, f in pairs[:3]]))
        results += [
            CheckResult("oracle.maxwell_top", _status(top_err <= 1e-6), top_err, 1e-6,
                        "TANGENT 顶端特征值 = ((d−1)Λ₀+Λ₂)/d，重数 3"),
            CheckResult("oracle.maxwell_span", _status(span_res < 1e-6), span_res, 1e-6),
            CheckResult("oracle.maxwell_second", _status(second_err <= 1e-6), second_err, 1e-6,
                        "第二个不同特征值 = Λ₁"),
            CheckResult("oracle.invariants", _status(invariant_ok), invariant_ok, None, "对称且半正定"),
        ]

        counts = []
        for R in (0.5, 1.0, 2.0, 2.3):
            _, gram = self._gram(R, Subspace.TANGENT)
            lam1 = spectrum.lambda_value(3, 1, R, conv, **self.numerics)
            counts.append(oracle.count_above(gram, lam1, rel_gap=1e-6))
        results.append(CheckResult("oracle.minimax_count", _status(all(c == 3 for c in counts)), counts, 3))

        _, gram = self._gram(0.2, Subspace.TANGENT)
        top = self.oracle.eigenvalues(gram, 1)[0]
        ratio = top / (ball_volume(3, 0.2) * surface_area(3) * 2.0 / 3.0)
        results.append(CheckResult("oracle.small_r_tangent", _status(abs(ratio - 1) <= 0.05), ratio, 0.05))

        fit = oracle.off_cluster_exponent(sphere_grid(3, self.resolution), [0.1, 0.14, 0.2])
        results.append(CheckResult("oracle.off_cluster_exponent", _status(fit["exponent"] >= 3 + 1 - 0.3),
                                   fit["exponent"], 3 + 1 - 0.3, "拟合指数的下界"))

        rank = spectrum.rank_one_eigenvalues(3)
        grid = sphere_grid(3, self.resolution)
        normalized = oracle.normalized_top_spectrum(grid, 0.05, Subspace.TANGENT, 3)
        rank_err = float(np.max(np.abs(normalized - rank["tangent"][0]))) / rank["tangent"][0]
        results.append(CheckResult("oracle.rank_one_tangent", _status(rank_err <= 0.01), rank_err, 0.01,
                                   "R=0.05 时前 3 个特征值/|B_R| ≈ |S²|·2/3"))

        violations = 0
        ratios = []
        for R in (0.25, 0.5, 1.0):
            report = oracle.perturbation_check(grid, R, workers=self.workers)
            violations += report.violations
            ratios.append(max(report.max_difference_ratio, report.max_norm_ratio))
        results.append(CheckResult("oracle.perturbation", _status(violations == 0), ratios, 1.0,
                                   "20 个随机密度，R ∈ {0.25, 0.5, 1}"))
        return results

    def check_far_field(self) -> List[CheckResult]:
        """远场：衰减指数与角分布判定通过与否，振幅只报告（与驻相常数 2/√(2π) 不一致）"""
        r = 60.0
        grid = sphere_grid(3, fields.required_resolution(r + 2 * math.pi))
        results = []
        for name, density in (("ell", fields.ell_density(grid)), ("constant", fields.constant_density(grid))):
            report = fields.far_field_check(density, r, workers=self.workers)
            decay_gap = abs(report.decay_exponent - report.expected_exponent)
            results.append(CheckResult(f"far_field.{name}_decay", _status(decay_gap <= FAR_FIELD_DECAY_TOL),
                                       report.decay_exponent, FAR_FIELD_DECAY_TOL,
                                       f"|指数 − {report.expected_exponent}| ≤ {FAR_FIELD_DECAY_TOL}"))
            results.append(CheckResult(f"far_field.{name}_profile",
                                       _status(report.profile_correlation > FAR_FIELD_PROFILE_MIN),
                                       report.profile_correlation, FAR_FIELD_PROFILE_MIN, "角分布相关系数"))
            results.append(CheckResult(f"far_field.{name}_amplitude", CHECK_INFO, report.amplitude,
                                       report.predicted_amplitude, "观测振幅 vs 驻相常数 2/√(2π)"))
        return results

    # =========================================================================
    # 汇总
    # =========================================================================

    def suites(self) -> List[Callable[[], List[CheckResult]]]:
        return [
            self.check_bessel,
            self.check_quadrature,
            self.check_fields,
            self.check_spectrum,
            self.check_oracle,
            self.check_far_field,
        ]

    def run(self) -> VerificationSummary:
        """依次运行全部检验；精度错误直接向上抛出"""
        summary = VerificationSummary(run_id=run_id_for(self.config), config=self.config)
        for suite in self.suites():
            checks = suite()
            for check in checks:
                logger.info(f"{check.check_id}: {check.status} ({check.observed})")
            summary.checks.extend(checks)
        return summary

    @staticmethod
    def to_report(summary: VerificationSummary) -> Dict[str, Any]:
        """报告字典，键顺序固定"""
        counts = {CHECK_PASS: 0, CHECK_FAIL: 0, CHECK_INFO: 0}
        for check in summary.checks:
            counts[check.status] = counts.get(check.status, 0) + 1
        return {
            "schema": REPORT_SCHEMA,
            "run_id": summary.run_id,
            "passed": summary.passed,
            "summary": {"total": len(summary.checks), **counts},
            "checks": [check.to_dict() for check in summary.checks],
        }
