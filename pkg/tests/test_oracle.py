"""
离散算子测试
"""

import math

import numpy as np
import pytest

from focusopt.models.densities import ScalarDensity, TangentDensity
from focusopt.models.gram import Subspace
from focusopt.numerics.quadrature import sphere_grid
from focusopt.numerics.specfun import ball_volume, bessel_j
from focusopt.services.field_service import ell_density
from focusopt.services.oracle_service import (
    OracleService,
    assemble,
    ball_kernel,
    check_invariants,
    count_above,
    match_clusters,
    normalized_top_spectrum,
    off_cluster_exponent,
    perturbation_check,
    rayleigh,
    rotate_span_residual,
    tangent_frames,
)
from focusopt.services.spectrum_service import lambda_value, maxwell_top_eigenvalue, rank_one_eigenvalues
from focusopt.utils.errors import AccuracyError, DomainError


class TestBallKernel:
    def test_origin_is_volume(self):
        assert ball_kernel(3, 1.5, 0.0) == pytest.approx(ball_volume(3, 1.5), rel=1e-15)
        assert ball_kernel(2, 1.5, 0.0) == pytest.approx(ball_volume(2, 1.5), rel=1e-15)

    def test_series_branch_is_continuous(self):
        q = np.array([0.99e-4, 1.01e-4])
        values = ball_kernel(3, 1.0, q)
        assert values[0] == pytest.approx(ball_volume(3, 1.0), rel=1e-8)
        assert values[0] == pytest.approx(values[1], rel=1e-3)
        assert ball_kernel(2, 1.0, q)[0] == pytest.approx(ball_kernel(2, 1.0, q)[1], rel=1e-6)

    def test_general_formula_in_three_dimensions(self):
        R, q = 1.3, np.linspace(0.1, 2.0, 20)
        general = (2 * math.pi) ** 1.5 * R ** 1.5 * bessel_j(1.5, R * q) / q ** 1.5
        assert np.allclose(ball_kernel(3, R, q), general, rtol=1e-12)

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            ball_kernel(3, 1.0, -0.1)


class TestAssembly:
    def test_invariants(self, grid3):
        for subspace in Subspace:
            report = check_invariants(assemble(grid3, 1.0, subspace))
            assert report["symmetric"] and report["psd"]

    def test_tangent_frames_are_orthonormal(self, grid3):
        frames = tangent_frames(grid3.nodes)
        gram = np.einsum("iak,ial->ikl", frames, frames)
        assert np.allclose(gram, np.eye(2), atol=1e-14)
        assert np.max(np.abs(np.einsum("ia,iak->ik", grid3.nodes, frames))) < 1e-14

    def test_resolution_rule(self):
        with pytest.raises(AccuracyError):
            assemble(sphere_grid(3, 8), 3.0)

    def test_tangent_needs_three_dimensions(self, grid2):
        with pytest.raises(DomainError):
            assemble(grid2, 1.0, Subspace.TANGENT)

    def test_workers_do_not_change_matrix(self, grid3):
        one = assemble(grid3, 1.0, Subspace.FULL_SCALAR, workers=1)
        four = assemble(grid3, 1.0, Subspace.FULL_SCALAR, workers=4)
        assert np.array_equal(one.matrix, four.matrix)


class TestScalarSpectrum:
    @pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
    def test_clusters_match_lambda(self, config, grid3, R):
        service = OracleService(config)
        values = service.eigenvalues(service.assemble(grid3, R, Subspace.FULL_SCALAR), 16)
        targets = [(lambda_value(3, k, R), 2 * k + 1) for k in range(4)]
        for entry in match_clusters(values, targets):
            assert entry["max_rel_error"] <= 1e-6

    def test_two_dimensional_clusters(self, grid2):
        gram = assemble(grid2, 1.0)
        values = OracleService({"oracle": {"eigen_provider": "dense"}}).eigenvalues(gram, 5)
        targets = [(lambda_value(2, 0, 1.0), 1), (lambda_value(2, 1, 1.0), 2), (lambda_value(2, 2, 1.0), 2)]
        assert all(entry["max_rel_error"] <= 1e-6 for entry in match_clusters(values, targets))

    def test_rayleigh_of_constant(self, grid3):
        gram = assemble(grid3, 1.0)
        constant = ScalarDensity(grid3, np.ones(grid3.size))
        assert rayleigh(gram, constant) == pytest.approx(lambda_value(3, 0, 1.0), rel=1e-8)

    def test_refinement_does_not_grow_cluster_error(self, config):
        R = 2.0
        service = OracleService(config)
        targets = [(lambda_value(3, k, R), 2 * k + 1) for k in range(4)]
        errors = []
        for resolution in (20, 28):
            grid = sphere_grid(3, resolution)
            values = service.eigenvalues(service.assemble(grid, R, Subspace.FULL_SCALAR), 16)
            errors.append(max(entry["max_rel_error"] for entry in match_clusters(values, targets)))
        assert errors[1] <= max(errors[0], 1e-10)
        assert errors[1] <= 1e-6


class TestTangentSpectrum:
    @pytest.mark.parametrize("R", [0.5, 1.5])
    def test_top_cluster(self, config, grid3, R):
        service = OracleService(config)
        gram = service.assemble(grid3, R, Subspace.TANGENT)
        pairs = service.top_eigenpairs(gram, 6)
        mu = maxwell_top_eigenvalue(3, R)
        lam1 = lambda_value(3, 1, R)
        assert all(abs(v - mu) / mu <= 1e-6 for v, _ in pairs[:3])
        assert all(abs(v - lam1) / lam1 <= 1e-6 for v, _ in pairs[3:6])
        assert rotate_span_residual(grid3, [f for _, f in pairs[:3]]) < 1e-6

    def test_rayleigh_of_ell_and_cross(self, grid3):
        R = 1.0
        gram = assemble(grid3, R, Subspace.TANGENT)
        assert rayleigh(gram, ell_density(grid3)) == pytest.approx(maxwell_top_eigenvalue(3, R), rel=1e-8)
        cross = TangentDensity(grid3, np.cross([0.0, 0.0, 1.0], grid3.nodes))
        assert rayleigh(gram, cross) == pytest.approx(lambda_value(3, 1, R), rel=1e-8)

    def test_rayleigh_rejects_wrong_density(self, grid3):
        gram = assemble(grid3, 1.0, Subspace.TANGENT)
        with pytest.raises(DomainError):
            rayleigh(gram, ScalarDensity(grid3, np.ones(grid3.size)))

    @pytest.mark.parametrize("R", [0.5, 2.0])
    def test_exactly_three_above_lambda1(self, grid3, R):
        gram = assemble(grid3, R, Subspace.TANGENT)
        assert count_above(gram, lambda_value(3, 1, R), rel_gap=1e-6) == 3


class TestSmallRadius:
    def test_rank_one_tangent(self, grid3):
        normalized = normalized_top_spectrum(grid3, 0.05, Subspace.TANGENT, 3)
        expected = rank_one_eigenvalues(3)["tangent"][0]
        assert np.max(np.abs(normalized - expected)) / expected <= 0.01

    def test_off_cluster_exponent(self, grid3):
        fit = off_cluster_exponent(grid3, [0.1, 0.14, 0.2])
        assert fit["exponent"] >= 3.7
        assert fit["top_exponent"] == pytest.approx(3.0, abs=0.05)

    @pytest.mark.slow
    @pytest.mark.parametrize("R", [0.25, 0.5, 1.0])
    def test_perturbation_bounds(self, grid3, R):
        report = perturbation_check(grid3, R)
        assert report.violations == 0
        assert report.samples == 20
        assert report.max_difference_ratio <= 1.0 and report.max_norm_ratio <= 1.0
