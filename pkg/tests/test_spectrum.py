"""
谱函数与判据测试
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from focusopt.numerics.specfun import ball_volume, surface_area
from focusopt.services import StoreService
from focusopt.services.spectrum_service import (
    SpectrumService,
    check_monotonicity,
    criterion_margin,
    density_limit,
    energy_density,
    find_crossing,
    h_corrected,
    h_poly,
    half_max_radius,
    lambda_prefactor,
    lambda_value,
    maxwell_top_eigenvalue,
    conservative_maxwell_eigenvalue,
    radial_integral,
    rank_one_eigenvalues,
    ratio_bound_check,
    ratio_bound_details,
    scan_brackets,
)
from focusopt.utils.constants import PAPER_NORMALIZER, Convention, DensityMode
from focusopt.utils.errors import BracketError, CancellationWarning, DomainError

ORACLE = Convention.ORACLE_CONSISTENT
PAPER = Convention.PAPER_EQ_LAMBDADEF


class TestLambda:
    def test_normalized_integrals_at_one(self):
        assert radial_integral(3, 0, 1.0) == pytest.approx(0.173591, rel=1e-5)
        assert radial_integral(3, 1, 1.0) == pytest.approx(0.012256, rel=1e-4)
        assert radial_integral(3, 2, 1.0) == pytest.approx(0.000362, rel=2e-3)

    def test_paper_normalizer_at_pi(self):
        """∫₀^π r·J_{1/2}² dr = 1"""
        assert lambda_value(3, 0, math.pi, PAPER) / PAPER_NORMALIZER == pytest.approx(1.0, abs=1e-10)

    def test_convention_ratio(self):
        ratio = lambda_prefactor(3, ORACLE) / lambda_prefactor(3, PAPER)
        assert ratio == pytest.approx(math.sqrt(math.pi / 2), rel=1e-14)

    def test_small_radius_limit(self):
        value = lambda_value(3, 0, 0.1, ORACLE)
        assert value == pytest.approx(0.0526, abs=5e-4)
        assert value / (surface_area(3) * ball_volume(3, 0.1)) == pytest.approx(1.0, rel=0.05)

    def test_high_order_is_tiny(self):
        ratio = lambda_value(3, 12, 2 * math.pi) / lambda_value(3, 0, 2 * math.pi)
        assert 1e-7 < ratio < 3e-7

    def test_two_dimensions(self):
        assert lambda_value(2, 0, 0.1) / ((2 * math.pi) * math.pi * 0.01) == pytest.approx(1.0, rel=0.01)

    @pytest.mark.parametrize("d,k,R", [(1, 0, 1.0), (3, -1, 1.0), (3, 0, 0.0), (3, 0, -1.0)])
    def test_domain(self, d, k, R):
        with pytest.raises(DomainError):
            lambda_value(d, k, R)

    def test_monotone_in_k(self):
        ok, witness = check_monotonicity(3, math.pi / 2, 6)
        assert ok and witness is None

    @settings(max_examples=25, deadline=None)
    @given(R=st.floats(min_value=0.01, max_value=math.pi / 2))
    def test_monotone_in_k_property(self, R):
        assert check_monotonicity(3, R, 4)[0]

    def test_scalar_two_largest(self):
        assert criterion_margin(3, 1.0).scalar_order_ok

    @pytest.mark.parametrize("d,count", [(2, 10), (3, 60)])
    def test_nondecreasing_in_radius(self, d, count):
        radii = np.linspace(0.05, 10.0, count)
        for k in range(4):
            values = [lambda_value(d, k, R) for R in radii]
            assert all(b >= a for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_small_radius_scaling_converges(self, k):
        ratios = [lambda_value(3, k, 2.0 ** -m) / (2.0 ** -m) ** (3 + 2 * k) for m in range(3, 11)]
        changes = [abs(b - a) / abs(b) for a, b in zip(ratios, ratios[1:])]
        assert all(later < earlier for earlier, later in zip(changes, changes[1:]))
        assert changes[-1] < 1e-5


class TestMaxwell:
    def test_top_exceeds_two_thirds_lambda0(self):
        R = 1.0
        lam0 = lambda_value(3, 0, R)
        assert maxwell_top_eigenvalue(3, R) > lam0 * 2 / 3
        assert conservative_maxwell_eigenvalue(3, R) < lam0 * 2 / 3
        assert conservative_maxwell_eigenvalue(3, R) < maxwell_top_eigenvalue(3, R)

    def test_small_radius_ratio(self):
        R = 0.05
        assert maxwell_top_eigenvalue(3, R) / lambda_value(3, 0, R) == pytest.approx(2 / 3, rel=1e-3)

    def test_criterion(self):
        report = criterion_margin(3, 1.0)
        assert report.satisfied and report.margin > 0 and report.conservative_margin > 0
        assert not criterion_margin(3, 3.0).satisfied

    @settings(max_examples=10, deadline=None)
    @given(R=st.floats(min_value=0.05, max_value=3.0))
    def test_criterion_independent_of_convention(self, R):
        assert criterion_margin(3, R, ORACLE).satisfied == criterion_margin(3, R, PAPER).satisfied

    def test_rank_one(self):
        values = rank_one_eigenvalues(3)
        assert values["scalar"] == (pytest.approx(4 * math.pi), 1)
        assert values["tangent"][0] == pytest.approx(8 * math.pi / 3)
        assert values["tangent"][1] == 3


class TestBounds:
    def test_h_exact(self):
        assert h_poly(2) == Fraction(43, 108)
        assert isinstance(h_poly(Fraction(1, 2)), Fraction)
        assert h_poly(1.0) == pytest.approx(2 / 3 - 2 / 3 / 576 - 1 / 16)

    def test_h_corrected(self):
        assert h_corrected(1) == Fraction(5, 12)
        assert h_corrected(math.pi / 2) > 0

    @pytest.mark.parametrize("R", [0.1, 0.5, 1.0, 1.5, math.pi / 2])
    def test_corrected_chain(self, R):
        report = criterion_margin(3, R)
        lam0 = lambda_value(3, 0, R)
        lower = 2 / 3 * lam0 - report.lambda1
        assert report.margin >= lower > lam0 * h_corrected(R) > 0

    def test_poly_chain_fails_at_one(self):
        report = criterion_margin(3, 1.0)
        assert report.margin < lambda_value(3, 0, 1.0) * h_poly(1.0)

    @settings(max_examples=20, deadline=None)
    @given(R=st.floats(min_value=0.01, max_value=math.pi / 2))
    def test_ratio_bounds(self, R):
        assert ratio_bound_check(R)

    def test_tight_ratio_bound_fails_at_one(self):
        details = ratio_bound_details(1.0)
        assert details["ratio_1_0"] == pytest.approx(0.0706, abs=5e-4)
        assert details["holds"] and not details["tight_holds"]

    def test_ratio_bound_domain(self):
        with pytest.raises(DomainError):
            ratio_bound_details(2.0)


class TestCrossings:
    def test_find_crossing(self):
        assert find_crossing(math.cos, [1.0, 2.0]) == pytest.approx(math.pi / 2, abs=1e-8)

    def test_bracket_error(self):
        with pytest.raises(BracketError):
            find_crossing(math.cos, [0.0, 1.0])

    def test_scan_brackets(self):
        lattice = [0.0, 1.0, 2.0, 3.0, 4.0]
        values = [1.0, 0.5, -0.5, -1.0, 2.0]
        assert scan_brackets(values, lattice) == [(1.0, 2.0), (3.0, 4.0)]

    def test_crossing_report(self, config):
        service = SpectrumService(config, workers=1)
        report = service.crossings(3, [0.05 * i for i in range(1, 126)])
        assert abs(report["scalar_crossing"]["root"] - math.pi) < 1e-6
        assert 3.0 < report["scalar_crossing"]["root"] < 3.3
        assert 2.7 < report["criterion_crossing"]["root"] < 2.8
        assert 2.3 < report["conservative_criterion_crossing"]["root"] < 2.7
        assert report["criterion_crossing"]["tolerance"] == 1e-8

    def test_no_crossing_below_quarter_wave(self, config):
        service = SpectrumService(config, workers=1)
        report = service.crossings(3, [0.05 * i for i in range(1, 32)])
        assert all(entry is None for entry in report.values())


class TestDensity:
    def test_limit(self):
        assert density_limit(3) == pytest.approx(4 * math.pi)
        assert density_limit(3, DensityMode.MAXWELL) == pytest.approx(8 * math.pi / 3)
        assert energy_density(3, 0.05) == pytest.approx(4 * math.pi, rel=0.01)

    def test_cancellation_warning(self):
        with pytest.warns(CancellationWarning):
            energy_density(3, 5e-4)

    @pytest.mark.parametrize("mode,low,high", [
        (DensityMode.SCALAR, 1.8, 2.2),
        (DensityMode.MAXWELL, 1.7, 2.1),
        (DensityMode.MAXWELL_CONSERVATIVE, 1.7, 2.1),
    ])
    def test_half_max(self, mode, low, high):
        radius = half_max_radius(3, mode)
        assert low <= radius <= high

    def test_conservative_half_max_left_of_scalar(self):
        assert half_max_radius(3, DensityMode.MAXWELL_CONSERVATIVE) < half_max_radius(3, DensityMode.SCALAR)

    @pytest.mark.parametrize("mode", list(DensityMode))
    def test_decreasing(self, config, mode):
        service = SpectrumService(config, workers=1)
        curve = service.density_curve(3, np.linspace(0.1, 2.4, 47), mode)
        assert np.all(np.diff(curve) < 0)

    def test_half_max_is_convention_free(self):
        assert half_max_radius(3, DensityMode.SCALAR, PAPER) == pytest.approx(
            half_max_radius(3, DensityMode.SCALAR, ORACLE), abs=1e-7)


class TestSpectrumService:
    def test_table_shape_and_threads(self, config):
        radii = [0.5, 1.0, 1.5]
        one = SpectrumService(config, workers=1).build_table(3, radii, 3)
        four = SpectrumService(config, workers=4).build_table(3, radii, 3)
        assert one.values.shape == (3, 4)
        assert np.array_equal(one.values, four.values)
        assert one.value(0, 1.0) == pytest.approx(lambda_value(3, 0, 1.0))

    def test_table_uses_store(self, db_config):
        store = StoreService(db_config)
        service = SpectrumService(db_config, store=store, workers=1)
        first = service.build_table(3, [0.5, 1.0], 2)
        assert store.get_lambda(3, 1, 1.0, ORACLE) == pytest.approx(first.value(1, 1.0))
        again = service.build_table(3, [0.5, 1.0], 2)
        assert np.array_equal(first.values, again.values)
