"""
特殊函数测试
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from focusopt.numerics.specfun import BesselOrder, ball_volume, bessel_j, bessel_j_reference, surface_area
from focusopt.utils.errors import DomainError

HALF_ORDERS = [0.5, 1.5, 2.5, 3.5, 4.5]


class TestGeometry:
    def test_surface_area_low_dimensions(self):
        assert surface_area(2) == pytest.approx(2 * math.pi, rel=1e-15)
        assert surface_area(3) == pytest.approx(4 * math.pi, rel=1e-15)
        assert surface_area(4) == pytest.approx(2 * math.pi ** 2, rel=1e-15)

    def test_gamma_half_ladder(self):
        assert special.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
        assert special.gamma(1.5) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)

    @pytest.mark.parametrize("d", [1, 0, 2.5])
    def test_surface_area_rejects_bad_dimension(self, d):
        with pytest.raises(DomainError):
            surface_area(d)

    def test_ball_volume(self):
        assert ball_volume(3, 2.0) == pytest.approx(4 * math.pi * 8 / 3, rel=1e-15)
        assert ball_volume(2, 1.0) == pytest.approx(math.pi, rel=1e-15)
        with pytest.raises(DomainError):
            ball_volume(3, -1.0)


class TestBesselOrder:
    def test_half_integer_flag(self):
        assert BesselOrder(0.5).half_integer
        assert BesselOrder(4.5).half_integer
        assert not BesselOrder(1.0).half_integer
        assert not BesselOrder(0.0).half_integer
        assert not BesselOrder(0.25).half_integer

    def test_closed_form_cap(self):
        assert BesselOrder(10.5).closed_form
        assert not BesselOrder(11.5).closed_form

    def test_for_lambda(self):
        assert BesselOrder.for_lambda(3, 0).nu == 0.5
        assert BesselOrder.for_lambda(3, 2).nu == 2.5
        assert BesselOrder.for_lambda(2, 1).nu == 1.0

    def test_rejects_low_order(self):
        with pytest.raises(DomainError):
            BesselOrder(-0.5)


class TestBesselJ:
    def test_closed_forms(self):
        t = np.linspace(0.1, 20.0, 50)
        j_half = np.sqrt(2 / (math.pi * t)) * np.sin(t)
        j_three_halves = np.sqrt(2 / (math.pi * t)) * (np.sin(t) / t - np.cos(t))
        assert np.max(np.abs(bessel_j(0.5, t) - j_half)) < 1e-14
        assert np.max(np.abs(bessel_j(1.5, t) - j_three_halves)) < 1e-14

    @pytest.mark.parametrize("nu", HALF_ORDERS)
    def test_matches_reference(self, nu):
        t = np.linspace(0.05, 10.0, 200)
        assert np.max(np.abs(bessel_j(nu, t) - bessel_j_reference(nu, t))) <= 1e-10

    @pytest.mark.parametrize("nu", [0.0, 1.0, 2.0, 0.5, 3.5, 7.5])
    def test_matches_scipy(self, nu):
        t = np.linspace(0.0, 30.0, 121)
        assert np.max(np.abs(bessel_j(nu, t) - special.jv(nu, t))) <= 1e-10

    def test_zero_argument(self):
        assert bessel_j(0.0, 0.0) == 1.0
        assert bessel_j(0.5, 0.0) == 0.0
        assert bessel_j(2.5, 0.0) == 0.0

    def test_scalar_in_scalar_out(self):
        assert isinstance(bessel_j(0.5, 1.0), float)
        assert bessel_j(0.5, np.ones((2, 3))).shape == (2, 3)

    def test_negative_argument(self):
        with pytest.raises(DomainError):
            bessel_j(0.5, -1.0)

    @settings(max_examples=50, deadline=None)
    @given(r=st.floats(min_value=1e-3, max_value=math.pi / 2), k=st.sampled_from([0.5, 1.5, 2.5]))
    def test_ratio_bound(self, r, k):
        """0 < r ≤ π/2 时 J_{k+1}(r)/J_k(r) < r/(2k+1)"""
        assert bessel_j(k + 1, r) / bessel_j(k, r) < r / (2 * k + 1)

    @settings(max_examples=50, deadline=None)
    @given(t=st.floats(min_value=0.5, max_value=40.0), nu=st.sampled_from([1.5, 2.5, 3.5, 4.5]))
    def test_recurrence_identity(self, t, nu):
        """J_{ν−1}(t) + J_{ν+1}(t) = (2ν/t)·J_ν(t)"""
        lhs = bessel_j(nu - 1, t) + bessel_j(nu + 1, t)
        assert lhs == pytest.approx(2 * nu / t * bessel_j(nu, t), abs=1e-11)


class TestBesselReference:
    @pytest.mark.parametrize("nu", [0.0, 1.0] + HALF_ORDERS)
    def test_lattice_converges(self, nu):
        t = np.linspace(0.05, 10.0, 200)
        values = bessel_j_reference(nu, t)
        assert np.max(np.abs(values - special.jv(nu, t))) <= 1e-10

    @pytest.mark.parametrize("nu", [0.0, 0.25, 2.0, 4.5])
    def test_far_argument(self, nu):
        t = np.linspace(10.0, 50.0, 41)
        assert np.max(np.abs(bessel_j_reference(nu, t) - special.jv(nu, t))) <= 1e-10
