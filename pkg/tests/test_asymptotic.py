import math

import numpy as np
import pytest

from wishartcond.asymptotic import (
    ScaledParams,
    cdf_v_kappa_d_alpha0,
    cdf_v_kappa_d_interp,
    cdf_v_kappa_e_interp,
    normalization_v_kappa_d,
    normalization_v_kappa_e,
    pdf_v_kappa_d,
    pdf_v_kappa_d_grid,
    pdf_v_kappa_e,
    pdf_v_kappa_e_grid,
)


class TestScaledParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            ScaledParams(0.0, 1)
        with pytest.raises(ValueError):
            ScaledParams(-2.0, 0)
        with pytest.raises(ValueError):
            ScaledParams(1.0, -1)


class TestKappaDLimit:
    def test_alpha0_reference_point(self):
        # mu=1, v=1 sits at u=1 where the alpha=0 density is exactly e^{-1}
        got = pdf_v_kappa_d(1.0, ScaledParams(1.0, 0))
        assert got == pytest.approx(math.exp(-1.0), rel=1e-14)

    def test_grid_matches_scalar(self):
        p = ScaledParams(4.0, 1)
        vs = np.array([0.02, 0.1, 0.7, 3.0])
        grid = pdf_v_kappa_d_grid(vs, p)
        for v, g in zip(vs, grid):
            # batch evaluation shares one scaling shift, so only near-equality
            assert pdf_v_kappa_d(float(v), p) == pytest.approx(g, rel=1e-12)

    def test_outside_support(self):
        p = ScaledParams(1.0, 0)
        assert pdf_v_kappa_d(0.0, p) == 0.0
        assert pdf_v_kappa_d(-1.0, p) == 0.0
        got = pdf_v_kappa_d_grid(np.array([-1.0, 0.0, np.inf]), p)
        assert np.all(got == 0.0)

    def test_modes_agree(self):
        vs = np.linspace(0.02, 8.0, 60)
        for alpha in (1, 2):
            p = ScaledParams(1.0, alpha)
            a = pdf_v_kappa_d_grid(vs, p, mode="determinant")
            b = pdf_v_kappa_d_grid(vs, p, mode="closed")
            assert np.max(np.abs(a - b) / np.maximum(b, 1e-300)) < 1e-10

    def test_mode_validation(self):
        p = ScaledParams(1.0, 3)
        with pytest.raises(ValueError):
            pdf_v_kappa_d_grid(np.array([1.0]), p, mode="closed")
        with pytest.raises(ValueError):
            pdf_v_kappa_d_grid(np.array([1.0]), p, mode="wat")
        with pytest.raises(ValueError):
            pdf_v_kappa_d_grid(np.array([1.0]), ScaledParams(1.0, 7))

    def test_mu_covariance(self):
        # the mu in the scaling only relabels the axis: f_{4mu}(v/4) = 4 f_mu(v)
        ts = np.linspace(0.05, 4.0, 25)
        a = pdf_v_kappa_d_grid(ts / 4.0, ScaledParams(4.0, 1))
        b = pdf_v_kappa_d_grid(ts, ScaledParams(1.0, 1))
        assert np.max(np.abs(a - 4.0 * b) / np.maximum(4.0 * b, 1e-300)) < 1e-13

    def test_normalization(self):
        for alpha in (0, 1, 2):
            total = normalization_v_kappa_d(ScaledParams(1.0, alpha))
            assert total == pytest.approx(1.0, abs=1e-8)


class TestKappaDCdf:
    def test_closed_identity(self):
        # the alpha=0 CDF is a bare exponential in 1/(mu v)
        for mu in (0.25, 1.0, 4.0):
            for v in (0.05, 0.3, 1.0, 10.0):
                assert cdf_v_kappa_d_alpha0(v, mu) == pytest.approx(
                    math.exp(-1.0 / (mu * v)), rel=1e-15)

    def test_interp_matches_closed(self):
        p = ScaledParams(1.0, 0)
        cdf = cdf_v_kappa_d_interp(p)
        vs = np.linspace(0.02, 20.0, 300)
        want = np.array([cdf_v_kappa_d_alpha0(float(v), 1.0) for v in vs])
        assert np.max(np.abs(cdf(vs) - want)) < 2e-4

    def test_interp_shape(self):
        cdf = cdf_v_kappa_d_interp(ScaledParams(4.0, 1))
        vs = np.linspace(0.001, 30.0, 400)
        vals = cdf(vs)
        assert np.all(np.diff(vals) >= -1e-12)
        assert vals[0] < 1e-3
        assert vals[-1] > 0.97
        assert np.all((vals >= 0.0) & (vals <= 1.0))


class TestKappaELimit:
    def test_closed_vs_integral_alpha0(self):
        vs = np.linspace(0.01, 1.5, 40)
        p = ScaledParams(4.0, 0)
        a = pdf_v_kappa_e_grid(vs, p, mode="integral")
        b = pdf_v_kappa_e_grid(vs, p, mode="closed")
        assert np.max(np.abs(a - b) / np.maximum(b, 1e-300)) < 1e-7

    def test_outside_support(self):
        p = ScaledParams(1.0, 1)
        got = pdf_v_kappa_e_grid(np.array([-0.5, 0.0, np.inf]), p)
        assert np.all(got == 0.0)
        assert pdf_v_kappa_e(-1.0, p) == 0.0

    def test_mode_validation(self):
        with pytest.raises(ValueError):
            pdf_v_kappa_e_grid(np.array([1.0]), ScaledParams(1.0, 1), mode="closed")
        with pytest.raises(ValueError):
            pdf_v_kappa_e_grid(np.array([1.0]), ScaledParams(1.0, 0), mode="wat")
        with pytest.raises(ValueError):
            pdf_v_kappa_e_grid(np.array([1.0]), ScaledParams(1.0, 5))

    def test_mu_covariance(self):
        ts = np.linspace(0.02, 0.9, 12)
        a = pdf_v_kappa_e_grid(ts / 4.0, ScaledParams(4.0, 1))
        b = pdf_v_kappa_e_grid(ts, ScaledParams(1.0, 1))
        assert np.max(np.abs(a - 4.0 * b) / np.maximum(4.0 * b, 1e-300)) < 1e-9

    def test_normalization_alpha1(self):
        total = normalization_v_kappa_e(ScaledParams(4.0, 1))
        assert total == pytest.approx(1.0, abs=1e-7)

    def test_positive_in_bulk(self):
        p = ScaledParams(4.0, 2)
        vs = np.array([0.02, 0.05, 0.1, 0.3])
        assert np.all(pdf_v_kappa_e_grid(vs, p) > 0.0)


class TestKappaECdf:
    def test_interp_shape_alpha0(self):
        cdf = cdf_v_kappa_e_interp(ScaledParams(4.0, 0))
        vs = np.linspace(0.0005, 3.0, 300)
        vals = cdf(vs)
        assert np.all(np.diff(vals) >= -1e-12)
        assert vals[0] < 1e-3
        assert vals[-1] > 0.995
        assert np.all((vals >= 0.0) & (vals <= 1.0))
