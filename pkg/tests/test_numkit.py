import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from wishartcond.numkit import (
    DOUBLE,
    ConvergenceError,
    NumericContext,
    Poly,
    QuadratureError,
    SignedLog,
    bessel_i,
    bessel_i_log,
    bessel_i_log_block,
    bessel_i_log_grid,
    gauss_legendre_rule,
    integrate_finite,
    integrate_semi_infinite,
    laguerre_coeff_fractions,
    laguerre_eval,
    log_factorials,
    log_gamma,
    pfq,
    pochhammer,
    pochhammer_int,
    poly_det,
    signed_log_sum,
    stirling2,
)


class TestSignedLog:
    def test_round_trip(self):
        for x in (3.25, -1e-7, 2.0, -123456.0):
            back = SignedLog.from_real(x).to_real()
            assert back == pytest.approx(x, rel=1e-15)

    def test_zero(self):
        z = SignedLog.from_real(0.0)
        assert z.sign == 0
        assert z.to_real() == 0.0

    def test_from_fraction_huge(self):
        # exact log of a rational far outside double range
        q = Fraction(10 ** 400, 7)
        got = SignedLog.from_fraction(q).logmag
        want = 400 * math.log(10) - math.log(7)
        assert got == pytest.approx(want, rel=1e-15)

    def test_arithmetic(self):
        a = SignedLog.from_real(6.0)
        b = SignedLog.from_real(-1.5)
        assert (a * b).to_real() == pytest.approx(-9.0, rel=1e-15)
        assert (a / b).to_real() == pytest.approx(-4.0, rel=1e-15)
        assert (a + b).to_real() == pytest.approx(4.5, rel=1e-15)
        assert (a - b).to_real() == pytest.approx(7.5, rel=1e-15)
        assert a.pow_int(3).to_real() == pytest.approx(216.0, rel=1e-14)
        assert a.pow_int(0).to_real() == 1.0
        assert (-b).sign == 1

    def test_scaled_by_log(self):
        a = SignedLog.from_real(2.0).scaled_by_log(700.0)
        assert a.logmag == pytest.approx(math.log(2.0) + 700.0)

    def test_invalid_sign(self):
        with pytest.raises(ValueError):
            SignedLog(2, 0.0)

    def test_inverse_of_zero(self):
        with pytest.raises(ZeroDivisionError):
            SignedLog.zero().inverse()

    def test_cancelling_sum(self):
        # compensated accumulation keeps the survivor accurate
        big = SignedLog.from_real(1e17)
        one = SignedLog.one()
        total = signed_log_sum([big, one, -big])
        assert total.to_real() == pytest.approx(1.0, rel=1e-10)

    def test_sum_to_zero(self):
        a = SignedLog.from_real(5.0)
        assert signed_log_sum([a, -a]).sign == 0


class TestCombinatorics:
    def test_pochhammer(self):
        assert pochhammer(3.0, 4).to_real() == pytest.approx(360.0, rel=1e-14)
        assert pochhammer(1.0, 0).to_real() == 1.0
        # (-2.5)(-1.5)(-0.5) < 0
        assert pochhammer(-2.5, 3).to_real() == pytest.approx(-1.875, rel=1e-14)

    def test_pochhammer_int(self):
        assert pochhammer_int(2, 3) == 24
        assert pochhammer_int(1, 5) == 120

    def test_stirling2(self):
        assert stirling2(4, 2) == 7
        assert stirling2(5, 3) == 25
        assert stirling2(6, 1) == 1
        assert stirling2(6, 6) == 1
        assert stirling2(3, 0) == 0
        assert stirling2(0, 0) == 1
        # recurrence S(p, q) = q S(p-1, q) + S(p-1, q-1)
        for p in range(2, 8):
            for q in range(1, p):
                assert stirling2(p, q) == q * stirling2(p - 1, q) + stirling2(p - 1, q - 1)

    def test_log_gamma(self):
        for x in (0.5, 1.0, 3.7, 40.0):
            assert log_gamma(x) == pytest.approx(math.lgamma(x), rel=1e-15)

    def test_log_factorials(self):
        table = log_factorials(6)
        for k in range(7):
            assert table[k] == pytest.approx(math.lgamma(k + 1), abs=1e-12)
        # table grows on demand and stays consistent
        assert log_factorials(25)[20] == pytest.approx(math.lgamma(21.0), rel=1e-14)


class TestLaguerre:
    def test_coeff_fractions(self):
        # x^0..x^2 coefficients of the degree-2, shift-1 polynomial
        assert laguerre_coeff_fractions(2, 1) == [Fraction(3), Fraction(-3), Fraction(1, 2)]

    def test_eval_matches_mpmath(self):
        for deg, rho, z in ((3, 0, 0.7), (4, 2, 2.5), (5, 1, 0.1)):
            got = laguerre_eval(deg, rho, z).to_real()
            want = float(mpmath.laguerre(deg, rho, z))
            assert got == pytest.approx(want, rel=1e-12)


class TestBessel:
    def test_log_values(self):
        for order in (0, 1, 2, 5):
            for z in (0.1, 1.0, 10.0, 80.0):
                want = float(mpmath.log(mpmath.besseli(order, z)))
                assert bessel_i_log(order, z) == pytest.approx(want, rel=1e-13)

    def test_at_zero(self):
        assert bessel_i(0, 0.0) == 1.0
        assert bessel_i(3, 0.0) == 0.0

    def test_grid_and_block_agree(self):
        zs = np.array([0.3, 2.0, 7.5])
        grid = bessel_i_log_grid([0, 1, 4], zs)
        block = bessel_i_log_block(4, zs)
        assert grid.shape == (3, 3)
        assert block.shape == (5, 3)
        for row, order in enumerate((0, 1, 4)):
            for col, z in enumerate(zs):
                want = bessel_i_log(order, float(z))
                assert grid[row, col] == pytest.approx(want, rel=1e-13)
                assert block[order, col] == pytest.approx(want, rel=1e-13)


class TestPfq:
    def test_exp(self):
        assert pfq((), (), 0.3) == pytest.approx(math.exp(0.3), rel=1e-14)

    def test_1f1(self):
        z = 0.8
        want = (math.exp(z) - 1.0) / z
        assert pfq((1.0,), (2.0,), z) == pytest.approx(want, rel=1e-14)

    def test_2f3_matches_mpmath(self):
        a, b, z = (1.5, 2.0), (2.5, 3.0, 1.0), 4.0
        want = float(mpmath.hyper(list(a), list(b), z))
        assert pfq(a, b, z) == pytest.approx(want, rel=1e-12)


class TestPoly:
    def test_product(self):
        one_plus_x = Poly([SignedLog.one(), SignedLog.one()])
        sq = one_plus_x * one_plus_x
        assert [c.to_real() for c in sq.coeffs] == pytest.approx([1.0, 2.0, 1.0])

    def test_eval_horner(self):
        p = Poly([SignedLog.from_real(c) for c in (2.0, -3.0, 1.0)])
        assert p.eval_horner(2.5).to_real() == pytest.approx(2.0 - 7.5 + 6.25, rel=1e-14)

    def test_negated_argument(self):
        p = Poly([SignedLog.from_real(c) for c in (1.0, 1.0, 1.0)])
        q = p.with_negated_argument()
        assert [c.to_real() for c in q.coeffs] == pytest.approx([1.0, -1.0, 1.0])

    def test_poly_det(self):
        x = Poly.monomial(1, SignedLog.one())
        one = Poly.one()
        det = poly_det([[x, one], [one, x]])  # x^2 - 1
        assert det.coeff(0).to_real() == pytest.approx(-1.0)
        assert det.coeff(1).sign == 0
        assert det.coeff(2).to_real() == pytest.approx(1.0)

    def test_trailing_zero_trim(self):
        p = Poly([SignedLog.one(), SignedLog.zero()])
        assert p.degree == 0


class TestQuadrature:
    def test_rule_basics(self):
        rule = gauss_legendre_rule(12)
        assert rule.weights.sum() == pytest.approx(2.0, rel=1e-14)
        with pytest.raises(ValueError):
            gauss_legendre_rule(0)

    def test_polynomial(self):
        got = integrate_finite(lambda x: x * x, 0.0, 1.0, rtol=1e-12)
        assert got == pytest.approx(1.0 / 3.0, rel=1e-13)

    def test_endpoint_singularity(self):
        got = integrate_finite(lambda x: 1.0 / math.sqrt(x), 0.0, 1.0, rtol=1e-9)
        assert got == pytest.approx(2.0, rel=1e-8)

    def test_vectorized(self):
        got = integrate_finite(lambda xs: np.exp(-xs), 0.0, 5.0, rtol=1e-12,
                               vectorized=True)
        assert got == pytest.approx(1.0 - math.exp(-5.0), rel=1e-12)

    def test_bad_interval(self):
        with pytest.raises(ValueError):
            integrate_finite(lambda x: x, 1.0, 1.0)
        with pytest.raises(ValueError):
            integrate_finite(lambda x: x, 0.0, math.inf)

    def test_semi_infinite(self):
        got = integrate_semi_infinite(lambda x: math.exp(-x), 1.0, rtol=1e-11)
        assert got == pytest.approx(1.0, rel=1e-10)
        got = integrate_semi_infinite(lambda x: x * math.exp(-2.0 * x), 2.0, rtol=1e-11)
        assert got == pytest.approx(0.25, rel=1e-10)
        with pytest.raises(ValueError):
            integrate_semi_infinite(lambda x: 0.0, 0.0)

    def test_error_hierarchy(self):
        assert issubclass(QuadratureError, ConvergenceError)
        assert issubclass(ConvergenceError, ArithmeticError)


class TestNumericContext:
    def test_extended_minimum(self):
        with pytest.raises(ValueError):
            NumericContext(10)

    def test_double_flag(self):
        assert not DOUBLE.extended
        assert NumericContext(35).extended
