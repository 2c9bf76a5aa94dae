import numpy as np
import pytest

from wishartcond.exact import METRIC_KAPPA_D, METRIC_KAPPA_E, METRIC_LAMBDA_2, Dims
from wishartcond.sampler import (
    ComplexMatrix,
    McReport,
    SamplerError,
    build_report,
    gram_spectrum,
    jacobi_eigh,
    ks_compare,
    ks_threshold,
    mc_collect,
    sample_matrix,
)


class TestMatrixDraws:
    def test_deterministic_in_seed_and_index(self):
        d = Dims(4, 1)
        a = sample_matrix(d, seed=7, index=3).entries
        b = sample_matrix(d, seed=7, index=3).entries
        c = sample_matrix(d, seed=7, index=4).entries
        e = sample_matrix(d, seed=8, index=3).entries
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
        assert not np.array_equal(a, e)

    def test_shape(self):
        mat = sample_matrix(Dims(3, 2), seed=1)
        assert mat.entries.shape == (5, 3)
        assert mat.m == 5 and mat.n == 3

    def test_moments(self):
        # complex standard normal: E|z|^2 = 1, split evenly between parts
        z = sample_matrix(Dims(90, 0), seed=2).entries.ravel()
        assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, abs=0.03)
        assert np.var(z.real) == pytest.approx(0.5, abs=0.03)
        assert np.var(z.imag) == pytest.approx(0.5, abs=0.03)
        assert abs(np.mean(z)) < 0.03

    def test_entries_must_be_2d(self):
        with pytest.raises(ValueError):
            ComplexMatrix(np.zeros(4, dtype=complex))


class TestJacobi:
    def test_diagonal_passthrough(self):
        vals, vecs = jacobi_eigh(np.diag([3.0, 1.0, 2.0]).astype(complex))
        assert vals == pytest.approx([1.0, 2.0, 3.0])
        assert np.allclose(np.abs(vecs), np.eye(3)[:, [1, 2, 0]])

    def test_matches_library_eigensolver(self):
        rng = np.random.default_rng(5)
        a = rng.normal(size=(7, 7)) + 1j * rng.normal(size=(7, 7))
        herm = a @ a.conj().T
        vals, vecs = jacobi_eigh(herm)
        want = np.linalg.eigvalsh(herm)
        assert vals == pytest.approx(want, rel=1e-12)
        resid = np.linalg.norm(herm @ vecs - vecs * vals[None, :], axis=0)
        assert resid.max() <= 1e-10 * np.linalg.norm(herm, 2)

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            jacobi_eigh(np.zeros((2, 3), dtype=complex))


class TestGramSpectrum:
    def test_matches_library(self):
        mat = sample_matrix(Dims(4, 2), seed=9)
        spec = gram_spectrum(mat)
        gram = mat.entries.conj().T @ mat.entries
        want = np.linalg.eigvalsh(gram)
        assert spec.values == pytest.approx(want, rel=1e-10)
        assert spec.dims.n == 4 and spec.dims.alpha == 2

    def test_needs_tall_matrix(self):
        wide = ComplexMatrix(np.zeros((2, 5), dtype=complex))
        with pytest.raises(ValueError):
            gram_spectrum(wide)


class TestMcCollect:
    def test_deterministic_and_schedule_invariant(self):
        d = Dims(3, 1)
        base = mc_collect(METRIC_KAPPA_D, d, 600, seed=21)
        again = mc_collect(METRIC_KAPPA_D, d, 600, seed=21)
        chunked = mc_collect(METRIC_KAPPA_D, d, 600, seed=21, chunk=113)
        threaded = mc_collect(METRIC_KAPPA_D, d, 600, seed=21, workers=3)
        assert np.array_equal(base, again)
        assert np.array_equal(base, chunked)
        assert np.array_equal(base, threaded)

    def test_metric_inequalities(self):
        d = Dims(4, 0)
        kd = mc_collect(METRIC_KAPPA_D, d, 300, seed=33)
        ke = mc_collect(METRIC_KAPPA_E, d, 300, seed=33)
        l2 = mc_collect(METRIC_LAMBDA_2, d, 300, seed=33)
        lmin = mc_collect("lambda-min", d, 300, seed=33)
        assert np.all(kd >= d.n - 1e-9)
        assert np.all(ke <= kd + 1e-9)
        assert np.all(l2 >= lmin - 1e-12)

    def test_debug_mode(self):
        got = mc_collect(METRIC_KAPPA_D, Dims(3, 0), 40, seed=2, debug=True)
        assert got.shape == (40,)

    def test_validation(self):
        with pytest.raises(ValueError):
            mc_collect("wat", Dims(3, 0), 10, seed=1)
        with pytest.raises(ValueError):
            mc_collect(METRIC_KAPPA_D, Dims(3, 0), 0, seed=1)
        with pytest.raises(ValueError):
            mc_collect(METRIC_KAPPA_E, Dims(1, 0), 10, seed=1)


class TestKs:
    def test_exponential_draws(self):
        rng = np.random.default_rng(12)
        draws = rng.exponential(size=4000)
        stat = ks_compare(draws, lambda x: 1.0 - np.exp(-np.asarray(x)))
        assert stat < ks_threshold(len(draws))

    def test_wrong_distribution_detected(self):
        rng = np.random.default_rng(12)
        draws = rng.exponential(size=4000) * 1.6
        stat = ks_compare(draws, lambda x: 1.0 - np.exp(-np.asarray(x)))
        assert stat > ks_threshold(len(draws))

    def test_threshold_value(self):
        assert ks_threshold(100_000) == pytest.approx(1.63 / np.sqrt(100_000))

    def test_rejects_nonmonotone_cdf(self):
        draws = np.linspace(0.1, 0.9, 50)
        with pytest.raises(ValueError):
            ks_compare(draws, lambda x: np.cos(np.asarray(x) * 20.0))


class TestReports:
    def test_build_report(self):
        rng = np.random.default_rng(8)
        draws = rng.exponential(size=2000)
        rep = build_report(METRIC_KAPPA_D, Dims(3, 0), draws, seed=8,
                           cdf=lambda x: 1.0 - np.exp(-np.asarray(x)), bins=40)
        assert isinstance(rep, McReport)
        assert rep.samples == 2000
        assert len(rep.edges) == 41
        assert len(rep.masses) == 40
        assert rep.masses.sum() == pytest.approx(1.0, abs=1e-12)
        assert rep.passed == (rep.ks_statistic < rep.ks_threshold)

    def test_threshold_override(self):
        draws = np.linspace(0.01, 0.99, 500)
        rep = build_report(METRIC_KAPPA_D, Dims(3, 0), draws, seed=1,
                           cdf=lambda x: np.clip(np.asarray(x), 0.0, 1.0),
                           threshold=0.5)
        assert rep.ks_threshold == 0.5
        assert rep.passed


class TestAgainstExactDensity:
    def test_small_case_agrees(self):
        from wishartcond.exact import cdf_kappa_d_interp

        d = Dims(3, 0)
        draws = mc_collect(METRIC_KAPPA_D, d, 5000, seed=17)
        cdf = cdf_kappa_d_interp(d, float(draws.max()) * (1.0 + 1e-9))
        assert ks_compare(draws, cdf) < ks_threshold(5000)
