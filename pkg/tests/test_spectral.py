import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.stats import kstest
from sklearn.base import clone

from kickedtop.errors import DomainError
from kickedtop.full import DisorderRealization, build_dense_floquet, parity_blocks
from kickedtop.spectral import (COE, POISSON, SpacingHistogram, Unfolder, eigenangle_density,
                                eigenangles, ks_distance, reference_cdf, reference_pdf,
                                sample_coe, smoothed_staircase, unfold)
from kickedtop.symmetric import TopParams


def poisson_angles(M, rng):
    gaps = rng.exponential(size=M)
    theta = np.cumsum(gaps) / gaps.sum() * 2 * np.pi - np.pi
    return np.sort(theta)


class TestEigenangles:
    def test_identity(self):
        np.testing.assert_array_equal(eigenangles(np.eye(5)), np.zeros(5))

    def test_diagonal(self):
        a = eigenangles(np.diag([1, 1j, -1, -1j]))
        np.testing.assert_allclose(a, [-np.pi / 2, 0, np.pi / 2, np.pi], atol=1e-15)
        assert np.all((a > -np.pi) & (a <= np.pi))

    def test_non_unitary(self):
        with pytest.raises(DomainError):
            eigenangles(np.diag([1.0, 1.1]))
        with pytest.raises(DomainError):
            eigenangles(np.ones((2, 3)))

    def test_parity_union(self):
        N = 6
        U = build_dense_floquet(TopParams(0.5, 4 * np.pi / 11, N),
                                DisorderRealization.draw(N, 8.0, 0))
        union = np.sort(np.concatenate([eigenangles(B) for B in parity_blocks(U, N)]))
        np.testing.assert_allclose(union, eigenangles(U), atol=1e-8)


class TestReference:
    @pytest.mark.parametrize("kind", [POISSON, COE])
    def test_normalized_unit_mean(self, kind):
        norm, _ = quad(lambda s: reference_pdf(kind, s), 0, np.inf, epsabs=1e-12)
        mean, _ = quad(lambda s: s * reference_pdf(kind, s), 0, np.inf, epsabs=1e-12)
        assert norm == pytest.approx(1, abs=1e-8)
        assert mean == pytest.approx(1, abs=1e-8)

    def test_values_at_zero(self):
        assert reference_pdf(POISSON, 0) == 1
        assert reference_pdf(COE, 0) == 0

    @pytest.mark.parametrize("kind", [POISSON, COE])
    def test_cdf_matches_pdf(self, kind):
        for s in (0.3, 1.0, 2.5):
            integral, _ = quad(lambda x: reference_pdf(kind, x), 0, s)
            assert reference_cdf(kind, s) == pytest.approx(integral, abs=1e-12)

    def test_errors(self):
        with pytest.raises(DomainError):
            reference_pdf(POISSON, -1)
        with pytest.raises(DomainError):
            reference_pdf("gue", 1)
        with pytest.raises(DomainError):
            reference_cdf("gue", 1)


class TestKS:
    def test_self_samples(self):
        rng = np.random.default_rng(0)
        assert ks_distance(rng.exponential(size=10**4), POISSON) < 0.02
        # Wigner surmise by inverse CDF
        u = rng.random(10**4)
        assert ks_distance(np.sqrt(-4 / np.pi * np.log1p(-u)), COE) < 0.02

    def test_constant_samples(self):
        d = ks_distance(np.ones(100), POISSON)
        assert d == pytest.approx(1 - np.exp(-1)) and d > 0.5

    def test_bounds_and_empty(self):
        assert 0 <= ks_distance(np.random.default_rng(1).random(50), COE) <= 1
        with pytest.raises(DomainError):
            ks_distance([], POISSON)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), power=st.floats(0.3, 3))
    def test_monotone_rescaling_invariant(self, seed, power):
        s = np.random.default_rng(seed).exponential(size=300)
        d = ks_distance(s, POISSON)
        # push samples and reference through g(s) = s**power
        moved = kstest(s**power, lambda x: reference_cdf(POISSON, x ** (1 / power))).statistic
        assert abs(moved - d) < 1e-12


class TestUnfold:
    def test_uniform(self):
        theta = np.linspace(-np.pi, np.pi, 200, endpoint=False) + 0.01
        s = unfold(theta)
        assert s.size == 200
        np.testing.assert_allclose(s, 1.0, atol=1e-9)
        assert unfold(theta, periodic=False).size == 199

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), M=st.integers(50, 400),
           window=st.integers(2, 40), periodic=st.booleans())
    def test_unit_mean(self, seed, M, window, periodic):
        theta = np.sort(np.random.default_rng(seed).uniform(-np.pi, np.pi, M))
        s = unfold(theta, window=window, periodic=periodic)
        assert abs(s.mean() - 1) < 1e-9
        assert np.all(s >= 0)

    def test_too_few_levels(self):
        with pytest.raises(DomainError):
            unfold(np.linspace(-3, 3, 49))

    def test_poisson_ensemble(self):
        rng = np.random.default_rng(7)
        s = unfold(poisson_angles(10**4, rng), window=80)
        assert kstest(s, lambda x: reference_cdf(POISSON, x)).pvalue > 0.01

    def test_coe_ensemble(self):
        rng = np.random.default_rng(3)
        spectra = [eigenangles(sample_coe(512, rng)) for _ in range(20)]
        assert ks_distance(Unfolder().transform(spectra), COE) < 0.03

    def test_coe_sampler_symmetric_unitary(self):
        U = sample_coe(64, np.random.default_rng(0))
        assert np.max(np.abs(U - U.T)) < 1e-12
        assert np.max(np.abs(U.conj().T @ U - np.eye(64))) < 1e-12

    def test_degenerate_levels(self):
        base = np.linspace(-np.pi, np.pi, 100, endpoint=False)
        theta = np.sort(np.concatenate([base, base[:20]]))
        kept = unfold(theta)
        assert kept.size == 120 and np.sum(kept < 1e-8) == 20
        collapsed = unfold(theta, collapse_degenerate=True)
        assert collapsed.size == 100
        np.testing.assert_allclose(collapsed, 1.0, atol=1e-9)

    def test_staircase_counts_levels(self):
        theta = np.sort(np.random.default_rng(2).uniform(-np.pi, np.pi, 300))
        at = np.array([-np.pi, np.pi])
        stair = smoothed_staircase(theta, at)
        assert stair[1] - stair[0] == pytest.approx(300, abs=1e-9)

    def test_staircase_local_density(self):
        # dense band on the left, sparse on the right: unfolding flattens both
        rng = np.random.default_rng(4)
        theta = np.sort(np.concatenate([rng.uniform(-np.pi, 0, 900), rng.uniform(0, np.pi, 100)]))
        s = unfold(theta, periodic=False)
        left, right = s[:850], s[-80:]
        assert abs(left.mean() - right.mean()) < 0.2


class TestUnfolder:
    def test_matches_function(self):
        rng = np.random.default_rng(0)
        a, b = poisson_angles(300, rng), poisson_angles(200, rng)
        pooled = Unfolder(window=20).fit([a, b]).transform([a, b])
        np.testing.assert_allclose(pooled, np.concatenate([unfold(a, 20), unfold(b, 20)]))
        np.testing.assert_allclose(Unfolder().fit_transform(a), unfold(a))

    def test_clone(self):
        u = Unfolder(window=40, collapse_degenerate=True)
        assert clone(u).get_params() == u.get_params()


class TestHistograms:
    def test_spacing_histogram(self):
        s = np.random.default_rng(0).exponential(size=5000)
        h = SpacingHistogram.from_spacings(s)
        assert h.density.size == 50 and h.edges[-1] == 4.0
        assert h.integral() == pytest.approx(1, abs=1e-6)
        assert h.count == 5000 and h.mean_spacing == pytest.approx(s.mean())
        np.testing.assert_allclose(h.centers[:2], [0.04, 0.12])

    def test_empty(self):
        with pytest.raises(DomainError):
            SpacingHistogram.from_spacings([])

    def test_uniform_density_flat(self):
        M, bins = 10**5, 50
        theta = np.random.default_rng(5).uniform(-np.pi, np.pi, M)
        edges, density = eigenangle_density(theta, bins)
        assert np.sum(density * np.diff(edges)) == pytest.approx(1)
        counts = density * np.diff(edges) * M
        p = 1 / bins
        assert np.all(np.abs(counts - M * p) < 4 * np.sqrt(M * p * (1 - p)))

    def test_bins_minimum(self):
        with pytest.raises(DomainError):
            eigenangle_density(np.zeros(10), bins=9)
