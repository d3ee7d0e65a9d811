"""Tests for Hermite polynomials, discretized noise, and chaos samples.

Hermite oracle values were computed with sympy from the differentiation
definition (-1)^n/n! e^{x^2/2} d^n/dx^n e^{-x^2/2} and cross-checked
against the symbolic three-term recurrence; the exact rationals are
frozen below.  Gaussian moment oracles: E(xi^2-1)^2 = 2, E(xi^2-1)^4 = 60.
"""
import numpy as np
import pytest
from numpy.polynomial import hermite_e
from scipy.special import factorial

from fracwiener import GridFunction, StepFunction, TimeGrid
from fracwiener.chaos import (
    ChaosSample,
    DiscreteIsonormal,
    HermiteBasis,
    double_wiener_integral,
    hermite_poly,
    moment_ratio,
)

# (n, x) -> H_n(x), exact rationals from the symbolic oracle
HERMITE_ORACLE = {
    (4, -1.5): -29.0 / 128.0,
    (4, 0.25): 673.0 / 6144.0,
    (4, 1.4): -1537.0 / 7500.0,
    (7, -1.5): -155.0 / 14336.0,
    (7, 0.25): -80707.0 / 16515072.0,
    (7, 1.4): 108031.0 / 14062500.0,
    (10, -1.5): -6833.0 / 137625600.0,
    (10, 0.25): -693988559.0 / 3805072588800.0,
    (10, 1.4): 14098601.0 / 158203125000.0,
}

CHAOS2_RATIO = 60.0**0.25 / 2.0**0.5  # (E(xi^2-1)^4)^(1/4) / (E(xi^2-1)^2)^(1/2)
GAUSS_RATIO = 3.0**0.25


class TestHermitePoly:
    def test_order_zero(self):
        for x in (-3.0, 0.0, 2.5):
            assert hermite_poly(0, x) == 1.0

    def test_low_order_values(self):
        assert hermite_poly(1, 1.0) == pytest.approx(1.0, rel=1e-15)
        assert hermite_poly(2, 2.0) == pytest.approx(1.5, rel=1e-15)
        assert hermite_poly(3, 1.0) == pytest.approx(-1.0 / 3.0, rel=1e-15)

    @pytest.mark.parametrize("key", sorted(HERMITE_ORACLE))
    def test_symbolic_oracle(self, key):
        n, x = key
        assert hermite_poly(n, x) == pytest.approx(HERMITE_ORACLE[key], rel=1e-13)

    @pytest.mark.parametrize("n", range(11))
    def test_against_monic_hermite(self, n):
        # independent route: numpy's He_n divided by n!
        x = np.linspace(-4.0, 4.0, 33)
        coef = np.zeros(n + 1)
        coef[n] = 1.0
        ref = hermite_e.hermeval(x, coef) / factorial(n)
        assert np.allclose(hermite_poly(n, x), ref, rtol=1e-12, atol=1e-14)

    def test_recurrence_identity(self):
        x = np.linspace(-5.0, 5.0, 41)
        for n in range(1, 10):
            lhs = (n + 1) * hermite_poly(n + 1, x)
            rhs = x * hermite_poly(n, x) - hermite_poly(n - 1, x)
            assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-13)

    def test_shapes_and_domain(self):
        assert isinstance(hermite_poly(3, 1.0), float)
        assert hermite_poly(3, np.zeros((2, 5))).shape == (2, 5)
        with pytest.raises(ValueError):
            hermite_poly(-1, 0.0)


class TestHermiteBasis:
    def test_matches_single_evaluations(self):
        basis = HermiteBasis(6)
        x = np.linspace(-3.0, 3.0, 17)
        vals = basis.values(x)
        assert vals.shape == (7, 17)
        for n in range(7):
            assert np.allclose(vals[n], hermite_poly(n, x), rtol=1e-14)

    def test_constant_row(self):
        vals = HermiteBasis(4).values(np.array([-2.0, 0.0, 3.0]))
        assert np.all(vals[0] == 1.0)

    def test_domain(self):
        with pytest.raises(ValueError):
            HermiteBasis(-2)


class TestDiscreteIsonormal:
    def test_window_geometry(self):
        iso = DiscreteIsonormal.for_window(2.0, 128, seed=1)
        assert iso.grid.t0 == pytest.approx(-20.0)
        assert iso.grid.t_end == pytest.approx(2.0)
        assert iso.n_cells == 128
        with pytest.raises(ValueError):
            DiscreteIsonormal.for_window(-1.0, 16, seed=1)

    def test_deterministic_and_stream_separated(self):
        iso = DiscreteIsonormal.for_window(1.0, 32, seed=11)
        again = DiscreteIsonormal.for_window(1.0, 32, seed=11)
        assert np.array_equal(iso.increments(500), again.increments(500))
        other = DiscreteIsonormal.for_window(1.0, 32, seed=11, stream=1)
        assert not np.array_equal(iso.increments(500), other.increments(500))

    def test_thread_count_does_not_change_draws(self):
        iso = DiscreteIsonormal.for_window(1.0, 16, seed=2)
        a = iso.increments(10_000, threads=1)
        b = iso.increments(10_000, threads=7)
        assert np.array_equal(a, b)

    def test_inner_product_covariance(self):
        iso = DiscreteIsonormal.for_window(1.0, 96, seed=1234)
        y = iso.sample_points
        v1 = np.sin(y)
        v2 = np.exp(-np.abs(y))
        n = 150_000
        s1 = iso.first_order(v1, n).values
        s2 = iso.first_order(v2, n, threads=4).values
        target = float(v1 @ v2) * iso.grid.dt
        prod = s1 * s2
        se = np.std(prod, ddof=1) / np.sqrt(n)
        assert abs(np.mean(prod) - target) < 4 * se

    def test_first_order_sample(self):
        iso = DiscreteIsonormal.for_window(1.0, 48, seed=5)
        sample = iso.first_order(np.ones(48), 50_000)
        assert isinstance(sample, ChaosSample)
        assert sample.order == 1
        se = np.std(sample.values, ddof=1) / np.sqrt(sample.n_samples)
        assert abs(sample.mean()) < 4 * se

    def test_weight_coercion(self):
        iso = DiscreteIsonormal.for_window(1.0, 24, seed=5)
        gf = GridFunction(iso.grid, np.ones(24))
        a = iso.first_order(gf, 100).values
        b = iso.first_order(lambda y: np.ones_like(y), 100).values
        assert np.array_equal(a, b)
        with pytest.raises(ValueError):
            iso.first_order(GridFunction(TimeGrid(0.0, 0.5, 24), np.ones(24)), 10)
        with pytest.raises(ValueError):
            iso.first_order(np.ones(23), 10)


def _unit_indicator_iso(n_cells=256, seed=99):
    # window exactly [0, 1]; every cell carries kernel weight
    iso = DiscreteIsonormal(TimeGrid(0.0, 1.0 / n_cells, n_cells), seed=seed)
    e = np.ones(n_cells)
    e /= np.sqrt(e @ e * iso.grid.dt)
    return iso, e


class TestDoubleWienerIntegral:
    def test_zero_kernel(self):
        iso = DiscreteIsonormal.for_window(1.0, 16, seed=1)
        sample = double_wiener_integral(np.zeros((16, 16)), iso, 1000)
        assert sample.order == 2
        assert np.all(sample.values == 0.0)

    def test_rank_one_variance(self):
        iso, e = _unit_indicator_iso()
        sample = double_wiener_integral(np.outer(e, e), iso, 120_000, threads=4)
        se = np.sqrt(np.var(sample.values**2, ddof=1) / sample.n_samples)
        assert abs(sample.variance() - 2.0) < 3 * se + 2.0 / iso.n_cells
        mean_se = np.sqrt(sample.variance() / sample.n_samples)
        assert abs(sample.mean()) < 4 * mean_se

    def test_rank_one_distribution_ratio(self):
        iso, e = _unit_indicator_iso(seed=101)
        sample = double_wiener_integral(np.outer(e, e), iso, 120_000, threads=4)
        assert moment_ratio(sample, 4, 2) == pytest.approx(CHAOS2_RATIO, rel=0.02)

    def test_brute_force_variance_oracle(self):
        iso = DiscreteIsonormal.for_window(1.0, 16, seed=3)
        rng = np.random.default_rng(0)
        mat = rng.normal(size=(16, 16))
        mat = 0.5 * (mat + mat.T)
        dy = iso.grid.dt
        brute = 2.0 * sum(
            mat[i, j] ** 2 * dy * dy for i in range(16) for j in range(16) if i != j
        )
        sample = double_wiener_integral(mat, iso, 400_000, threads=4)
        se = np.sqrt(np.var(sample.values**2, ddof=1) / sample.n_samples)
        assert abs(sample.variance() - brute) < 3 * se

    def test_symmetrization_flag(self):
        iso = DiscreteIsonormal.for_window(1.0, 8, seed=4)
        rng = np.random.default_rng(1)
        mat = rng.normal(size=(8, 8))
        sample = double_wiener_integral(mat, iso, 2000)
        assert sample.meta.get("symmetrized") is True
        sym = double_wiener_integral(0.5 * (mat + mat.T), iso, 2000)
        assert sym.meta == {}
        assert np.array_equal(sample.values, sym.values)

    def test_callable_kernel(self):
        iso = DiscreteIsonormal.for_window(1.0, 12, seed=6)
        y = iso.sample_points
        fn = lambda a, b: np.exp(-np.abs(a - b))
        a = double_wiener_integral(fn, iso, 500).values
        b = double_wiener_integral(fn(y[:, None], y[None, :]), iso, 500).values
        assert np.array_equal(a, b)

    def test_uncorrelated_with_first_order(self):
        iso, e = _unit_indicator_iso(seed=7)
        n = 100_000
        second = double_wiener_integral(np.outer(e, e), iso, n, threads=4).values
        first = iso.first_order(np.cos(iso.sample_points), n, threads=4).values
        corr = np.corrcoef(first, second)[0, 1]
        assert abs(corr) < 4.0 / np.sqrt(n)

    def test_validation(self):
        iso = DiscreteIsonormal.for_window(1.0, 8, seed=4)
        with pytest.raises(ValueError):
            double_wiener_integral(np.zeros((4, 4)), iso, 10)
        bad = np.full((8, 8), np.nan)
        with pytest.raises(ValueError):
            double_wiener_integral(bad, iso, 10)

    def test_thread_invariance(self):
        iso, e = _unit_indicator_iso(n_cells=64, seed=8)
        a = double_wiener_integral(np.outer(e, e), iso, 9000, threads=1).values
        b = double_wiener_integral(np.outer(e, e), iso, 9000, threads=8).values
        assert np.array_equal(a, b)


class TestMomentRatio:
    def test_constant_sample(self):
        sample = ChaosSample(np.full(50, 3.7), order=0)
        assert moment_ratio(sample, 4, 2) == pytest.approx(1.0, rel=1e-13)

    def test_gaussian_fourth_to_second(self):
        rng = np.random.default_rng(314)
        xi = rng.standard_normal(200_000)
        assert moment_ratio(xi, 4, 2) == pytest.approx(GAUSS_RATIO, rel=0.01)

    def test_validation(self):
        with pytest.raises(ValueError):
            moment_ratio(np.ones(4), 0.0, 2.0)
        with pytest.raises(ValueError):
            moment_ratio(np.ones(4), 2.0, -1.0)
        with pytest.raises(ValueError):
            moment_ratio(np.array([]), 2.0, 4.0)
        with pytest.raises(ValueError, match="degenerate"):
            moment_ratio(np.zeros(10), 4.0, 2.0)

    def test_hypercontractive_bound_first_chaos(self):
        # affine functions of one Gaussian: ratio never exceeds 3^(1/4)
        iso = DiscreteIsonormal.for_window(1.0, 64, seed=21)
        n = 100_000
        base = iso.first_order(np.ones(64), n).values
        rng = np.random.default_rng(2)
        for _ in range(100):
            a0, a1 = rng.normal(size=2)
            if abs(a0) + abs(a1) < 1e-6:
                continue
            ratio = moment_ratio(a0 + a1 * base, 4, 2)
            assert ratio <= GAUSS_RATIO * 1.05

    def test_hypercontractive_bound_second_chaos(self):
        # mixed chaos <= 2 combinations stay below the order-2 constant 3
        iso, e = _unit_indicator_iso(n_cells=128, seed=22)
        n = 100_000
        first = iso.first_order(e, n, threads=4).values
        second = double_wiener_integral(np.outer(e, e), iso, n, threads=4).values
        rng = np.random.default_rng(3)
        for _ in range(100):
            a = rng.normal(size=3)
            if np.abs(a).sum() < 1e-6:
                continue
            combo = a[0] + a[1] * first + a[2] * second
            assert moment_ratio(combo, 4, 2) <= 3.0
