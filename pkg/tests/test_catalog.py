import json
import math

import numpy as np
import pytest

from fdp import catalog
from fdp import curves

import oracles

GRID = np.linspace(0.0, 1.0, 10001)


class TestFamilies:

    def test_gdp_zero_is_identity(self):
        assert catalog.gdp(0)(0.3) == pytest.approx(0.7)
        np.testing.assert_allclose(catalog.gdp(0)(GRID), 1 - GRID, atol=1e-15)

    def test_gdp_value(self):
        assert catalog.gdp(1)(0.5) == pytest.approx(0.1586553, abs=1e-7)

    def test_gdp6_fixed_point(self):
        assert curves.fixed_point(catalog.gdp(6)) == pytest.approx(
            oracles.phi_cdf(-3), rel=1e-12)

    def test_negative_mu(self):
        with pytest.raises(ValueError):
            catalog.gdp(-0.1)
        with pytest.raises(ValueError):
            catalog.laplace(-1)

    @pytest.mark.parametrize('eps,delta,alpha,expected', [
        (0, 0.1, 0.5, 0.4), (1, 0, 0, 1.0), (3, 0.1, 0, 0.9)])
    def test_eps_delta_values(self, eps, delta, alpha, expected):
        assert catalog.eps_delta(eps, delta)(alpha) == pytest.approx(expected)

    @pytest.mark.parametrize('eps,delta', [(-1, 0), (1, -0.1), (1, 1.1)])
    def test_eps_delta_domain(self, eps, delta):
        with pytest.raises(ValueError):
            catalog.eps_delta(eps, delta)

    def test_eps_delta_slopes(self):
        f = catalog.eps_delta(1.5, 0.05)
        g = curves.to_grid(f)
        np.testing.assert_allclose(
            g.segment_slopes(), [-math.exp(1.5), -math.exp(-1.5), 0.0])
        assert f(0) == pytest.approx(0.95)

    @pytest.mark.parametrize('mu,alpha,expected', [
        (1, 0.5, math.exp(-1) / 2), (1, 0.1, 1 - math.e * 0.1), (0, 0.3, 0.7)])
    def test_laplace_values(self, mu, alpha, expected):
        assert catalog.laplace(mu)(alpha) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize('mu', [0.3, 1.0, 2.5])
    def test_laplace_against_cdf_oracle(self, mu):
        # F(F⁻¹(1-α) - μ) with the Laplace quantile solved by hand.
        for alpha in (0.01, 0.2, 0.45, 0.7):
            q = (math.log(2 * (1 - alpha)) if 1 - alpha < 0.5
                 else -math.log(2 * alpha))
            assert catalog.laplace(mu)(alpha) == pytest.approx(
                oracles.laplace_cdf(q - mu), abs=1e-12)

    @pytest.mark.parametrize('curve', [
        catalog.gdp(0.4), catalog.gdp(5), catalog.eps_delta(2, 0.2),
        catalog.laplace(1.5), catalog.point_mass_delta(0.3),
        catalog.identity()])
    def test_constructors_validate(self, curve):
        assert curves.validate(curve, 10001).is_valid

    def test_gdp_monotone_in_mu(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            a, b = sorted(rng.uniform(0, 4, size=2))
            assert np.all(catalog.gdp(b)(GRID) <= catalog.gdp(a)(GRID) + 1e-15)


class TestDiscretePair:

    def test_validation(self):
        with pytest.raises(ValueError):
            catalog.DiscretePair([0.5, 0.6], [0.5, 0.5])
        with pytest.raises(ValueError):
            catalog.DiscretePair([1.5, -0.5], [0.5, 0.5])
        with pytest.raises(ValueError):
            catalog.DiscretePair([1.0], [0.5, 0.5])

    def test_json_roundtrip(self):
        pair = catalog.DiscretePair([0.2, 0.8], [0.6, 0.4])
        back = catalog.DiscretePair.from_json(pair.to_json())
        np.testing.assert_array_equal(back.p, pair.p)
        assert set(json.loads(pair.to_json())) == {'p', 'q'}


class TestNeymanPearson:

    def test_identical_is_identity(self):
        g = catalog.from_discrete_pair(catalog.DiscretePair([.5, .5], [.5, .5]))
        np.testing.assert_allclose(g(GRID), 1 - GRID, atol=1e-15)

    def test_perfectly_distinguishable(self):
        g = catalog.from_discrete_pair(catalog.perfectly_distinguishable())
        assert np.all(g(GRID) == 0.0)

    def test_bernoulli_is_eps_delta(self):
        e = math.e
        pair = catalog.DiscretePair([e / (1 + e), 1 / (1 + e)],
                                    [1 / (1 + e), e / (1 + e)])
        g = catalog.from_discrete_pair(pair)
        np.testing.assert_allclose(g(GRID), catalog.eps_delta(1, 0)(GRID),
                                   atol=1e-12)
        pts = np.linspace(0, 1, 21)
        np.testing.assert_allclose(
            g(pts), oracles.brute_tradeoff(pair.p, pair.q, pts), atol=1e-12)

    def test_random_pairs_match_enumeration(self):
        rng = np.random.default_rng(42)
        pts = np.linspace(0, 1, 17)
        for _ in range(15):
            k = rng.integers(2, 5)
            p, q = rng.dirichlet(np.ones(k)), rng.dirichlet(np.ones(k))
            g = catalog.from_discrete_pair(catalog.DiscretePair(p, q))
            np.testing.assert_allclose(
                g(pts), oracles.brute_tradeoff(p, q, pts), atol=1e-12)

    def test_ties_and_zeros(self):
        # Two points share ratio 2; one point has p = q = 0.
        pair = catalog.DiscretePair([0.1, 0.2, 0.7, 0.0], [0.2, 0.4, 0.4, 0.0])
        g = catalog.from_discrete_pair(pair)
        pts = np.linspace(0, 1, 33)
        np.testing.assert_allclose(
            g(pts), oracles.brute_tradeoff(pair.p, pair.q, pts), atol=1e-12)
        assert curves.validate(g).is_valid

    def test_swapped_pair_gives_inverse(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
            pair = catalog.DiscretePair(p, q)
            f = catalog.from_discrete_pair(pair)
            g = catalog.from_discrete_pair(pair.swapped())
            np.testing.assert_allclose(f.inverse()(GRID), g(GRID), atol=1e-12)

    def test_post_processing_helps(self):
        rng = np.random.default_rng(42)
        for _ in range(30):
            k, j = rng.integers(2, 5), rng.integers(2, 5)
            p, q = rng.dirichlet(np.ones(k)), rng.dirichlet(np.ones(k))
            channel = rng.dirichlet(np.ones(j), size=k)
            f = catalog.from_discrete_pair(catalog.DiscretePair(p, q))
            g = catalog.from_discrete_pair(
                catalog.DiscretePair(p @ channel, q @ channel))
            assert np.all(g(GRID) >= f(GRID) - 1e-12)


class TestBinomialPair:

    def test_single_trial(self):
        pair = catalog.binomial_pair(1, 1.0)
        np.testing.assert_allclose(pair.p, [0.7310586, 0.2689414], atol=1e-7)
        np.testing.assert_allclose(pair.q, pair.p[::-1], atol=1e-15)

    def test_zero_eps(self):
        pair = catalog.binomial_pair(2, 0.0)
        np.testing.assert_allclose(pair.p, [0.25, 0.5, 0.25], atol=1e-15)
        np.testing.assert_allclose(pair.q, pair.p, atol=1e-15)

    def test_normalized(self):
        pair = catalog.binomial_pair(10, 1 / math.sqrt(10))
        assert math.fsum(pair.p) == pytest.approx(1, abs=1e-12)
        assert math.fsum(pair.q) == pytest.approx(1, abs=1e-12)

    def test_matches_comb(self):
        eps = 0.7
        prob = 1 / (1 + math.exp(eps))
        pair = catalog.binomial_pair(12, eps)
        np.testing.assert_allclose(pair.p, oracles.binomial_pmf(12, prob),
                                   rtol=1e-12)

    def test_large_n(self):
        pair = catalog.binomial_pair(10**6, 1e-3)
        assert np.all(np.isfinite(pair.p))
        assert math.fsum(pair.p) == pytest.approx(1, abs=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            catalog.binomial_pair(0, 1.0)
