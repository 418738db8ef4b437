import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abc_critic import (DomainError, LocationModel, QuadratureSpec, UnavailableError,
                        binomial_error_posterior, cauchy_integer_prior, flat_error_prior,
                        gaussian_error_prior, location_error_posterior, location_joint_density,
                        poisson_abc_mu_acceptance_rate, poisson_abc_theta_density,
                        poisson_error_posterior, poisson_evidence, poisson_xi_pmf,
                        prior_dominance_tv, uniform_integer_prior)

from oracles import (location_eps_posterior_quad, location_tv_to_prior,
                     poisson_evidence_quad, poisson_weights_exact)


class TestPoissonEvidence:
    @pytest.mark.parametrize("x0, expected", [(0, 0.5), (3, 1 / 16), (10, 2.0**-11)])
    def test_values(self, x0, expected):
        assert poisson_evidence(x0) == expected

    @pytest.mark.parametrize("x0", [0, 1, 4, 9])
    def test_matches_quadrature(self, x0):
        assert poisson_evidence(x0) == pytest.approx(poisson_evidence_quad(x0), rel=1e-9)

    @given(st.integers(0, 1000))
    def test_halving(self, x0):
        assert poisson_evidence(x0 + 1) / poisson_evidence(x0) == 0.5

    def test_negative(self):
        with pytest.raises(DomainError):
            poisson_evidence(-1)


class TestPoissonErrorPosterior:
    def test_unnormalised_weights_x0_zero(self):
        post = poisson_error_posterior(0)
        z = sum(poisson_weights_exact(0).values())
        ratio = post.pmf[:3] / post.pmf[0]
        np.testing.assert_allclose(ratio * 0.5, [1 / 2, 1 / 8, 1 / 40], rtol=1e-14)
        assert post.pmf[0] == pytest.approx(float(0.5 / z), rel=1e-14)

    @pytest.mark.parametrize("x0", [1, 2, 7, 30])
    def test_tie_between_minus_one_and_zero(self, x0):
        post = poisson_error_posterior(x0)
        assert post.mass_at(-1) == post.mass_at(0)

    @pytest.mark.parametrize("x0", [0, 2, 20])
    def test_matches_exact_rationals(self, x0):
        post = poisson_error_posterior(x0)
        w = poisson_weights_exact(x0)
        z = sum(w.values())
        exact = np.array([float(w[k] / z) for k in range(-x0, 201)])
        np.testing.assert_allclose(post.pmf, exact, rtol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 150))
    def test_normalised_and_support(self, x0):
        post = poisson_error_posterior(x0)
        assert post.support_lo == -x0 and post.support_hi == 200
        assert math.fsum(post.pmf) == pytest.approx(1.0, abs=1e-12)
        assert 0 <= post.tail_bound < 1e-60

    def test_truncation_must_exceed_x0(self):
        with pytest.raises(DomainError):
            poisson_error_posterior(5, K=5)


class TestBinomialErrorPosterior:
    def test_uniform(self):
        post = binomial_error_posterior(5, 2)
        assert np.all(post.pmf == 1 / 11)
        assert np.ptp(post.pmf) <= 1e-15
        assert post.mass_at(6) == 0.0

    def test_degenerate(self):
        post = binomial_error_posterior(0, 0)
        assert post.support.tolist() == [0] and post.pmf.tolist() == [1.0]

    @pytest.mark.parametrize("n, x0", [(5, 6), (5, -1)])
    def test_bad_x0(self, n, x0):
        with pytest.raises(DomainError):
            binomial_error_posterior(n, x0)


class TestLocationModel:
    def test_error_marginal_matches_closed_form(self):
        # Gaussian noise and prior: eps + x0 ~ N(mu, 1 + tau^2)
        model = LocationModel(0.5, 3.0)
        eps = np.linspace(-4, 4, 9)
        got = model.error_marginal(eps, 1.0)
        s = math.sqrt(1 + 9.0)
        ref = np.exp(-0.5 * ((eps + 1.0 - 0.5) / s) ** 2) / (s * math.sqrt(2 * math.pi))
        np.testing.assert_allclose(got, ref, atol=1e-10)

    def test_posterior_matches_scipy_quad(self):
        model = LocationModel(0.0, 2.0)
        prior = gaussian_error_prior(1.0)
        post = location_error_posterior(model, prior, 0.7)
        idx = [800, 1000, 1100]
        nodes = post.support[idx]
        assert nodes[1] == 0.0
        ours = post.density()[idx]
        ref = np.array([location_eps_posterior_quad(e, 0.7, 2.0) for e in nodes])
        np.testing.assert_allclose(ours / ours[1], ref / ref[1], rtol=1e-8)

    def test_flat_theta_prior_dominates(self):
        model = LocationModel(0.0, 100.0)
        prior = gaussian_error_prior(1.0)
        tv = prior_dominance_tv(location_error_posterior(model, prior, 0.0), prior)
        assert tv < 0.05
        assert tv == pytest.approx(location_tv_to_prior(100.0), abs=1e-6)

    def test_pinned_theta_collapses(self):
        model = LocationModel(0.0, 1e-6)
        prior = gaussian_error_prior(1.0)
        post = location_error_posterior(model, prior, 0.0)
        ref = np.exp(-post.support**2)  # f(eps) * pi(eps) with both N(0, 1)
        ref = ref * post.weights / np.sum(ref * post.weights)
        np.testing.assert_allclose(post.pmf, ref, atol=1e-9)

    def test_symmetric(self):
        post = location_error_posterior(LocationModel(0.0, 3.0), gaussian_error_prior(1.0), 0.0)
        np.testing.assert_allclose(post.pmf, post.pmf[::-1], atol=1e-15)

    def test_integer_prior_lattice(self):
        post = location_error_posterior(LocationModel(0.0, 2.0), uniform_integer_prior(3), 0.0)
        assert post.kind == "integer"
        assert post.support.tolist() == list(range(-3, 4))

    def test_monotone_flattening(self):
        prior = gaussian_error_prior(1.0)
        tvs = [prior_dominance_tv(location_error_posterior(LocationModel(0.0, t), prior, 0.4),
                                  prior) for t in (1.0, 10.0, 100.0)]
        assert tvs[0] > tvs[1] > tvs[2]

    def test_improper_prior_unavailable(self):
        with pytest.raises(UnavailableError):
            location_error_posterior(LocationModel(), flat_error_prior(), 0.0)

    def test_grid_must_cover_eight_sd(self):
        with pytest.raises(DomainError):
            location_error_posterior(LocationModel(0, 1), gaussian_error_prior(),
                                     0.0, grid=QuadratureSpec(-4, 4))


class TestJointDensity:
    def test_direct_product(self):
        model = LocationModel(0.0, 1.0)
        prior = gaussian_error_prior(1.0)
        phi0 = 1 / math.sqrt(2 * math.pi)
        assert location_joint_density(model, prior, 0.0, 0.0, 0.0) == pytest.approx(phi0**3)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2), st.floats(-2, 2))
    def test_likelihood_depends_on_difference(self, theta, eps, c, x0):
        model = LocationModel(0.3, 1.7)
        prior = gaussian_error_prior(0.8)
        r = (location_joint_density(model, prior, theta, eps, x0)
             / location_joint_density(model, prior, theta + c, eps + c, x0))
        pr = ((model.theta_density(theta) * prior.density(eps))
              / (model.theta_density(theta + c) * prior.density(eps + c)))
        assert r == pytest.approx(pr, rel=1e-12)

    def test_improper_prior_allowed(self):
        model = LocationModel()
        val = location_joint_density(model, flat_error_prior(), 0.0, 0.0, 0.0)
        assert val == pytest.approx(1 / (2 * math.pi))


class TestPoissonAbcOracles:
    def test_xi_pmf_is_translated_poisson(self):
        np.testing.assert_allclose(poisson_xi_pmf([-3, -2, 0], 3.0, 3),
                                   [math.exp(-3), 3 * math.exp(-3), 27 / 6 * math.exp(-3)])
        assert poisson_xi_pmf(-4, 3.0, 3) == 0.0

    def test_theta_density_integrates_to_one(self):
        from scipy import integrate
        prior = cauchy_integer_prior(200)
        val, _ = integrate.quad(lambda t: float(poisson_abc_theta_density(t, 2, prior)), 0, 60)
        assert val == pytest.approx(1.0, abs=1e-9)

    def test_acceptance_rate_point_mass_is_evidence(self):
        assert poisson_abc_mu_acceptance_rate(3, uniform_integer_prior(0)) == poisson_evidence(3)
