import math

import numpy as np
import pytest
from scipy import integrate, stats

from abc_critic import (DomainError, LocationModel, Observation, RngStream,
                        UnsupportedModelError, abc_mu_reject, abc_mu_smooth, abc_reject,
                        binomial_uniform_model, cauchy_integer_prior, gaussian_error_prior,
                        pilot_bound_rejection, point_mass_prior, poisson_abc_mu_acceptance_rate,
                        poisson_exp_model, uniform_integer_prior, xi_hat)
from abc_critic.samplers import epanechnikov_kernel, gaussian_kernel

from oracles import smoothed_poisson_eps_weights


@pytest.fixture(scope="module")
def poisson():
    return poisson_exp_model()


@pytest.fixture(scope="module")
def obs2(poisson):
    return Observation.from_data(poisson, 2)


def within(est, truth, se, k=3.0):
    return np.all(np.abs(np.asarray(est) - np.asarray(truth)) <= k * np.asarray(se))


class TestKernels:
    @pytest.mark.parametrize("kern", [gaussian_kernel, epanechnikov_kernel])
    @pytest.mark.parametrize("h", [0.1, 0.5, 2.0])
    def test_normalised(self, kern, h):
        val, _ = integrate.quad(lambda u: float(kern(u, h)), -20 * h, 20 * h, points=[-h, 0, h])
        assert val == pytest.approx(1.0, abs=1e-8)

    def test_mode_at_zero(self):
        u = np.linspace(-3, 3, 61)
        assert np.argmax(gaussian_kernel(u, 0.5)) == 30


class TestAbcReject:
    def test_infinite_tolerance_accepts_all(self, poisson, obs2):
        run = abc_reject(poisson, obs2, math.inf, 5000, RngStream(1))
        assert run.acceptance_rate == 1.0
        assert np.all(run.weights == 1)

    def test_exact_match_rate(self, poisson):
        obs = Observation.from_data(poisson, 1)
        N = 10**6
        run = abc_reject(poisson, obs, 0.0, N, RngStream(77))
        p = 0.25
        assert abs(run.acceptance_rate - p) <= 3 * math.sqrt(p * (1 - p) / N)
        assert np.all(run.errors == 0)

    def test_continuous_zero_tolerance(self):
        model = LocationModel().model
        run = abc_reject(model, Observation.from_data(model, 0.3), 0.0, 10_000, RngStream(0))
        assert run.acceptances == 0

    def test_needs_proposals(self, poisson, obs2):
        with pytest.raises(DomainError):
            abc_reject(poisson, obs2, 0.0, 0, RngStream(0))


class TestAbcMuReject:
    def test_point_mass_prior_reduces_to_exact_rejection(self, poisson, obs2):
        plain = abc_reject(poisson, obs2, 0.0, 200_000, RngStream(5))
        mu = abc_mu_reject(poisson, point_mass_prior(), obs2, 200_000, RngStream(5))
        assert np.array_equal(plain.thetas, mu.thetas)
        assert np.array_equal(plain.errors, mu.errors)

    def test_eps_marginal_matches_posterior(self, poisson, obs2):
        from abc_critic import poisson_error_posterior
        run = abc_mu_reject(poisson, cauchy_integer_prior(200), obs2, 400_000, RngStream(12))
        support = np.arange(-2, 8)
        freq, se = run.error_marginal(support)
        exact = [poisson_error_posterior(2).mass_at(k) for k in support]
        assert within(freq, exact, se)

    def test_acceptance_rate_consistency(self, poisson, obs2):
        prior = cauchy_integer_prior(200)
        N = 400_000
        run = abc_mu_reject(poisson, prior, obs2, N, RngStream(13))
        p = poisson_abc_mu_acceptance_rate(2, prior)
        assert abs(run.acceptance_rate - p) <= 3 * math.sqrt(p * (1 - p) / N)

    def test_binomial_flat_over_feasible_errors(self):
        n, x0 = 5, 2
        model = binomial_uniform_model(n)
        run = abc_mu_reject(model, uniform_integer_prior(n), Observation.from_data(model, x0),
                            300_000, RngStream(3))
        freq, se = run.error_marginal(np.arange(-x0, n - x0 + 1))
        assert within(freq, 1 / (n + 1), se)

    def test_continuous_unsupported(self):
        model = LocationModel().model
        with pytest.raises(UnsupportedModelError):
            abc_mu_reject(model, gaussian_error_prior(), Observation.from_data(model, 0.0),
                          10, RngStream(0))

    def test_real_prior_rejected_for_discrete_model(self, poisson, obs2):
        with pytest.raises(DomainError):
            abc_mu_reject(poisson, gaussian_error_prior(), obs2, 10, RngStream(0))


class TestAbcMuSmooth:
    def test_bad_bandwidth(self, poisson, obs2):
        with pytest.raises(DomainError):
            abc_mu_smooth(poisson, cauchy_integer_prior(), obs2, 0.0, 10, RngStream(0))

    def test_small_bandwidth_recovers_indicator(self, poisson, obs2):
        prior = cauchy_integer_prior(200)
        smooth = abc_mu_smooth(poisson, prior, obs2, 0.01, 50_000, RngStream(8))
        exact = abc_mu_reject(poisson, prior, obs2, 50_000, RngStream(8))
        w = smooth.weights / smooth.weights.max()
        hit = w > 0.5
        assert hit.sum() == exact.acceptances
        assert np.all(w[~hit] < 1e-300)
        assert np.array_equal(smooth.thetas[hit], exact.thetas)

    def test_weight_maximal_on_match(self, poisson, obs2):
        run = abc_mu_smooth(poisson, cauchy_integer_prior(), obs2, 0.5, 20_000, RngStream(2))
        assert run.weights.max() == pytest.approx(gaussian_kernel(0.0, 0.5))

    def test_retains_every_proposal(self, poisson, obs2):
        run = abc_mu_smooth(poisson, cauchy_integer_prior(), obs2, 0.5, 1234, RngStream(2))
        assert run.acceptances == 1234 and run.weighted

    def test_weighted_marginal_matches_smoothed_oracle(self, poisson, obs2):
        h = 0.25
        run = abc_mu_smooth(poisson, cauchy_integer_prior(200), obs2, h, 10**6, RngStream(31))
        support = np.arange(-2, 8)
        freq, se = run.error_marginal(support)
        assert within(freq, smoothed_poisson_eps_weights(support, 2, h), se)

    def test_continuous_model(self):
        loc = LocationModel(0.0, 1.0)
        run = abc_mu_smooth(loc.model, gaussian_error_prior(1.0), Observation.from_data(loc.model, 0.0),
                            0.3, 20_000, RngStream(4))
        assert np.all(run.weights > 0)


class TestXiHat:
    def test_single_replicate_is_one_bump(self, poisson):
        obs = Observation.from_data(poisson, 3)
        xi = xi_hat(poisson, 3.0, obs, 1, 0.5, RngStream(6))
        assert xi.centers.shape == (1,)
        c = xi.centers[0]
        assert xi.density(c) == pytest.approx(gaussian_kernel(0.0, 0.5))
        assert xi.density(c + 1.3) == pytest.approx(gaussian_kernel(1.3, 0.5))

    def test_integrates_to_one(self, poisson):
        obs = Observation.from_data(poisson, 3)
        xi = xi_hat(poisson, 3.0, obs, 50, 0.5, RngStream(6))
        val, _ = integrate.quad(lambda e: float(xi.density(e)), -30, 30, limit=200)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_density_at_zero_matches_smoothed_pmf(self, poisson):
        x0, theta, B, h = 3, 3.0, 10**5, 0.5
        obs = Observation.from_data(poisson, x0)
        xi = xi_hat(poisson, theta, obs, B, h, RngStream(99))
        js = np.arange(-x0, 60)
        exact = float(np.dot(stats.poisson.pmf(js + x0, theta), stats.norm.pdf(0 - js, scale=h)))
        terms = xi.kernel_values(0.0)
        se = terms.std(ddof=1) / math.sqrt(B)
        assert abs(xi.density(0.0) - exact) <= 3 * se

    @pytest.mark.parametrize("B, h", [(0, 0.5), (5, 0.0)])
    def test_bad_arguments(self, poisson, B, h):
        with pytest.raises(DomainError):
            xi_hat(poisson, 1.0, Observation.from_data(poisson, 1), B, h, RngStream(0))


class TestPilotBound:
    def test_c_is_pilot_max(self, poisson, obs2):
        run, rep = pilot_bound_rejection(poisson, cauchy_integer_prior(), obs2, 10, 500, 10, 0.5,
                                         RngStream(4))
        assert rep.C == rep.pilot_values.max()
        assert rep.fresh_evaluations == 500
        assert 0 <= rep.violations <= rep.fresh_evaluations
        assert run.proposals == 500

    def test_no_violation_when_envelope_holds(self):
        # n = 0 trials: every xi_hat value equals K_h(0), so C is exact
        model = binomial_uniform_model(0)
        run, rep = pilot_bound_rejection(model, point_mass_prior(), Observation.from_data(model, 0),
                                         3, 1000, 4, 0.5, RngStream(1))
        assert rep.violations == 0 and rep.violation_rate == 0.0
        assert run.acceptances == 1000

    def test_small_pilot_violates(self, poisson, obs2):
        hits = 0
        for s in range(10):
            _, rep = pilot_bound_rejection(poisson, cauchy_integer_prior(), obs2, 10, 2000, 10, 0.5,
                                           RngStream(100, (s,)))
            hits += rep.violations > 0
        assert hits > 0

    def test_bad_counts(self, poisson, obs2):
        with pytest.raises(DomainError):
            pilot_bound_rejection(poisson, cauchy_integer_prior(), obs2, 0, 10, 5, 0.5,
                                  RngStream(0))


class TestDeterminism:
    @pytest.mark.parametrize("workers", [1, 4, 8])
    def test_worker_count_does_not_matter(self, poisson, obs2, workers):
        prior = cauchy_integer_prior(200)
        N = 3 * 2**16 + 17
        ref = abc_mu_smooth(poisson, prior, obs2, 0.5, N, RngStream(42), workers=1)
        got = abc_mu_smooth(poisson, prior, obs2, 0.5, N, RngStream(42), workers=workers)
        assert ref.thetas.tobytes() == got.thetas.tobytes()
        assert ref.weights.tobytes() == got.weights.tobytes()
        a = abc_mu_reject(poisson, prior, obs2, N, RngStream(42), workers=1)
        b = abc_mu_reject(poisson, prior, obs2, N, RngStream(42), workers=workers)
        assert a.thetas.tobytes() == b.thetas.tobytes()

    def test_env_var_does_not_change_results(self, poisson, obs2, monkeypatch):
        ref = abc_reject(poisson, obs2, 0.0, 2**17 + 5, RngStream(3))
        monkeypatch.setenv("ABC_CRITIC_THREADS", "8")
        got = abc_reject(poisson, obs2, 0.0, 2**17 + 5, RngStream(3))
        assert ref.thetas.tobytes() == got.thetas.tobytes()
