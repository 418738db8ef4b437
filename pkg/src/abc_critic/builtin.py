"""Closed-form oracle models.

* Poisson observation with an Exponential(1) rate prior.
* Binomial(n, theta) observation with a Uniform(0, 1) prior.
* Location family ``x ~ f(x - theta)`` with a Gaussian prior on theta.

Besides the :class:`ModelSpec` wiring, each model comes with the exact
quantities (evidence, error posterior, joint density) that the Monte Carlo
machinery is checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from .exceptions import DomainError, UnavailableError
from .model import ModelSpec
from .posterior import ErrorPosterior
from .priors import DEFAULT_TRUNCATION, ErrorPrior, cauchy_integer_prior
from .quadrature import QuadratureSpec, adaptive_simpson

SQRT_2PI = math.sqrt(2 * math.pi)


# -- Poisson / Exponential ---------------------------------------------------

def poisson_exp_model() -> ModelSpec:
    return ModelSpec(
        id="poisson-exp",
        dim=1,
        prior_sample=lambda gen, size: gen.exponential(1.0, size)[:, np.newaxis],
        prior_density=lambda p: np.where(np.asarray(p)[..., 0] >= 0,
                                         np.exp(-np.asarray(p)[..., 0]), 0.0),
        simulate=lambda gen, p: gen.poisson(p[:, 0]),
        in_support=lambda p: np.asarray(p)[..., 0] >= 0,
        observation_space="discrete-integer",
    )


def _check_count(x0, name="x0"):
    if x0 < 0 or int(x0) != x0:
        raise DomainError(f"{name} must be a non-negative integer, got {x0}")
    return int(x0)


def poisson_evidence(x0: int) -> float:
    """m(x0) = int e^{-theta} theta^x0 e^{-theta} / x0! dtheta = 2^{-x0-1}."""
    x0 = _check_count(x0)
    return math.ldexp(1.0, -x0 - 1)


def poisson_xi_pmf(eps, theta: float, x0: int) -> np.ndarray:
    """Law of eps = x - x0 when x ~ Poisson(theta): a translated Poisson pmf."""
    j = np.asarray(eps) + x0
    with np.errstate(divide="ignore"):
        logp = special.xlogy(j, theta) - theta - special.gammaln(np.maximum(j, 0) + 1)
    return np.where(j >= 0, np.exp(logp), 0.0)


def _poisson_weights(x0: int, prior: ErrorPrior, K: int):
    lo = max(-x0, int(prior.lo))
    hi = min(K, int(prior.hi))
    ks = np.arange(lo, hi + 1)
    # m(x0 + k) * pi(k); the power of two is exact in floating point
    w = np.ldexp(1.0, -(ks + x0 + 1)) * prior.unnormalized_density(ks.astype(float))
    return ks, w


def poisson_error_posterior(x0: int, K: int = DEFAULT_TRUNCATION,
                            prior: ErrorPrior | None = None) -> ErrorPosterior:
    """pi(eps | x0) proportional to 2^{-eps-x0-1} pi_eps(eps) on {-x0, ..., K}."""
    x0 = _check_count(x0)
    if K <= x0:
        raise DomainError(f"truncation K={K} must exceed x0={x0}")
    prior = cauchy_integer_prior(K) if prior is None else prior
    if prior.kind != "integer":
        raise DomainError("Poisson error posterior needs an integer prior")
    ks, w = _poisson_weights(x0, prior, K)
    tail = 0.0
    if prior.support == "all-integers":
        # sum_{k>K} 2^{-k-x0-1} / (1+k^2) <= 2^{-K-x0-1} / (1+(K+1)^2)
        tail = math.ldexp(1.0, -K - x0 - 1) / (1 + (K + 1) ** 2)
    return ErrorPosterior.from_weights(ks, w, "integer", tail_bound=tail)


def poisson_abc_mu_acceptance_rate(x0: int, prior: ErrorPrior) -> float:
    """Pr[x - x0 = eps] under theta ~ E(1), eps ~ prior: sum_k pi(k) 2^{-x0-k-1}."""
    x0 = _check_count(x0)
    ks = prior.points()
    ks = ks[ks >= -x0]
    return math.fsum(prior.density(ks) * np.ldexp(1.0, -(ks + x0 + 1)))


def poisson_abc_theta_density(theta, x0: int, prior: ErrorPrior) -> np.ndarray:
    """Normalised pi_ABC(theta) = pi(theta) sum_k pi_eps(k) xi(k | x0, theta) / rate."""
    theta = np.asarray(theta, dtype=float)
    ks = prior.points()
    ks = ks[ks >= -x0]
    pk = prior.density(ks)
    xi = poisson_xi_pmf(ks[:, np.newaxis], theta.ravel()[np.newaxis, :], x0)
    dens = np.exp(-theta.ravel()) * (pk @ xi)
    return (dens / poisson_abc_mu_acceptance_rate(x0, prior)).reshape(theta.shape)


# -- Binomial / Uniform ------------------------------------------------------

def binomial_uniform_model(n: int) -> ModelSpec:
    if n < 0 or int(n) != n:
        raise DomainError("n must be a non-negative integer")
    n = int(n)
    return ModelSpec(
        id=f"binomial-uniform({n})",
        dim=1,
        prior_sample=lambda gen, size: gen.random(size)[:, np.newaxis],
        prior_density=lambda p: (((np.asarray(p)[..., 0] >= 0)
                                  & (np.asarray(p)[..., 0] <= 1)).astype(float)),
        simulate=lambda gen, p: gen.binomial(n, p[:, 0]),
        in_support=lambda p: (np.asarray(p)[..., 0] >= 0) & (np.asarray(p)[..., 0] <= 1),
        observation_space="discrete-integer",
    )


def binomial_error_posterior(n: int, x0: int) -> ErrorPosterior:
    """Uniform 1/(1+2n) on {-n, ..., n}.

    This is the closed form obtained when eps + x0 is not clamped to
    [0, n]; a simulation-based posterior puts 1/(n+1) on {-x0, ..., n-x0}
    instead.  Both are flat, i.e. the data say nothing about eps.
    """
    n = _check_count(n, "n")
    x0 = _check_count(x0)
    if x0 > n:
        raise DomainError(f"x0={x0} outside [0, {n}]")
    ks = np.arange(-n, n + 1)
    return ErrorPosterior(support=ks, pmf=np.full(ks.size, 1.0 / (1 + 2 * n)), kind="integer")


# -- Location family ---------------------------------------------------------

def _std_normal_pdf(z):
    return np.exp(-0.5 * np.square(z)) / SQRT_2PI


@dataclass(frozen=True)
class LocationModel:
    """x0 ~ f(x - theta), theta ~ N(prior_mean, prior_sd^2)."""

    prior_mean: float = 0.0
    prior_sd: float = 1.0
    noise_density: Callable[[np.ndarray], np.ndarray] = _std_normal_pdf
    noise_sampler: Callable[[np.random.Generator, int], np.ndarray] = (
        lambda gen, size: gen.standard_normal(size))
    noise_scale: float = 1.0
    model: ModelSpec = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.prior_sd > 0:
            raise DomainError("prior_sd must be positive")
        mu, tau = self.prior_mean, self.prior_sd
        spec = ModelSpec(
            id=f"location({mu},{tau})",
            dim=1,
            prior_sample=lambda gen, size: gen.normal(mu, tau, size)[:, np.newaxis],
            prior_density=lambda p: self.theta_density(np.asarray(p)[..., 0]),
            simulate=lambda gen, p: p[:, 0] + self.noise_sampler(gen, p.shape[0]),
            in_support=lambda p: np.isfinite(np.asarray(p)[..., 0]),
            observation_space="continuous-real",
        )
        object.__setattr__(self, "model", spec)

    def theta_density(self, theta):
        z = (np.asarray(theta, dtype=float) - self.prior_mean) / self.prior_sd
        return _std_normal_pdf(z) / self.prior_sd

    def default_quadrature(self, abs_tol: float = 1e-10) -> QuadratureSpec:
        lo = self.prior_mean - 8 * self.prior_sd
        hi = self.prior_mean + 8 * self.prior_sd
        # panels no wider than half the noise scale, so f's bump is always resolved
        panels = max(16, math.ceil((hi - lo) / (0.5 * self.noise_scale)))
        return QuadratureSpec(lo, hi, abs_tol=abs_tol, panels=panels)

    def error_marginal(self, eps, x0: float, grid: QuadratureSpec | None = None) -> np.ndarray:
        """xi(eps | x0) = int f(eps + x0 - theta) pi(theta) dtheta, by adaptive Simpson."""
        grid = self.default_quadrature() if grid is None else grid
        lo, hi = self.prior_mean - 8 * self.prior_sd, self.prior_mean + 8 * self.prior_sd
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if grid.lo > lo + slack or grid.hi < hi - slack:
            raise DomainError("quadrature grid must cover prior_mean +/- 8 prior_sd")
        eps = np.asarray(eps, dtype=float)
        flat = eps.ravel() + x0
        out = adaptive_simpson(
            lambda t: self.noise_density(flat - t) * self.theta_density(t), grid)
        return out.reshape(eps.shape)


def _prior_values(prior: ErrorPrior, eps):
    if prior.proper:
        return prior.density(eps)
    return np.where(prior.in_support(eps), prior.unnormalized_density(np.asarray(eps, float)), 0.0)


def location_error_posterior(model: LocationModel, prior: ErrorPrior, x0: float,
                             grid: QuadratureSpec | None = None,
                             eps_nodes: np.ndarray | None = None) -> ErrorPosterior:
    """Error posterior pi(eps | x0) on the prior's lattice or evaluation grid."""
    if not prior.proper:
        raise UnavailableError("location error posterior needs a proper eps prior")
    nodes = prior.grid() if eps_nodes is None else np.asarray(eps_nodes, dtype=float)
    w = prior.density(nodes) * model.error_marginal(nodes, x0, grid)
    return ErrorPosterior.from_weights(nodes, w, prior.kind, tail_bound=0.0)


def location_joint_density(model: LocationModel, prior: ErrorPrior, theta, eps, x0: float):
    """Unnormalised joint posterior f(eps + x0 - theta) pi(theta) pi(eps)."""
    theta = np.asarray(theta, dtype=float)
    eps = np.asarray(eps, dtype=float)
    return (model.noise_density(eps + x0 - theta) * model.theta_density(theta)
            * _prior_values(prior, eps))
