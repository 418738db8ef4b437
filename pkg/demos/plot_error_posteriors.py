"""
Error posteriors in three small models
======================================

The posterior on the signed error eps = x - x0 can say a lot, a little,
or nothing, depending on the model.
"""

import numpy as np

from abc_critic import (LocationModel, binomial_error_posterior, cauchy_integer_prior,
                        gaussian_error_prior, location_error_posterior,
                        poisson_error_posterior, prior_dominance_tv)

# Poisson: a Cauchy-like integer prior tilted by the geometric evidence term
post = poisson_error_posterior(3)
mass = {k: post.mass_at(k) for k in range(-3, 5)}
print("Poisson x0=3:", {k: round(v, 4) for k, v in mass.items()})
print("  posterior mean", round(post.mean(), 3),
      " TV to prior", round(prior_dominance_tv(post, cauchy_integer_prior(200)), 3))

# Binomial with a uniform parameter: the error posterior is flat
post = binomial_error_posterior(5, 2)
print("Binomial n=5:", np.round(post.pmf, 4))

# Location family: with a very flat parameter prior the data say nothing about eps
prior = gaussian_error_prior(1.0)
for tau in (1.0, 10.0, 100.0):
    post = location_error_posterior(LocationModel(0.0, tau), prior, 0.0)
    print(f"location tau={tau:5.0f}: TV(posterior, prior) = "
          f"{prior_dominance_tv(post, prior):.2e}")
