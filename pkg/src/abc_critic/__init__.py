"""ABC with the tolerance treated as an inferable error parameter.

Error posteriors, tail-area p-values, evidence and Bayes factors from
acceptance rates, and closed-form oracle models for checking the samplers.
"""

__version__ = "0.1.0"

from .builtin import (LocationModel, binomial_error_posterior, binomial_uniform_model,
                      location_error_posterior, location_joint_density,
                      poisson_abc_mu_acceptance_rate, poisson_abc_theta_density,
                      poisson_error_posterior, poisson_evidence, poisson_exp_model,
                      poisson_xi_pmf)
from .criticism import (CriticismReport, EvidenceEstimate, Transform, bayes_factor,
                        evidence_exact_match, posterior_predictive_pvalue,
                        prior_dominance_tv, pvalue_tail, reparam_demo, total_variation)
from .exceptions import (AbcCriticError, ContractError, DomainError, UnavailableError,
                         UnsupportedModelError)
from .model import ErrorValue, ModelSpec, Observation, error_of, simulate_summary
from .posterior import ErrorPosterior
from .priors import (ErrorPrior, cauchy_integer_prior, flat_error_prior,
                     gaussian_error_prior, point_mass_prior, uniform_integer_prior)
from .quadrature import QuadratureSpec, adaptive_simpson
from .rng import RngStream
from .samplers import (AbcRun, PilotBoundReport, XiHat, abc_mu_reject, abc_mu_smooth,
                       abc_reject, pilot_bound_rejection, xi_hat)
