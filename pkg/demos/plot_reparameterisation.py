"""
Reparameterising the error
==========================

Putting the prior on u = g(eps) instead of eps changes the answer unless
g is affine: the Jacobian enters the posterior squared, once from the prior
and once from the change of variable in the likelihood.
"""

from abc_critic import LocationModel, Transform, gaussian_error_prior, reparam_demo

model = LocationModel(0.0, 1.0)
prior = gaussian_error_prior(1.0)

for t in (Transform.identity(), Transform.affine(2.0, 1.0), Transform.cubic(0.1),
          Transform.cubic(1.0)):
    tv, _ = reparam_demo(model, prior, t, x0=0.0)
    print(f"{t.name:16s} TV between the two posteriors = {tv:.4f}")
