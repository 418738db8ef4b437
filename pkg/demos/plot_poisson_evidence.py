"""
Evidence and tail-area p-value for the Poisson model
=====================================================

theta ~ Exp(1), x | theta ~ Poisson(theta).  The evidence of an observed
count x0 is 2^(-x0-1).  The error-posterior p-value decays much more slowly.
"""

import numpy as np

from abc_critic import (Observation, RngStream, evidence_exact_match, poisson_error_posterior,
                        poisson_evidence, poisson_exp_model, pvalue_tail)

model = poisson_exp_model()

# exact-match ABC: the acceptance rate is an unbiased evidence estimate
for x0 in range(5):
    est = evidence_exact_match(model, Observation.from_data(model, x0), 10**6,
                               RngStream(1, (x0,)))
    print(f"x0={x0}  exact={poisson_evidence(x0):.6f}  "
          f"estimate={est.value:.6f} +/- {est.std_error:.6f}")

# evidence against p-value over a range of counts
print()
print(" x0   log2 evidence   p-value   p-value (strict <)")
for x0 in range(0, 21, 2):
    post = poisson_error_posterior(x0)
    print(f"{x0:3d}   {np.log2(poisson_evidence(x0)):13.1f}   {pvalue_tail(post):.5f}   "
          f"{pvalue_tail(post, strict=True):.5f}")

# the inclusive tail gives 1 up to x0=4 and then falls monotonically;
# the strict version starts small and rises before falling
