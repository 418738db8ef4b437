"""
Pilot bounds are not upper bounds
=================================

A rejection sampler on the B-replicate kernel estimate needs a bound C.
Taking C as the largest value seen in a small pilot run looks tempting,
but fresh proposals regularly exceed it.
"""

from abc_critic import (Observation, RngStream, cauchy_integer_prior, pilot_bound_rejection,
                        poisson_exp_model)

model = poisson_exp_model()
prior = cauchy_integer_prior(200)
obs = Observation.from_data(model, 2)

hit = 0
for i in range(20):
    run, report = pilot_bound_rejection(model, prior, obs, pilot=10, fresh=5000, B=10, h=0.5,
                                        rng=RngStream(99, (i,)))
    hit += report.violations > 0
    print(f"seed {i:2d}: C={report.C:.3f}  max fresh={report.max_fresh:.3f}  "
          f"violations={report.violations}")
print(f"{hit}/20 pilot bounds were exceeded")
