"""Monte Carlo engines for ABC with an inferable error parameter.

All samplers process proposals in chunks of ``CHUNK_SIZE``.  Chunk ``c``
draws its parameters from ``stream.substream(THETA, c)``, its errors from
``substream(ERROR, c)`` and its simulations from ``substream(SIMULATE, c)``,
so results are bit-identical for any worker count and samplers sharing a
seed see the same theta and x draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .exceptions import DomainError, UnavailableError, UnsupportedModelError
from .model import ModelSpec, Observation
from .priors import ErrorPrior
from .rng import (ACCEPT, ERROR, PILOT, SIMULATE, THETA, RngStream, as_stream,
                  map_chunks)

DEFAULT_BANDWIDTH = 0.5


# -- kernels -----------------------------------------------------------------

def gaussian_kernel(u, h: float) -> np.ndarray:
    return np.exp(-0.5 * np.square(np.asarray(u, float) / h)) / (h * math.sqrt(2 * math.pi))


def epanechnikov_kernel(u, h: float) -> np.ndarray:
    z = np.asarray(u, float) / h
    return np.where(np.abs(z) < 1, 0.75 * (1 - z * z) / h, 0.0)


KERNELS: dict[str, Callable[[np.ndarray, float], np.ndarray]] = {
    "gaussian": gaussian_kernel,
    "epanechnikov": epanechnikov_kernel,
}


def get_kernel(name: str):
    try:
        return KERNELS[name]
    except KeyError:
        raise DomainError(f"unknown kernel {name!r}; choose from {sorted(KERNELS)}") from None


# -- results -----------------------------------------------------------------

@dataclass(eq=False)
class AbcRun:
    """Retained draws of a sampler.

    ``thetas`` has shape ``(m, dim)``; ``errors`` and ``weights`` shape
    ``(m,)``.  Rejection samplers store weight 1 for every accepted draw;
    weighted samplers keep every proposal with its raw kernel weight.
    """

    thetas: np.ndarray
    errors: np.ndarray
    weights: np.ndarray
    proposals: int
    master_seed: int
    weighted: bool = False

    @property
    def acceptances(self) -> int:
        return int(self.thetas.shape[0])

    @property
    def acceptance_rate(self) -> float:
        return self.acceptances / self.proposals

    @property
    def accepted(self) -> list[tuple[np.ndarray, float, float]]:
        return list(zip(self.thetas, self.errors.tolist(), self.weights.tolist()))

    def error_marginal(self, support) -> tuple[np.ndarray, np.ndarray]:
        """Weighted frequency of each integer ``support`` value and its standard error.

        The standard error is that of a self-normalised (ratio) estimator,
        which reduces to the binomial one for unit weights.
        """
        support = np.asarray(support)
        w = self.weights
        total = w.sum()
        idx = np.searchsorted(support, self.errors)
        hit = (idx < support.size) & (support[np.minimum(idx, support.size - 1)] == self.errors)
        mass = np.bincount(idx[hit], weights=w[hit], minlength=support.size)
        p = mass / total
        w2 = np.bincount(idx[hit], weights=w[hit] ** 2, minlength=support.size)
        # sum_i w_i^2 (1{e_i = k} - p_k)^2 = w2_k (1 - 2 p_k) + p_k^2 sum_i w_i^2
        var = (w2 * (1 - 2 * p) + p ** 2 * np.sum(w ** 2)) / total ** 2
        return p, np.sqrt(np.maximum(var, 0.0))


def _merge(parts, proposals, seed, weighted=False) -> AbcRun:
    return AbcRun(
        thetas=np.concatenate([p[0] for p in parts]),
        errors=np.concatenate([p[1] for p in parts]),
        weights=np.concatenate([p[2] for p in parts]),
        proposals=proposals,
        master_seed=seed,
        weighted=weighted,
    )


def _check_n(N):
    if N < 1:
        raise DomainError(f"need at least one proposal, got N={N}")


def _check_mu_prior(model: ModelSpec, eprior: ErrorPrior):
    if not eprior.proper:
        raise UnavailableError("ABC-mu sampling needs a proper eps prior")
    if model.discrete and eprior.kind != "integer":
        raise DomainError("discrete models need an integer eps prior")


# -- plain rejection ---------------------------------------------------------

def abc_reject(model: ModelSpec, obs: Observation, tolerance: float, N: int,
               rng: RngStream | int, workers: int | None = None) -> AbcRun:
    """Rejection ABC: keep theta ~ prior when |rho(S(x), S(x0))| <= tolerance."""
    _check_n(N)
    if tolerance < 0:
        raise DomainError("tolerance must be non-negative")
    stream = as_stream(rng)

    def chunk(c, size):
        theta = model.prior_sample(stream.substream(THETA, c).generator(), size)
        eps = model.simulate_errors(stream.substream(SIMULATE, c).generator(), theta, obs)
        keep = np.abs(eps) <= tolerance
        return theta[keep], eps[keep], np.ones(int(keep.sum()))

    return _merge(map_chunks(chunk, N, workers), N, stream.seed)


# -- error-augmented rejection ------------------------------------------------

def abc_mu_reject(model: ModelSpec, eprior: ErrorPrior, obs: Observation, N: int,
                  rng: RngStream | int, workers: int | None = None) -> AbcRun:
    """Exact-match sampler for the joint of (theta, eps).

    Each proposal draws theta ~ pi_theta, eps ~ pi_eps, x ~ f(.|theta) and is
    accepted iff rho(S(x), S(x0)) == eps, which targets the normalised product
    xi_{x0,theta}(eps) pi_eps(eps) pi_theta(theta).
    """
    if not model.discrete:
        raise UnsupportedModelError(
            "exact matching needs a discrete observation space; use abc_mu_smooth")
    _check_n(N)
    _check_mu_prior(model, eprior)
    stream = as_stream(rng)

    def chunk(c, size):
        theta = model.prior_sample(stream.substream(THETA, c).generator(), size)
        target = eprior.sample(stream.substream(ERROR, c).generator(), size)
        eps = model.simulate_errors(stream.substream(SIMULATE, c).generator(), theta, obs)
        keep = eps == target
        return theta[keep], target[keep], np.ones(int(keep.sum()))

    return _merge(map_chunks(chunk, N, workers), N, stream.seed)


def abc_mu_smooth(model: ModelSpec, eprior: ErrorPrior, obs: Observation, h: float, N: int,
                  rng: RngStream | int, kernel: str = "gaussian",
                  workers: int | None = None) -> AbcRun:
    """Kernel-weighted variant: every proposal kept with weight K_h(rho - eps).

    The weight uses a single simulated dataset per theta, so it is a
    smoothed indicator rather than an estimate of xi.
    """
    if not h > 0:
        raise DomainError(f"bandwidth must be positive, got {h}")
    _check_n(N)
    _check_mu_prior(model, eprior)
    kern = get_kernel(kernel)
    stream = as_stream(rng)

    def chunk(c, size):
        theta = model.prior_sample(stream.substream(THETA, c).generator(), size)
        target = eprior.sample(stream.substream(ERROR, c).generator(), size)
        rho = model.simulate_errors(stream.substream(SIMULATE, c).generator(), theta, obs)
        return theta, target, kern(rho - target, h)

    return _merge(map_chunks(chunk, N, workers), N, stream.seed, weighted=True)


# -- nonparametric xi estimate -------------------------------------------------

@dataclass(eq=False)
class XiHat:
    """Kernel estimate of the error distribution at a fixed theta."""

    theta: np.ndarray
    replicates: int
    bandwidth: float
    centers: np.ndarray
    kernel: str = "gaussian"
    _kern: Callable = field(init=False, repr=False)

    def __post_init__(self):
        self._kern = get_kernel(self.kernel)

    def density(self, eps) -> np.ndarray:
        eps = np.asarray(eps, dtype=float)
        vals = self._kern(eps[..., np.newaxis] - self.centers, self.bandwidth)
        return vals.mean(axis=-1)

    def kernel_values(self, eps: float) -> np.ndarray:
        """Per-replicate kernel terms at ``eps``; their mean is ``density(eps)``."""
        return self._kern(eps - self.centers, self.bandwidth)


def _simulate_replicates(model, gen, thetas, obs, B):
    """(n, B) discrepancies, B datasets per theta row."""
    rep = np.repeat(thetas, B, axis=0)
    return model.simulate_errors(gen, rep, obs).reshape(thetas.shape[0], B)


def xi_hat(model: ModelSpec, theta, obs: Observation, B: int, h: float,
           rng: RngStream | int, kernel: str = "gaussian") -> XiHat:
    """(1/B) sum_b K_h(eps - rho_b) from B datasets simulated at ``theta``."""
    if B < 1:
        raise DomainError("B must be >= 1")
    if not h > 0:
        raise DomainError("bandwidth must be positive")
    params = model.check_params(theta)
    stream = as_stream(rng)
    centers = _simulate_replicates(model, stream.substream(SIMULATE).generator(),
                                   params, obs, B)[0]
    return XiHat(theta=params[0], replicates=B, bandwidth=h,
                 centers=centers.astype(float), kernel=kernel)


# -- pilot-bound rejection ---------------------------------------------------

@dataclass(frozen=True)
class PilotBoundReport:
    C: float
    pilot_values: np.ndarray = field(repr=False)
    fresh_evaluations: int
    violations: int
    max_fresh: float

    @property
    def violation_rate(self) -> float:
        return self.violations / self.fresh_evaluations if self.fresh_evaluations else 0.0


def pilot_bound_rejection(model: ModelSpec, eprior: ErrorPrior, obs: Observation,
                          pilot: int, fresh: int, B: int, h: float,
                          rng: RngStream | int, kernel: str = "gaussian",
                          workers: int | None = None) -> tuple[AbcRun, PilotBoundReport]:
    """Rejection sampling from xi_hat * pi_eps * pi_theta with a pilot envelope.

    The envelope constant is C = max_i xi_hat(eps_i | theta_i) over ``pilot``
    prior draws (one statistic, so the min over statistics is the identity).
    Fresh proposals are accepted with probability min(1, xi_hat / C); every
    fresh value above C is counted as an envelope violation.
    """
    if pilot < 1 or fresh < 1:
        raise DomainError("pilot and fresh counts must be >= 1")
    if B < 1 or not h > 0:
        raise DomainError("need B >= 1 and h > 0")
    _check_mu_prior(model, eprior)
    kern = get_kernel(kernel)
    stream = as_stream(rng)

    def evaluate(sub: RngStream, size: int):
        theta = model.prior_sample(sub.substream(THETA).generator(), size)
        eps = eprior.sample(sub.substream(ERROR).generator(), size)
        rho = _simulate_replicates(model, sub.substream(SIMULATE).generator(), theta, obs, B)
        return theta, eps, kern(eps[:, np.newaxis] - rho, h).mean(axis=1)

    _, _, pilot_vals = evaluate(stream.substream(PILOT), pilot)
    C = float(pilot_vals.max())

    def chunk(c, size):
        sub = stream.substream(ACCEPT, c)
        theta, eps, vals = evaluate(sub, size)
        u = sub.substream(ACCEPT).generator().random(size)
        keep = u * C < vals
        return theta[keep], eps[keep], np.ones(int(keep.sum())), vals

    parts = map_chunks(chunk, fresh, workers, chunk=max(1, 2**16 // B))
    fresh_vals = np.concatenate([p[3] for p in parts])
    run = _merge([p[:3] for p in parts], fresh, stream.seed)
    report = PilotBoundReport(C=C, pilot_values=pilot_vals, fresh_evaluations=fresh,
                              violations=int(np.sum(fresh_vals > C)),
                              max_fresh=float(fresh_vals.max()))
    return run, report
