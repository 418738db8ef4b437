"""Model assessment: tail-area p-value on the error posterior, evidence and
Bayes factors from acceptance rates, posterior predictive checks, prior
dominance, and the reparameterisation comparison for error densities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .builtin import LocationModel
from .exceptions import ContractError, DomainError, UnavailableError, UnsupportedModelError
from .model import ModelSpec, Observation
from .posterior import ErrorPosterior
from .priors import ErrorPrior
from .quadrature import trapezoid_weights
from .rng import SIMULATE, RngStream, as_stream
from .samplers import abc_reject

# relative slack for the tie test mass <= mass(0); absorbs rounding only
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class EvidenceEstimate:
    value: float
    std_error: float
    proposals: int

    @classmethod
    def from_rate(cls, accepted: int, proposals: int) -> "EvidenceEstimate":
        p = accepted / proposals
        return cls(p, math.sqrt(p * (1 - p) / proposals), proposals)


@dataclass(frozen=True)
class CriticismReport:
    model_id: str
    pvalue: float
    evidence: EvidenceEstimate | float
    predictive_pvalue: float | None = None

    def __post_init__(self):
        for p in (self.pvalue, self.predictive_pvalue):
            if p is not None and not 0.0 <= p <= 1.0:
                raise DomainError(f"probability out of range: {p}")


def pvalue_tail(post: ErrorPosterior, strict: bool = False) -> float:
    """Posterior mass on error values no more probable than eps = 0.

    Inclusive comparison by default, so ties with the mass at 0 count
    towards the p-value.  For real-valued posteriors densities rather than
    cell masses are compared.  ``post.tail_bound`` is the uncertainty of the
    result due to truncation; it is not added in.
    """
    dens = post.density()
    d0 = dens[post.index_of(0)]
    if strict:
        mask = dens < d0 * (1 - TIE_RTOL)
    else:
        mask = dens <= d0 * (1 + TIE_RTOL)
    return min(1.0, math.fsum(post.pmf[mask]))


def evidence_exact_match(model: ModelSpec, obs: Observation, N: int,
                         rng: RngStream | int, workers: int | None = None) -> EvidenceEstimate:
    """m(x0) estimated by the acceptance rate of zero-tolerance rejection ABC."""
    if not model.discrete:
        raise UnsupportedModelError(
            "exact-match evidence is only defined for discrete observations")
    if N < 1:
        raise DomainError("no proposals")
    run = abc_reject(model, obs, 0.0, N, rng, workers=workers)
    return EvidenceEstimate.from_rate(run.acceptances, N)


def bayes_factor(a: EvidenceEstimate, b: EvidenceEstimate) -> tuple[float, float]:
    """a / b with a first-order delta-method standard error."""
    if not b.value > 0:
        raise UnavailableError("Bayes factor undefined: denominator evidence is zero")
    if a.value == 0:
        return 0.0, 0.0
    ratio = a.value / b.value
    rel = math.hypot(a.std_error / a.value, b.std_error / b.value)
    return ratio, ratio * rel


def posterior_predictive_pvalue(model: ModelSpec, posterior_thetas, obs: Observation,
                                rng: RngStream | int) -> float:
    """Two-sided predictive tail frequency of S(x0) under p(x | x0).

    One dataset is simulated per posterior draw.
    """
    thetas = np.asarray(posterior_thetas, dtype=float).reshape(-1, model.dim)
    if thetas.shape[0] == 0:
        raise ContractError("empty posterior sample")
    gen = as_stream(rng).substream(SIMULATE).generator()
    stats = np.asarray(model.summary(model.simulate(gen, thetas)), float)[:, 0]
    s0 = obs.summary[0]
    lower = np.mean(stats <= s0)
    upper = np.mean(stats >= s0)
    return float(min(1.0, 2 * min(lower, upper)))


def prior_as_posterior(prior: ErrorPrior, nodes=None) -> ErrorPosterior:
    """The prior itself, laid out as an ErrorPosterior on its lattice or on ``nodes``."""
    if not prior.proper:
        raise UnavailableError("improper prior has no normalised distribution")
    if prior.kind == "integer":
        ks = prior.points()
        return ErrorPosterior.from_weights(ks, prior.density(ks), "integer",
                                           tail_bound=prior.tail_bound)
    nodes = prior.grid() if nodes is None else np.asarray(nodes, float)
    return ErrorPosterior.from_weights(nodes, prior.density(nodes), "real")


def total_variation(p: ErrorPosterior, q: ErrorPosterior) -> float:
    """Half the L1 distance; integer supports are aligned on their union."""
    if p.kind != q.kind:
        raise ContractError("cannot compare integer and real error distributions")
    if p.kind == "integer":
        lo = min(p.support_lo, q.support_lo)
        hi = max(p.support_hi, q.support_hi)
        a = np.zeros(hi - lo + 1)
        b = np.zeros(hi - lo + 1)
        a[p.support - lo] = p.pmf
        b[q.support - lo] = q.pmf
        return 0.5 * math.fsum(np.abs(a - b))
    if p.support.shape != q.support.shape or not np.allclose(p.support, q.support,
                                                             rtol=0, atol=1e-12):
        raise ContractError("real error distributions must share a grid")
    return 0.5 * math.fsum(np.abs(p.pmf - q.pmf))


def prior_dominance_tv(post: ErrorPosterior, prior: ErrorPrior) -> float:
    """TV distance between an error posterior and the error prior."""
    if post.kind != prior.kind:
        raise ContractError("posterior and prior live on different error spaces")
    nodes = post.support if post.kind == "real" else None
    return total_variation(post, prior_as_posterior(prior, nodes))


# -- reparameterisation ------------------------------------------------------

@dataclass(frozen=True)
class Transform:
    """Monotone map u = forward(eps) with derivative du/deps."""

    forward: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "transform"

    @classmethod
    def affine(cls, scale: float = 2.0, shift: float = 1.0) -> "Transform":
        if scale == 0:
            raise DomainError("affine scale must be non-zero")
        return cls(lambda e: scale * np.asarray(e) + shift,
                   lambda e: np.full(np.shape(e), float(scale)),
                   lambda u: (np.asarray(u) - shift) / scale,
                   name=f"affine({scale},{shift})")

    @classmethod
    def cubic(cls, a: float = 1.0) -> "Transform":
        """u = eps + a eps^3, strictly increasing for a >= 0."""
        return cls(lambda e: np.asarray(e) + a * np.asarray(e) ** 3,
                   lambda e: 1 + 3 * a * np.asarray(e) ** 2,
                   name=f"cubic({a})")

    @classmethod
    def identity(cls) -> "Transform":
        return cls.affine(1.0, 0.0)

    def invert(self, u: np.ndarray, lo: float, hi: float) -> np.ndarray:
        if self.inverse is not None:
            return np.asarray(self.inverse(u), float)
        u = np.asarray(u, float)
        increasing = float(self.forward(hi)) > float(self.forward(lo))
        a = np.full(u.shape, float(lo))
        b = np.full(u.shape, float(hi))
        for _ in range(200):
            m = 0.5 * (a + b)
            below = (self.forward(m) < u) == increasing
            a = np.where(below, m, a)
            b = np.where(below, b, m)
            if np.all(b - a <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(m))):
                break
        return 0.5 * (a + b)


def reparam_demo(model: LocationModel, eprior: ErrorPrior, transform: Transform, x0: float,
                 affine: Transform | None = None, n_nodes: int = 4001) -> tuple[float, float]:
    """Compare two densities for u = T(eps) and return their TV distances.

    (a) Treat xi(eps | x0) and pi(eps) each as a density, transform both to
        u and renormalise their product; this picks up |deps/du|^2.
    (b) Push the normalised product density of eps forward to u, which picks
        up |deps/du| once.

    Returns ``(tv(transform), tv(affine))``; ``affine`` defaults to
    eps -> 2 eps + 1.
    """
    if eprior.kind != "real" or not eprior.proper:
        raise DomainError("reparameterisation demo needs a proper continuous eps prior")
    affine = Transform.affine() if affine is None else affine
    eps_nodes = eprior.grid(n_nodes)
    lo, hi = eps_nodes[0], eps_nodes[-1]

    # normalised product density in the original coordinate
    g_w = trapezoid_weights(eps_nodes)
    g_vals = model.error_marginal(eps_nodes, x0) * eprior.density(eps_nodes)
    g_norm = math.fsum(g_vals * g_w)

    def product(e):
        return model.error_marginal(e, x0) * eprior.density(e)

    def tv_for(t: Transform) -> float:
        d = np.asarray(t.derivative(eps_nodes), float)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise DomainError(f"{t.name} is not strictly monotone on the error range")
        ends = np.sort(np.asarray(t.forward(np.array([lo, hi])), float))
        u = np.linspace(ends[0], ends[1], n_nodes)
        e = t.invert(u, lo, hi)
        jac = 1.0 / np.abs(np.asarray(t.derivative(e), float))
        w = trapezoid_weights(u)
        a = product(e) * jac ** 2
        a /= math.fsum(a * w)
        b = product(e) / g_norm * jac
        return 0.5 * math.fsum(np.abs(a - b) * w)

    return tv_for(transform), tv_for(affine)
