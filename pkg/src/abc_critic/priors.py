"""Priors on the error parameter eps.

Integer priors are normalised by direct summation over their (possibly
truncated) lattice; the heavy-tailed ``1/(1+k^2)`` prior on all integers is
cut at ``|k| <= K`` and carries a bound on the neglected tail mass.
Real-line priors are either Gaussian or improper flat.  Improper priors have
``log_normalizer = None`` and any operation that needs a normalised density
raises :class:`UnavailableError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .exceptions import DomainError, UnavailableError
from .rng import RngLike, as_generator

DEFAULT_TRUNCATION = 200

Support = Literal["all-integers", "integer-range", "real-line"]


@dataclass(frozen=True)
class ErrorPrior:
    """Prior on eps.

    For integer supports ``lo``/``hi`` are the lattice ends actually used
    (``-K``/``K`` for ``all-integers``).  ``tail_bound`` bounds the
    normalised mass dropped by truncation (0 when nothing is dropped).
    """

    name: str
    support: Support
    unnormalized_density: Callable[[np.ndarray], np.ndarray]
    lo: float = -math.inf
    hi: float = math.inf
    truncation: int | None = None
    log_normalizer: float | None = None
    tail_bound: float = 0.0
    # real-line only: location/scale used for sampling and default grids
    loc: float = 0.0
    scale: float = 1.0
    _cdf: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def kind(self) -> str:
        return "real" if self.support == "real-line" else "integer"

    @property
    def proper(self) -> bool:
        return self.log_normalizer is not None

    def _require_proper(self):
        if not self.proper:
            raise UnavailableError(f"prior {self.name!r} is improper; no normalised density")

    def points(self) -> np.ndarray:
        """Integer lattice carrying the (truncated) prior."""
        if self.kind != "integer":
            raise DomainError("real-line priors have no lattice")
        return np.arange(int(self.lo), int(self.hi) + 1)

    def in_support(self, eps) -> np.ndarray:
        eps = np.asarray(eps, dtype=float)
        inside = (eps >= self.lo) & (eps <= self.hi)
        if self.kind == "integer":
            inside &= eps == np.round(eps)
        return inside

    def density(self, eps) -> np.ndarray:
        """Normalised density (pmf on integer supports)."""
        self._require_proper()
        eps = np.asarray(eps, dtype=float)
        inside = self.in_support(eps)
        out = np.zeros(eps.shape)
        out[inside] = self.unnormalized_density(eps[inside]) / math.exp(self.log_normalizer)
        return out

    def pmf(self) -> np.ndarray:
        return self.density(self.points())

    def sample(self, rng: RngLike, size: int | None = None):
        """Draws from the normalised (truncated) prior."""
        self._require_proper()
        gen = as_generator(rng)
        n = 1 if size is None else size
        if self.kind == "integer":
            cdf = self._cdf if self._cdf is not None else np.cumsum(self.pmf())
            idx = np.searchsorted(cdf, gen.random(n), side="right")
            out = self.points()[np.minimum(idx, len(cdf) - 1)]
        else:
            out = gen.normal(self.loc, self.scale, n)
        return out[0] if size is None else out

    def grid(self, n: int = 2001, width: float = 12.0) -> np.ndarray:
        """Symmetric evaluation grid for real-line priors (odd ``n`` keeps the centre node)."""
        if self.kind != "real":
            return self.points().astype(float)
        if n % 2 == 0:
            n += 1
        return np.linspace(self.loc - width * self.scale, self.loc + width * self.scale, n)


def _lattice_prior(name, support, weights_fn, lo, hi, truncation=None, tail_bound=0.0):
    ks = np.arange(lo, hi + 1)
    z = math.fsum(weights_fn(ks.astype(float)))
    prior = ErrorPrior(name=name, support=support, unnormalized_density=weights_fn,
                       lo=lo, hi=hi, truncation=truncation,
                       log_normalizer=math.log(z), tail_bound=tail_bound / z)
    cdf = np.cumsum(prior.density(ks))
    cdf[-1] = 1.0
    object.__setattr__(prior, "_cdf", cdf)
    return prior


def _cauchy_weights(k):
    return 1.0 / (1.0 + np.asarray(k, dtype=float) ** 2)


def cauchy_tail_bound(K: int) -> float:
    """Upper bound on sum_{|k|>K} 1/(1+k^2), via 2 * int_K^inf dk/(1+k^2)."""
    return 2.0 * (math.pi / 2 - math.atan(K))


def cauchy_integer_prior(K: int = DEFAULT_TRUNCATION) -> ErrorPrior:
    """pi(k) proportional to 1/(1+k^2) on the integers, truncated to |k| <= K."""
    if K < 1:
        raise DomainError(f"truncation bound must be >= 1, got {K}")
    return _lattice_prior("cauchy-integer", "all-integers", _cauchy_weights, -K, K,
                          truncation=K, tail_bound=cauchy_tail_bound(K))


def cauchy_normalizer(K: int) -> float:
    """Z_K = sum_{|k|<=K} 1/(1+k^2)."""
    return math.fsum(_cauchy_weights(np.arange(-K, K + 1)))


def uniform_integer_prior(n: int) -> ErrorPrior:
    """Uniform prior on {-n, ..., n}."""
    if n < 0:
        raise DomainError(f"half-width must be >= 0, got {n}")
    return _lattice_prior(f"uniform-integer({n})", "integer-range",
                          lambda k: np.ones(np.shape(k)), -n, n)


def point_mass_prior() -> ErrorPrior:
    return uniform_integer_prior(0)


def gaussian_error_prior(scale: float = 1.0, loc: float = 0.0) -> ErrorPrior:
    if scale <= 0:
        raise DomainError("scale must be positive")

    def weights(e):
        return np.exp(-0.5 * ((np.asarray(e, dtype=float) - loc) / scale) ** 2)

    return ErrorPrior(name=f"gaussian({loc},{scale})", support="real-line",
                      unnormalized_density=weights,
                      log_normalizer=math.log(scale * math.sqrt(2 * math.pi)),
                      loc=loc, scale=scale)


def flat_error_prior() -> ErrorPrior:
    """Improper flat prior on the real line."""
    return ErrorPrior(name="flat", support="real-line",
                      unnormalized_density=lambda e: np.ones(np.shape(e)))


def integer_prior_from_weights(weights: Callable[[np.ndarray], np.ndarray], lo: int, hi: int,
                               name: str = "custom") -> ErrorPrior:
    """User-supplied unnormalised pmf on {lo, ..., hi}."""
    if hi < lo:
        raise DomainError("empty support")
    return _lattice_prior(name, "integer-range", weights, lo, hi)
