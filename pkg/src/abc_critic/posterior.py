"""Normalised distributions over the error parameter."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .exceptions import ContractError, DomainError
from .quadrature import trapezoid_weights


@dataclass(frozen=True, eq=False)
class ErrorPosterior:
    """Distribution of eps on a finite set of nodes.

    Integer posteriors hold a pmf on consecutive integers.  Real posteriors
    hold cell masses ``density * weights`` on a grid, where ``weights`` are
    the quadrature weights of that grid.  ``tail_bound`` is an upper bound on
    the normalised mass lost to truncation; it is bookkeeping only and never
    added to ``pmf``.
    """

    support: np.ndarray
    pmf: np.ndarray
    kind: Literal["integer", "real"] = "integer"
    tail_bound: float = 0.0
    weights: np.ndarray | None = None

    @classmethod
    def from_weights(cls, support, unnormalized, kind="integer", tail_bound=0.0,
                     weights=None) -> "ErrorPosterior":
        """Normalise ``unnormalized`` (densities for real kind) over ``support``.

        ``tail_bound`` is given on the same unnormalised scale and is divided
        by the normaliser.
        """
        support = np.asarray(support, dtype=np.int64 if kind == "integer" else float)
        w = np.asarray(unnormalized, dtype=float)
        if kind == "real":
            weights = trapezoid_weights(support) if weights is None else np.asarray(weights, float)
            w = w * weights
        if w.shape != support.shape:
            raise ContractError("weights and support differ in shape")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DomainError("posterior weights must be finite and non-negative")
        z = math.fsum(w)
        if z <= 0:
            raise DomainError("posterior weights sum to zero")
        return cls(support=support, pmf=w / z, kind=kind, tail_bound=tail_bound / z,
                   weights=weights)

    @property
    def support_lo(self):
        return self.support[0]

    @property
    def support_hi(self):
        return self.support[-1]

    def density(self) -> np.ndarray:
        """pmf for integer kind; density values at the nodes for real kind."""
        if self.kind == "integer":
            return self.pmf
        return self.pmf / self.weights

    def index_of(self, eps) -> int:
        if self.kind == "integer":
            hits = np.flatnonzero(self.support == eps)
        else:
            scale = max(1.0, float(np.max(np.abs(self.support))))
            hits = np.flatnonzero(np.abs(self.support - eps) <= 1e-9 * scale)
        if hits.size == 0:
            raise ContractError(f"eps={eps} is not a support node")
        return int(hits[0])

    def mass_at(self, eps) -> float:
        try:
            return float(self.pmf[self.index_of(eps)])
        except ContractError:
            return 0.0

    def mean(self) -> float:
        return float(np.sum(self.support * self.pmf))
