"""Generative-model abstraction consumed by the samplers and criticism tools.

A :class:`ModelSpec` bundles a parameter prior, a simulator, a summary
statistic and a discrepancy.  All callables are vectorised over a leading
batch axis so that samplers can push whole chunks of proposals through numpy:

* ``prior_sample(gen, size) -> (size, dim)``
* ``prior_density(params (..., dim)) -> (...)``
* ``simulate(gen, params (n, dim)) -> (n, ...)`` data
* ``summary(data (n, ...)) -> (n, s)``
* ``discrepancy(sim (n, s), obs (s,)) -> (n,)`` signed errors
* ``in_support(params (..., dim)) -> bool (...)``

The single-draw operations :func:`simulate_summary` and :func:`error_of` are
thin wrappers over the batch forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Literal

import numpy as np

from .exceptions import ContractError, DomainError
from .rng import RngLike, as_generator

ObservationSpace = Literal["discrete-integer", "continuous-real"]


def signed_difference(sim: np.ndarray, obs: np.ndarray) -> np.ndarray:
    """eps = S(x) - S(x0) for one-dimensional summaries."""
    sim = np.asarray(sim)
    obs = np.asarray(obs)
    if sim.shape[-1] != obs.shape[-1]:
        raise ContractError(
            f"summary length mismatch: {sim.shape[-1]} vs {obs.shape[-1]}")
    return (sim - obs)[..., 0]


def identity_summary(data: np.ndarray) -> np.ndarray:
    return np.asarray(data)[..., np.newaxis]


@dataclass(frozen=True)
class ModelSpec:
    id: str
    dim: int
    prior_sample: Callable[[np.random.Generator, int], np.ndarray]
    prior_density: Callable[[np.ndarray], np.ndarray]
    simulate: Callable[[np.random.Generator, np.ndarray], np.ndarray]
    in_support: Callable[[np.ndarray], np.ndarray]
    observation_space: ObservationSpace = "discrete-integer"
    summary: Callable[[np.ndarray], np.ndarray] = identity_summary
    discrepancy: Callable[[np.ndarray, np.ndarray], np.ndarray] = signed_difference

    @property
    def discrete(self) -> bool:
        return self.observation_space == "discrete-integer"

    @property
    def error_kind(self) -> str:
        return "integer" if self.discrete else "real"

    def check_params(self, params: np.ndarray) -> np.ndarray:
        params = np.asarray(params, dtype=float).reshape(-1, self.dim)
        if not np.all(np.isfinite(params)) or not np.all(self.in_support(params)):
            raise DomainError(f"parameter outside the support of model {self.id!r}")
        return params

    def simulate_errors(self, gen: np.random.Generator, params: np.ndarray,
                        obs: "Observation") -> np.ndarray:
        """Signed discrepancies of one simulated dataset per parameter row."""
        eps = self.discrepancy(self.summary(self.simulate(gen, params)), obs.summary)
        return np.rint(eps).astype(np.int64) if self.discrete else eps


@dataclass(frozen=True)
class ErrorValue:
    kind: Literal["integer", "real"]
    value: int | float

    def __post_init__(self):
        if self.kind == "integer" and int(self.value) != self.value:
            raise DomainError(f"integer error holds non-integer value {self.value}")
        if self.kind == "real" and not np.isfinite(self.value):
            raise DomainError("real error must be finite")

    def __neg__(self) -> "ErrorValue":
        return ErrorValue(self.kind, -self.value)

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class Observation:
    data: Any
    summary: np.ndarray

    @classmethod
    def from_data(cls, model: ModelSpec, data) -> "Observation":
        summ = np.asarray(model.summary(np.atleast_1d(data)), dtype=float)[0]
        if not np.all(np.isfinite(summ)):
            raise DomainError("observed summary is not finite")
        return cls(data=data, summary=summ)


def as_param(values) -> np.ndarray:
    return np.atleast_1d(np.asarray(values, dtype=float))


def simulate_summary(model: ModelSpec, param, rng: RngLike) -> np.ndarray:
    """Summary of one dataset simulated at ``param``."""
    params = model.check_params(as_param(param))
    gen = as_generator(rng)
    return np.asarray(model.summary(model.simulate(gen, params)), dtype=float)[0]


def error_of(model: ModelSpec, sim, obs) -> ErrorValue:
    """Discrepancy between a simulated and an observed summary."""
    sim = np.atleast_1d(np.asarray(sim, dtype=float))
    obs = np.atleast_1d(np.asarray(obs, dtype=float))
    if sim.shape != obs.shape:
        raise ContractError(f"summary length mismatch: {sim.shape} vs {obs.shape}")
    eps = float(model.discrepancy(sim[np.newaxis, :], obs)[0])
    if model.discrete:
        return ErrorValue("integer", int(round(eps)))
    return ErrorValue("real", eps)
