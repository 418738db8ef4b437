"""Exception hierarchy shared by all modules."""


class AbcCriticError(Exception):
    """Base class for errors raised by abc_critic."""


class DomainError(AbcCriticError, ValueError):
    """An argument lies outside the domain of the operation."""


class ContractError(AbcCriticError, ValueError):
    """Inputs are individually valid but inconsistent with each other."""


class UnavailableError(AbcCriticError, RuntimeError):
    """The quantity is undefined for this input (e.g. an improper prior)."""


class UnsupportedModelError(AbcCriticError, TypeError):
    """The operation does not apply to this kind of model."""
