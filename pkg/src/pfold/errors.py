"""Exception hierarchy shared by the solver modules."""


class PFoldError(Exception):
    """Base class for all package errors."""


class ParameterError(PFoldError, ValueError):
    """A problem parameter lies outside its admissible range."""


class DomainError(PFoldError, ValueError):
    """A nonlinearity was evaluated outside its domain (MEMS at t >= 1)."""


class ToleranceError(PFoldError, RuntimeError):
    """A numerical procedure failed to reach the requested tolerance.

    Attributes
    ----------
    achieved : float
        The error bound that was actually reached.
    """

    def __init__(self, message, achieved=float("nan")):
        super().__init__(message)
        self.achieved = achieved


class DivergenceError(PFoldError, ArithmeticError):
    """An integrand is not integrable near the origin."""


class QuenchError(PFoldError, RuntimeError):
    """A MEMS profile reached the singular value u = 1."""


class StiffnessError(PFoldError, RuntimeError):
    """The explicit integrator's step size underflowed."""


class BracketError(PFoldError, RuntimeError):
    """No sign change was found while bracketing a root."""


class RegimeError(PFoldError, ValueError):
    """An estimate was requested outside its dimension regime."""


class InvariantError(PFoldError, RuntimeError):
    """A structural invariant of an input profile is violated."""


class ConfigError(PFoldError, ValueError):
    """Invalid scenario configuration; carries the offending key path."""

    def __init__(self, key_path, message):
        super().__init__(f"{key_path}: {message}")
        self.key_path = key_path
