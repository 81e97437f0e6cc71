# -*- coding: utf-8 -*-


class GradSampleError(Exception):
    """Base class of every error raised by the package."""


class InvalidInputError(GradSampleError, ValueError):
    """Inputs violate a documented precondition (shape, finiteness, range)."""


class NumericalFailureError(GradSampleError):
    """An inner numerical routine did not converge or broke down."""


class SamplingExhaustedError(GradSampleError):
    """
    Too many sampled points fell outside the domain of the objective.

    The iterate is too close to the feasible boundary for the current sampling
    radius; the caller is expected to shrink the radius.
    """


class InfeasiblePointError(GradSampleError, ValueError):
    """A derivative was requested where the objective is not finite."""


class FunctionalUndefinedError(GradSampleError, ValueError):
    """A tail functional is undefined at the given parameters (e.g. ES with κ ≥ 1)."""


class SingularBlockError(NumericalFailureError):
    """A per-observation Jacobian block is not invertible."""

    def __init__(self, message: str, indices: tuple[int, ...] = ()) -> None:
        super().__init__(message)
        self.indices = indices


class ParseError(GradSampleError, ValueError):
    def __init__(self, message: str, line: int | None = None) -> None:
        super().__init__(message)
        self.line = line


class MissingColumnError(GradSampleError, KeyError):
    pass


class DegenerateDesignWarning(UserWarning):
    """A smoother received a covariate without spread."""


class ExtrapolationWarning(UserWarning):
    """Prediction requested outside the training covariate range."""


class NonConvergenceWarning(UserWarning):
    """An iterative routine stopped at its iteration cap."""
