"""Exception types raised across the package."""

import numpy as np


class InvalidArgumentError(ValueError):
    """An argument is outside the range an operation accepts."""


class ParseError(ValueError):
    """A dataset, graph or alignment file could not be parsed."""


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """A matrix expected to be positive definite is not."""


class SingularSystemError(np.linalg.LinAlgError):
    """A linear system has no unique solution."""


class DisconnectedGraphError(ValueError):
    """An operation needs a connected neighbor graph."""
