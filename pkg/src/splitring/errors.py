"""Exception types shared across the package."""
from __future__ import annotations


class SplitringError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParamError(SplitringError, ValueError):
    """A physical or numerical parameter is outside its admissible range."""


class SingularSystemError(SplitringError):
    """A linear system has no usable solution (singular or too ill-conditioned).

    Physically this signals an exactly resonant, lossless, fully-coupled ring
    for which no steady state exists.
    """


class NotUnitaryError(SplitringError):
    """A matrix required to be unitary fails the unitarity tolerance."""


class BranchAmbiguityError(SplitringError):
    """A matrix square root is ambiguous because an eigenvalue sits on the
    principal-branch cut (argument within tolerance of pi).  Perturb the
    backscatter phase or the round-trip phase to move off the cut."""


class NoConvergenceError(SplitringError):
    """An iterative computation hit its iteration cap before converging."""


class NoResonanceFoundError(SplitringError):
    """A spectrum is too flat to contain a usable resonance."""


class ConfigError(SplitringError):
    """A run configuration file or override is invalid."""
