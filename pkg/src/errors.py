"""
errors.py
Exception hierarchy shared by the solver modules and the CLI.

Every error raised on purpose by the library derives from ModelError so the
CLI can map it onto an exit code:

    NoBoundState (and EigenvalueNotBracketed) -> exit 2
    everything else                           -> exit 1
"""


class ModelError(Exception):
    """Base class for all deliberate library failures."""


class NonConvergence(ModelError):
    """Quadrature or iteration ran out of budget before meeting its tolerance."""


class InvalidBracket(ModelError):
    """A bracketing search was started on an interval that brackets nothing."""


class InvalidDegree(ModelError, ValueError):
    """The confluent hypergeometric series does not terminate (a > 0)."""


class InvalidQuantumNumbers(ModelError, ValueError):
    """Quantum numbers violate n >= 1, 0 <= l <= n - 1."""


class NoBoundState(ModelError):
    """The self-consistent equations have no solution for this state and coupling."""


class NotNormalized(ModelError, ValueError):
    """A radial density does not integrate to one."""


class BeyondCriticalCoupling(ModelError):
    """The Klein-Gordon level does not exist above alphaZ = l + 1/2."""


class DegenerateEpsilon(ModelError, ZeroDivisionError):
    """epsilon = 1 makes the angular-momentum coefficients singular."""


class EigenvalueNotBracketed(NoBoundState):
    """The shooting solver found no level with the requested node count."""


class GridTooSmall(ModelError):
    """The radial grid ends before the bound state has decayed."""


class IterationDiverged(ModelError):
    """The damped self-consistent iteration left [0, 1) or stopped being monotone."""
