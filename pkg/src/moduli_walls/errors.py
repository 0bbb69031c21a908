"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
1 for usage or validation problems, 2 for infeasible or unsupported input
and 3 for numerical failure.
"""


class ModuliWallsError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class ValidationError(ModuliWallsError, ValueError):
    """Input violates a documented precondition."""

    exit_code = 1


class InconsistentStart(ValidationError):
    """Starting value of ``w`` does not square to the sextic."""


class PathTooCloseToBranchPoint(ModuliWallsError):
    exit_code = 3


class PathRoutingFailure(ModuliWallsError):
    exit_code = 3


class DegenerateSystem(ModuliWallsError):
    exit_code = 3


class NoConvergence(ModuliWallsError):
    """Iteration or quadrature refinement did not converge.

    Parameters
    ----------
    message : str
    index : int, optional
        Position of the failing step inside a continuation, if any.
    """

    exit_code = 3

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class TrajectoryStalled(ModuliWallsError):
    exit_code = 3


class WeightOutOfRange(ModuliWallsError):
    """Weights fall outside the coordinate polyhedron of their cell."""

    exit_code = 2


class WrongCell(ModuliWallsError):
    exit_code = 3


class NoBracket(ModuliWallsError):
    exit_code = 3


class BranchInconsistency(ModuliWallsError):
    exit_code = 3


class PoleEvaluation(ModuliWallsError):
    exit_code = 3


class ResidueMismatch(ModuliWallsError):
    exit_code = 3


class UnsupportedConfiguration(ModuliWallsError):
    exit_code = 2
