"""Exception hierarchy.

Every error carries a ``category`` string that the command line front end
prints as ``ERROR:<category>:<message>``. Validation problems map to exit
code 1, numerical failures to exit code 2.
"""


class AnisoscopeError(Exception):
    category = "error"
    exit_code = 2


class ValidationError(AnisoscopeError, ValueError):
    category = "validation"
    exit_code = 1


class NumericalError(AnisoscopeError, ArithmeticError):
    category = "numerical"


class ConsistencyError(NumericalError):
    """The operator does not approximate the derivative it claims to."""

    category = "consistency"


class SingularityError(NumericalError):
    """A compact denominator vanished."""

    category = "singularity"

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class InfeasibleError(NumericalError):
    category = "infeasible"


class QuadratureError(NumericalError):
    category = "quadrature"


class NoRealSolutionError(NumericalError):
    category = "no-real-solution"


class SingularModeError(NumericalError):
    category = "singular-mode"


class DegenerateMeshError(NumericalError):
    category = "degenerate-mesh"


class NoDataError(NumericalError):
    category = "no-data"


class DivergenceError(NumericalError):
    category = "divergence"

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class BoundaryNotFoundError(NumericalError):
    category = "boundary-not-found"
