"""Exception hierarchy for the longwave package."""


class LongwaveError(Exception):
    """Base class for all longwave errors."""


class InvalidArgumentError(LongwaveError, ValueError):
    """An argument violates a documented precondition."""


class MeshFormatError(LongwaveError):
    """A mesh file could not be parsed; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MeshTopologyError(LongwaveError):
    """Mesh connectivity is non-conforming (dangling index, bad edge sharing, ...)."""


class PointLocationError(LongwaveError):
    """A query point lies outside every triangle of the mesh."""


class PreconditionerError(LongwaveError):
    """The Jacobi preconditioner cannot be formed (zero diagonal entry)."""


class SolverBreakdownError(LongwaveError):
    """An iterative solver hit an exact breakdown (zero inner product)."""


class LinearSolveError(LongwaveError):
    """A linear solve inside time stepping failed; carries the SolverReport."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class BlowUpError(LongwaveError):
    """The integrated state became non-finite or exceeded the amplitude cap."""


class NonConvergenceError(LongwaveError):
    """A fixed-point iteration exhausted its iteration cap."""


class SingularNonlinearityError(LongwaveError):
    """The solitary-wave nonlinearity hit its singularity (c_s - w <= 0)."""


class UndefinedRateError(LongwaveError):
    """A convergence rate is undefined (zero or negative error entry)."""


class ConfigError(LongwaveError):
    """A scenario configuration is inconsistent or refers to missing data."""
