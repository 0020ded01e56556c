"""Exception types shared across the package."""


class ReconBenchError(Exception):
    """Base class for all package errors."""


class ShapeError(ReconBenchError, ValueError):
    """Operand shapes are incompatible."""


class InvalidSpecError(ReconBenchError, ValueError):
    """A projection, split or training specification is not realizable."""


class NumericalError(ReconBenchError, ArithmeticError):
    """A numerical routine failed (non-convergence, degenerate input)."""


class UndefinedMetricError(ReconBenchError, ArithmeticError):
    """A metric is undefined for its inputs, e.g. ARR with zero base accuracy."""


class DataError(ReconBenchError, ValueError):
    """Dataset files are missing, unreadable or malformed."""
