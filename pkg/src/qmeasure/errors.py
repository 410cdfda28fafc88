"""Exception types shared across the package."""


class QmeasureError(Exception):
    """Base class for all errors raised by qmeasure."""


class DimensionError(QmeasureError):
    """Operands have incompatible or invalid dimensions."""


class NotHermitianError(QmeasureError):
    """An operation requiring a Hermitian operator received a non-Hermitian one."""


class ParameterError(QmeasureError):
    """A numeric parameter is outside its admissible range."""


class ValidationError(QmeasureError):
    """A value fails the structural invariants of its type."""


class NonCommutingMetersError(QmeasureError):
    """Joint statistics were requested for meters that do not commute."""


class PreconditionError(QmeasureError):
    """A hypothesis required by the requested check does not hold."""
