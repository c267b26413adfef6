"""Exception types shared across the package."""


class KickedTopError(Exception):
    """Base class for all package errors."""


class DomainError(KickedTopError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class DimensionError(KickedTopError, ValueError):
    """Array shapes or qubit counts do not match."""


class CapacityError(KickedTopError, MemoryError):
    """A dense construction would exceed the configured size cap."""


class SymmetryError(KickedTopError, ValueError):
    """An operator fails a required commutation check."""


class ConvergenceError(KickedTopError, RuntimeError):
    """An iterative search did not converge."""


class ConfigError(KickedTopError, ValueError):
    """An experiment configuration is invalid."""


class NumericalValidationError(KickedTopError, ArithmeticError):
    """A runtime numerical self-check (unitarity, norm) failed."""
