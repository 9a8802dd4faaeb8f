"""Exception types raised by the hybridloc library."""


class HybridLocError(Exception):
    """Base class for all library errors.

    Attributes:
        exit_code: Process exit code the CLI returns for this error.
    """

    exit_code = 1


class InvalidInput(HybridLocError, ValueError):
    """Input violates a documented precondition."""

    exit_code = 2


class DegenerateInput(InvalidInput):
    """Input is well-formed but carries no usable information (zero matrix, single distance, ...)."""


class Unsupported(HybridLocError, NotImplementedError):
    """Requested operation is outside the supported range (e.g. oracle with too many technologies)."""

    exit_code = 2


class NumericalFailure(HybridLocError, RuntimeError):
    """A computation produced a non-finite value."""

    exit_code = 3
