"""Exception hierarchy shared by the library and the command line front-end."""


class BlockToeplitzError(Exception):
    """Base class for all errors raised by :mod:`blocktoeplitz`."""


class DimensionMismatch(BlockToeplitzError, ValueError):
    """Two symbols (or a symbol and a vector family) have incompatible sizes."""


class InconsistencyError(BlockToeplitzError, RuntimeError):
    """Two independent computational routes disagreed beyond tolerance.

    This always indicates an implementation fault or a numerically broken
    input (NaN, overflow), never a property of a valid instance.
    """


class PremiseViolation(BlockToeplitzError, ValueError):
    """The rank-one sums handed to the certificate solver do not vanish."""

    def __init__(self, message, index=None, norm=None):
        super().__init__(message)
        self.index = index
        self.norm = norm


class NotZeroInstance(BlockToeplitzError, ValueError):
    """A finite sum of Hankel products that was expected to vanish does not."""

    def __init__(self, message, index=None, norm=None):
        super().__init__(message)
        self.index = index
        self.norm = norm


class SymbolFormatError(BlockToeplitzError, ValueError):
    """A serialized symbol does not follow the interchange schema."""
