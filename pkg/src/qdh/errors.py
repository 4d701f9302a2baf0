"""Exception types raised across the package."""


class QDHError(Exception):
    """Base class for all errors raised by :mod:`qdh`."""


class ConfigError(QDHError, ValueError):
    """Invalid user-supplied parameter or configuration."""


class NumericalError(QDHError, ArithmeticError):
    """A numerical invariant was violated (non-Hermitian input, negative
    spectrum, non-monotone scan, ...)."""
