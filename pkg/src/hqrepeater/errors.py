"""Exception types raised by the toolkit."""


class HQRError(Exception):
    """Base class for toolkit errors."""


class CutoffError(HQRError):
    """The truncated Fock space is too small for the requested state."""


class NumericsError(HQRError):
    """A numerical procedure failed to converge."""


class DomainError(HQRError, ValueError):
    """An argument lies outside the domain of an operation."""


class RegimeWarning(UserWarning):
    """Parameters lie outside the validity window of an approximation."""
