"""Typed errors raised across the library.

Every failure mode that a caller can act on gets its own class so the CLI
can map exceptions to exit diagnostics by name.
"""


class GfdmError(Exception):
    """Base class for all library errors."""


class ParameterError(GfdmError):
    """An argument violates a documented precondition (shape, range, value)."""


class CapacityError(GfdmError):
    """A dense-matrix construction would exceed the configured size cap."""


class UnsupportedSizeError(GfdmError):
    """The fast path was requested for sizes it does not support."""


class SingularPulseError(GfdmError):
    """Zero-forcing is impossible: the pulse's spectral diagonal has a
    (near-)zero entry. Carries the offending bin index."""

    def __init__(self, message, bin_index=None):
        super().__init__(message)
        self.bin_index = bin_index


class SingularChannelError(GfdmError):
    """Zero-forcing FDE is impossible: the channel frequency response has a
    (near-)zero bin. Carries the offending bin index."""

    def __init__(self, message, bin_index=None):
        super().__init__(message)
        self.bin_index = bin_index


class ConfigurationError(GfdmError):
    """A combination of settings is inconsistent (e.g. CP shorter than the
    channel impulse response)."""


class UnsupportedSchemeError(GfdmError):
    """The requested scheme/channel combination has no flop formula."""
