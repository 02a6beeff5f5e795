"""Exception types shared across the package.

The CLI maps these onto distinct exit statuses, so modules should raise the
most specific type that applies rather than a bare ``RuntimeError``.
"""

from __future__ import annotations


class ConfigError(ValueError):
    """A run configuration is malformed, incomplete, or contains unknown keys."""


class IntegrationError(RuntimeError):
    """The adaptive integrator failed to reach the end of the time window."""


class TruncationError(RuntimeError):
    """A truncated Fock-space computation refused to proceed.

    Raised when the requested state cannot be represented reliably in the
    retained levels (e.g. a thermal tail or a dynamically generated population
    leaking into the top of the basis).  The message says how to enlarge the
    space.
    """
