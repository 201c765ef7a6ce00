"""Exception types shared across the package.

All library errors derive from :class:`MonoscanError` so callers (and the
CLI) can catch one base class.  The subclasses separate "your argument is
outside the operation's domain" from "the inputs are individually fine but
violate a relationship the operation relies on", plus a few situations that
deserve their own handling (degenerate samples, bad configuration, bad data
files).
"""

from __future__ import annotations


class MonoscanError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(MonoscanError, ValueError):
    """An argument value lies outside the operation's domain."""


class PreconditionError(MonoscanError, ValueError):
    """Arguments are individually valid but violate a required relationship."""


class DegenerateSampleError(MonoscanError, ValueError):
    """The sample carries no usable information (e.g. zero variance estimate)."""


class ConfigError(MonoscanError, ValueError):
    """Configuration inputs (tables, scenario files, levels) do not match."""


class DataError(MonoscanError, ValueError):
    """An input data file is malformed or inconsistent with the flags."""
