"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: ``ConfigError`` -> 2, ``DomainError`` -> 3,
``StorageError`` -> 4.
"""


class ShapegenError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(ShapegenError, ValueError):
    """Invalid or incomplete configuration / parameter values."""


class DomainError(ShapegenError, ValueError):
    """A value lies outside its admissible domain (grid bounds, support box)."""


class SupportError(DomainError):
    """A shape's support escapes the box V0 = (-a/2, a/2)^d."""


class StorageError(ShapegenError):
    """Malformed file, hash mismatch or unsupported schema version."""
