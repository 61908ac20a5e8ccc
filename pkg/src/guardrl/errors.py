"""Shared exception types."""


class GuardrlError(Exception):
    """Base class for package errors."""


class ShapeError(GuardrlError, ValueError):
    """Array shapes do not chain or do not match the declared contract."""


class NonFiniteError(GuardrlError, ArithmeticError):
    """A NaN or infinity appeared where finite values are required."""


class MapGenerationError(GuardrlError, RuntimeError):
    """Procedural map generation could not satisfy the requested difficulty."""


class ConfigError(GuardrlError, ValueError):
    """Invalid run configuration or checkpoint/config mismatch."""
