"""Shared exception base for the package."""


class RansliceError(Exception):
    """Base class for all errors raised by ranslice."""
