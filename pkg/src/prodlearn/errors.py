"""Exception types shared across the package.

The CLI maps these onto process exit codes (see ``prodlearn.cli``).
"""


class ProdLearnError(Exception):
    """Base class for errors raised by this package."""


class SchemaError(ProdLearnError, ValueError):
    """An instance or config file does not match the expected schema."""


class CapExceededError(ProdLearnError):
    """An exact enumeration would exceed the configured state cap."""

    def __init__(self, size, cap, what="joint support"):
        self.size = size
        self.cap = cap
        super().__init__(f"{what} has {size} points, exceeding cap {cap}")
