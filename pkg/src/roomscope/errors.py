"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the physical or geometric domain of an operation."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to converge or produced unusable output."""


class FormatError(ValueError):
    """A file or byte stream does not match the documented format."""
