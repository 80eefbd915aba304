"""Exception types shared across the package."""


class LqgError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(LqgError, ValueError):
    """A parameter violates an operation's precondition (size, range, scale)."""


class InvalidFieldError(LqgError, ValueError):
    """Field values are unusable (non-finite, wrong shape, overflowing weights)."""


class OutOfBoundsError(LqgError, ValueError):
    """A geometric object (circle, annulus, vertex) does not fit in the grid."""


class DegenerateAnnulusError(LqgError, ValueError):
    """Annulus too thin to contain the vertex layers or a separating ring."""


class UnreachableTargetError(LqgError):
    """Requested vertex was not reached by the distance computation."""


class ResolutionError(LqgError, ValueError):
    """A requested scale falls below what the lattice spacing can resolve."""


class ConfigError(LqgError, ValueError):
    """Invalid or malformed run configuration."""
