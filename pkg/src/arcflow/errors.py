"""Exception types shared across the package."""


class InvalidCurveError(ValueError):
    """Polyline violates a structural requirement (degenerate segment, too few nodes)."""


class InvalidSupportError(ValueError):
    """Support curve is not usable (non-convex, degenerate table)."""


class InvalidInputError(ValueError):
    """Inputs to an operation are mutually inconsistent (endpoint/lift mismatch)."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of the operation."""
