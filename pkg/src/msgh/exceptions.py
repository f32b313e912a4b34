"""Exception types raised by the library."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of a function."""


class BoundaryParameterError(DomainError):
    """GIG parameters sit on the boundary (gamma == 0 or delta == 0)."""


class UnsupportedOrderError(NotImplementedError):
    """The operation is only implemented for the NIG order lambda = -1/2."""


class DegenerateDataError(ValueError):
    """Data (or a weighted subset of it) has no spread along some direction."""


class EmptyComponentError(DegenerateDataError):
    """A mixture component lost (almost) all of its responsibility mass."""
