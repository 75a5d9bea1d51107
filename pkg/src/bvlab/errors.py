"""Exception hierarchy shared by every module."""


class BVLabError(Exception):
    pass


class DomainError(BVLabError, ValueError):
    """A point, interval or open set lies outside the domain of a function."""


class ParameterError(BVLabError, ValueError):
    """An out-of-range numerical parameter (gamma <= 0, lambda <= 0, ...)."""


class UnsupportedFormError(BVLabError, TypeError):
    """The operation has no exact realization for this catalog form."""
