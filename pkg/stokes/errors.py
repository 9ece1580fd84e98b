"""Exception hierarchy for the solver."""


class StokesError(Exception):
    """Base class for every solver failure."""


class GeometryError(StokesError):
    pass


class AAAError(StokesError):
    pass


class BasisError(StokesError):
    pass


class ConfigurationError(StokesError):
    """Inconsistent or unsupported problem description."""


class SolveError(StokesError):
    pass


class SolutionError(StokesError):
    pass


class EltDomainError(StokesError, ValueError):
    """Lubrication formulas are only defined for 0 <= lambda < 1."""
