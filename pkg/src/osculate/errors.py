"""Exception hierarchy shared by all modules."""


class OsculateError(Exception):
    """Base class for every error raised by this package."""


class StepLimitExceeded(OsculateError):
    """The integrator hit ``max_steps`` before reaching the end of the span."""


class DomainExit(OsculateError):
    """The solution left the open set where the vector field is defined."""


class NoConvergence(OsculateError):
    """An iterative solver did not reach the requested tolerance."""


class SingularElement(OsculateError):
    """Orbital elements sit at a chart singularity (ecc or inc degenerate)."""


class NonElliptic(OsculateError):
    """The state is not on a bound, nondegenerate elliptic orbit."""


class SingularNeighborhood(OsculateError):
    """A finite-difference seed crossed a chart singularity."""


class IllConditioned(OsculateError):
    """A linear system is too close to singular to solve reliably."""


class ConfigError(OsculateError):
    """Invalid or incomplete scenario configuration."""
