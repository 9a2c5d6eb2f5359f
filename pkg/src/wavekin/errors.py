"""Exception types shared across the package."""


class WavekinError(Exception):
    """Base class for all package-specific failures."""


class PoleError(WavekinError):
    """An evaluation point sits on (or too close to) a pole of the function."""


class BracketError(WavekinError):
    """A root bracket is invalid (empty, reversed, or outside the domain)."""


class NoSignChangeError(BracketError):
    """Bisection was asked to run on a bracket without a sign change."""


class TailModelError(WavekinError):
    """The integrand violates the tail decay model declared by the caller."""


class TruncationError(WavekinError):
    """A truncated representation cannot reach the requested accuracy."""


class RegimeError(WavekinError):
    """The requested (t, x) point lies outside the validity of the regime."""


class ConvergenceError(WavekinError):
    """An iterative refinement loop hit its cap before meeting tolerance."""
