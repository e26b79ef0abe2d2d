"""
Exception types raised across the random-modulation toolkit.

The CLI maps ConfigError to exit code 1 and every other
RandomModulationError to exit code 2.
"""
from typing import Optional, Sequence


class RandomModulationError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(RandomModulationError):
    """Invalid experiment configuration; ``field`` names the offending key when known."""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class DimensionError(RandomModulationError, ValueError):
    """Operand shape does not match the operator."""


class ConvergenceError(RandomModulationError):
    """An iterative routine stopped without meeting its tolerance."""

    def __init__(self, message: str, residual: Optional[float] = None):
        self.residual = residual
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)


class BranchRangeError(RandomModulationError, ValueError):
    """Argument lies outside the invertible branch of a Stieltjes-type transform."""


class MultipleFixedPointsError(RandomModulationError):
    """The replica equation has more than one root."""

    def __init__(self, roots: Sequence[float]):
        self.roots = list(roots)
        listed = ", ".join(f"{r:.6g}" for r in self.roots)
        super().__init__(f"replica equation has {len(self.roots)} roots: {listed}")


class NoCrossingError(RandomModulationError, ValueError):
    """A scalar equation has no solution in its search interval."""


class DegenerateNormalizerError(RandomModulationError):
    """A detector normalizer collapsed towards zero."""
