"""Domain errors raised by the simulation services."""


class CRAError(Exception):
    """Base class for every error raised by the toolkit."""


class NonIntegerFractionError(CRAError):
    """c * N is not an integer, so the sector is undefined."""

    def __init__(self, N: int, c):
        self.N = N
        self.c = c
        super().__init__(f"c*N must be an integer (N={N}, c={c})")


class DegenerateSpectrumError(CRAError):
    """Level spacing below threshold; the exact gauge potential is undefined."""


class NonConvergedError(CRAError):
    """Step halving did not stabilize P_GS within the step budget."""


class DimensionTooLargeError(CRAError):
    """Full-space oracle requested for too many spins."""


class InsufficientPointsError(CRAError):
    """A scaling fit needs at least three usable points."""


class ConfigError(CRAError):
    """Experiment document could not be read or validated."""
