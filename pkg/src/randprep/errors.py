"""Exception types shared across the library."""


class RandprepError(Exception):
    """Base class for all library-specific failures."""


class ShapeMismatch(RandprepError):
    """Operands do not conform."""


class RankDeficient(RandprepError):
    """A factorization met a column/block below its rank threshold."""


class NoConvergence(RandprepError):
    """An iteration exceeded its sweep cap."""


class ZeroMatrix(RandprepError):
    """Operation undefined on the zero matrix."""


class PatternOverflow(RandprepError):
    """Structured sign pattern does not fit the requested shape."""


class NoRealRoot(RandprepError):
    """Corner-entry equation has no real solution."""


class MaxRetries(RandprepError):
    """Retry loop exhausted its attempt budget."""


class BisectFail(RandprepError):
    """Bisection could not land inside the target window."""


class RankCollapse(RandprepError):
    """A sketch lost numerical column rank; resample with a fresh stream."""


class NoGap(RandprepError):
    """Rank search brackets collapsed without meeting the monitor."""


class Failure(RandprepError):
    """Randomized algorithm monitor rejected the output (resamplable event)."""


class SmallPivot(RandprepError):
    """Gaussian elimination without pivoting hit a small pivot.

    ``step`` is the 1-based elimination step that failed.
    """

    def __init__(self, step, pivot=None):
        self.step = int(step)
        self.pivot = pivot
        msg = f"small pivot at elimination step {step}"
        if pivot is not None:
            msg += f" (|pivot| = {abs(pivot):.3e})"
        super().__init__(msg)


class Exhausted(RandprepError):
    """Adaptive augmentation width exceeded its cap."""


class CapacitanceSingular(RandprepError):
    """Low-rank update capacitance matrix is numerically singular."""


class NotContractive(RandprepError):
    """Newton iteration seeded with a non-contractive starting point."""


class Stagnated(RandprepError):
    """Iterative refinement stopped making progress."""


class NoExpectation(RandprepError):
    """The requested expectation does not exist (square Gaussian case)."""


class SingularPivotBlock(RandprepError):
    """Skeleton pivot block too ill-conditioned to invert."""


class ConfigError(RandprepError):
    """Experiment configuration rejected; message names the field."""
