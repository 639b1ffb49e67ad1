"""Exception types and warning categories shared across the package."""


class SepprofError(Exception):
    """Base class for package-specific errors."""


class GraphFormatError(SepprofError):
    """Malformed sepprof-graph file (bad header, duplicate or asymmetric edges)."""


class NotSubset(SepprofError):
    """A set argument is not contained in the required host set."""


class EmptySet(SepprofError):
    """Operation requires a nonempty vertex set."""


class SizeOverflow(SepprofError):
    """Generator output would exceed the configured vertex cap."""


class EmptyCluster(SepprofError):
    """Largest percolation cluster is a single vertex (or absent)."""


class TooLarge(SepprofError):
    """Input exceeds the configured exact-computation threshold."""


class BudgetExceeded(SepprofError):
    """Enumeration cap hit.  Carries the cap; partial results stay valid upper bounds."""

    def __init__(self, cap, message=None):
        self.cap = cap
        super().__init__(message or f"enumeration budget of {cap} sets exceeded")


class PreconditionGap(SepprofError):
    """A stated precondition of a bound construction does not hold for these inputs."""


class NotCertified(SepprofError):
    """Profile table is not exact/certified over the range the construction needs."""


class UnreachableDecay(SepprofError):
    """Profile never decays below the requested fraction within the table."""


class DomainError(SepprofError):
    """Bound form evaluated below its minimal admissible argument."""


class TooFewPoints(SepprofError):
    """Fitting needs more certified profile points than were supplied."""


class EigenFailure(SepprofError):
    """Iterative eigensolver did not converge within the configured iterations."""


class HypothesisFailed(SepprofError):
    """The doubling premise |B(v,2m)| <= A*|B(v,m)| is false for the supplied A."""


class WindowExhausted(SepprofError):
    """The window cannot certify a ball large enough for the requested point."""


class DegenerateEmbedding(SepprofError):
    """Two vertices share the same embedded coordinates."""


class EmptyTable(SepprofError):
    """A profile table with no points was supplied where points are required."""


class InexactInput(SepprofError):
    """Operation requires an exact profile table."""


class DisconnectedInput(SepprofError):
    """Operation requires a connected graph."""


class AmbientInexactWarning(UserWarning):
    """Queried set touches non-interior vertices; value is window-relative only."""


class DegenerateCutWarning(UserWarning):
    """Cutter hit a degenerate configuration; the returned cut is still valid."""
