"""Exception types shared across the toolkit.

Every error that carries data (an edge, a triangle id, a residual) exposes it
as an attribute so callers can react programmatically instead of parsing
messages.
"""

from __future__ import annotations


class DisconError(Exception):
    """Base class for all toolkit errors."""


class NonManifoldError(DisconError):
    """An edge bounds more than two triangles, or a vertex link is not a
    single path/cycle."""


class UnorientableError(DisconError):
    """Triangle orientations cannot be made globally consistent."""


class DisconnectedError(DisconError):
    """Two vertices lie in different connected components."""


class NotADiskError(DisconError):
    """A triangulation expected to be a closed disk is not one."""


class EmptyCarrierError(DisconError):
    """Domain filling kept no triangle at the requested resolution."""


class NonPositiveSquaredLengthError(DisconError):
    """A conformal structure produced a non-positive squared edge length.

    Attributes
    ----------
    edge : tuple of int
        Offending edge (i, j) with i < j.
    value : float
        The non-positive squared length.
    """

    def __init__(self, edge, value):
        self.edge = tuple(edge)
        self.value = float(value)
        super().__init__(f"edge {self.edge}: squared length {self.value} <= 0")


class DegenerateTriangleError(DisconError):
    """Triangle inequality failed where a nondegenerate triangle is required."""

    def __init__(self, triangle, lengths=None):
        self.triangle = triangle
        self.lengths = lengths
        super().__init__(f"degenerate triangle {triangle} (lengths {lengths})")


class EdgeExceedsEpsError(DisconError):
    """An edge is longer than the eps used in a fullness computation."""


class NoConvergenceError(DisconError):
    """Iteration budget exhausted before reaching the tolerance.

    Attributes
    ----------
    residual : float
        Residual at the time the budget ran out.
    """

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class LayoutInconsistentError(DisconError):
    """Laying out a label failed to close up; the label is not solved."""

    def __init__(self, message, worst_edge=None, violation=None):
        self.worst_edge = worst_edge
        self.violation = violation
        super().__init__(message)


class OrientationMismatchError(DisconError):
    """Domain and image triangles disagree in orientation."""


class OutsideCarrierError(DisconError):
    """A point does not lie in any triangle of the realization."""


class UnsupportedDomainError(DisconError):
    """No reference conformal map is available for the requested domain."""


class OutOfWorkingRegionError(DisconError):
    """A point left the declared working region of a model surface."""


class ConjugateLocusError(DisconError):
    """Logarithm requested at or beyond the conjugate locus (e.g. antipode)."""


class PointsTooSpreadError(DisconError):
    """Karcher mean input points do not fit in a uniqueness ball."""


class EmptyChainsError(DisconError):
    """A separating-chain bound was requested with no chains."""


class GridTooCoarseError(DisconError):
    """Finite-difference estimates failed their Richardson sanity check."""


class DegenerationBlockedError(DisconError):
    """No Newton step length preserves nondegenerate triangles."""
