"""Exception hierarchy shared across the package."""


class MeshMatchError(Exception):
    """Base class for all package errors."""


class ParseError(MeshMatchError):
    """Mesh file could not be parsed."""


class TopologyError(MeshMatchError):
    """Mesh connectivity is invalid (out-of-range indices, non-manifold edges)."""


class DegenerateTriangleError(MeshMatchError):
    """A triangle is too small for cotangent weights to be meaningful."""


class SamplingError(MeshMatchError):
    """Requested sample count cannot be produced on this mesh."""


class CoverageError(MeshMatchError):
    """Some vertex is not covered by any local function."""


class NonTerminationError(MeshMatchError):
    """Adaptive-radius loop exceeded its round budget."""


class IllConditionedError(MeshMatchError):
    """Reduced mass matrix is numerically singular."""


class ConvergenceError(MeshMatchError):
    """Iterative eigensolver failed to converge."""


class RankDeficientError(MeshMatchError):
    """Selected rows do not span the basis; least squares is underdetermined."""


class ScheduleError(MeshMatchError):
    """ZoomOut schedule exceeds the available spectrum size."""


class DimensionError(MeshMatchError):
    """Matrix dimensions disagree."""


class MissingGTError(MeshMatchError):
    """Ground-truth map does not cover the requested evaluation subset."""


class HypothesisError(MeshMatchError):
    """A bound's precondition is violated by the supplied data."""


class InitMapError(MeshMatchError):
    """Initial map file is unreadable or out of range."""


class IndexRangeError(MeshMatchError):
    """Map file references vertices outside the mesh."""
