"""Exception hierarchy shared across the package."""


class MeshmarkError(Exception):
    """Base class for all package-specific errors."""


class MeshParseError(MeshmarkError):
    """A mesh file could not be parsed (bad header, token, or count)."""


class TopologyError(MeshmarkError):
    """Mesh connectivity violates a structural requirement.

    The message names the offending element (vertex, edge, or face index).
    """


class GeometryError(MeshmarkError):
    """Mesh geometry is degenerate for the requested operation."""


class NotSemiregularError(MeshmarkError):
    """Connectivity is not a 1-to-4 refinement of a coarser manifold mesh."""


class CapacityError(MeshmarkError):
    """Payload does not fit: fewer watermark slots than payload bits."""
