"""Triangle mesh container, adjacency, and normal computations.

Meshes are immutable after construction: all operations return new objects,
so instances can be shared freely across threads.
"""

import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import GeometryError, TopologyError


class TriangleMesh:
    """Indexed triangle mesh: an (n, 3) float64 vertex array and an
    (m, 3) int64 triangle array.

    Construction checks indices (in range, no repeated index within a
    triangle). Full topology validation (closed, edge-manifold, orientable)
    is separate -- see :func:`validate_closed_manifold` -- because distance
    metrics legitimately operate on open patches.
    """

    __slots__ = ("vertices", "triangles", "_edges")

    def __init__(self, vertices, triangles):
        v = np.ascontiguousarray(vertices, dtype=np.float64)
        t = np.ascontiguousarray(triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError(f"vertices must be (n, 3), got {v.shape}")
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValueError(f"triangles must be (m, 3), got {t.shape}")
        out_of_range = (t < 0) | (t >= len(v))
        if out_of_range.any():
            bad = int(np.flatnonzero(out_of_range.any(axis=1))[0])
            raise TopologyError(
                f"triangle index out of range [0, {len(v)}) in face {bad}"
            )
        repeated = (
            (t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])
        )
        if repeated.any():
            raise TopologyError(
                f"face {int(np.flatnonzero(repeated)[0])} repeats a vertex index"
            )
        v.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "_edges", None)

    def __setattr__(self, name, value):
        raise AttributeError("TriangleMesh is immutable")

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def edges(self):
        """Unique undirected edges as an (e, 2) array with a < b,
        sorted lexicographically. The row index is the edge id used
        throughout the package."""
        if self._edges is None:
            t = self.triangles
            pairs = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
            pairs.sort(axis=1)
            edges = np.unique(pairs, axis=0)
            edges.flags.writeable = False
            object.__setattr__(self, "_edges", edges)
        return self._edges

    @property
    def n_edges(self):
        return len(self.edges)

    def edge_row_lookup(self):
        """dict mapping the sorted endpoint pair to its edge row index."""
        return {(int(a), int(b)): i for i, (a, b) in enumerate(self.edges)}

    def replace_vertices(self, vertices):
        """New mesh with the same connectivity and different positions."""
        if len(vertices) != self.n_vertices:
            raise ValueError("vertex count must be preserved")
        m = TriangleMesh(vertices, self.triangles)
        return m

    def bbox(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def bbox_diagonal(self):
        lo, hi = self.bbox()
        return float(np.linalg.norm(hi - lo))

    def __repr__(self):
        return f"TriangleMesh(V={self.n_vertices}, F={self.n_triangles})"


def triangle_areas(mesh):
    """Face areas as an (m,) array."""
    v = mesh.vertices
    t = mesh.triangles
    cross = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
    return 0.5 * np.linalg.norm(cross, axis=1)


def face_normal_vectors(mesh):
    """Unnormalized face normals (cross product / 2 == area-weighted unit
    normals)."""
    v = mesh.vertices
    t = mesh.triangles
    return 0.5 * np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])


def validate_closed_manifold(mesh):
    """Raise TopologyError unless the mesh is a closed, orientable,
    edge-manifold surface with no unreferenced vertices.

    Every undirected edge must border exactly two triangles, and the two
    incident triangles must traverse it in opposite directions.
    """
    t = mesh.triangles
    if len(t) == 0:
        raise TopologyError("mesh has no triangles")
    referenced = np.zeros(mesh.n_vertices, dtype=bool)
    referenced[t.ravel()] = True
    if not referenced.all():
        raise TopologyError(
            f"vertex {int(np.flatnonzero(~referenced)[0])} is isolated"
        )

    directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    # Orientability: a directed edge may appear at most once.
    d_unique, d_counts = np.unique(directed, axis=0, return_counts=True)
    if (d_counts > 1).any():
        a, b = d_unique[np.argmax(d_counts > 1)]
        raise TopologyError(
            f"inconsistent orientation: directed edge ({int(a)}, {int(b)}) "
            "appears in more than one face"
        )
    undirected = np.sort(directed, axis=1)
    u_unique, u_counts = np.unique(undirected, axis=0, return_counts=True)
    if (u_counts > 2).any():
        bad = int(np.argmax(u_counts > 2))
        a, b = u_unique[bad]
        raise TopologyError(
            f"non-manifold edge ({int(a)}, {int(b)}) borders "
            f"{int(u_counts[bad])} faces"
        )
    if (u_counts < 2).any():
        a, b = u_unique[np.argmax(u_counts < 2)]
        raise TopologyError(
            f"boundary edge ({int(a)}, {int(b)}): only closed meshes are "
            "supported"
        )


def vertex_neighbors(mesh):
    """neighbors[i]: vertices sharing an edge with i, ascending int64."""
    t = mesh.triangles
    pairs = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    both = np.concatenate([pairs, pairs[:, ::-1]])
    order = np.lexsort((both[:, 1], both[:, 0]))
    srt = both[order]
    keep = np.ones(len(srt), dtype=bool)
    keep[1:] = (srt[1:] != srt[:-1]).any(axis=1)
    srt = srt[keep]
    starts = np.searchsorted(srt[:, 0], np.arange(mesh.n_vertices + 1))
    return [srt[starts[i]:starts[i + 1], 1] for i in range(mesh.n_vertices)]


def adjacency(mesh):
    """Vertex and edge adjacency.

    Returns
    -------
    neighbors : list of int64 arrays
        neighbors[i] holds the vertices sharing an edge with i, ascending.
    edge_faces : dict
        (a, b) with a < b -> list of incident triangle indices, ascending.
    """
    t = mesh.triangles
    pairs = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    neighbors = vertex_neighbors(mesh)

    edge_faces = {}
    tri_ids = np.tile(np.arange(len(t)), 3)
    und = np.sort(pairs, axis=1)
    for (a, b), f in zip(und, tri_ids):
        edge_faces.setdefault((int(a), int(b)), []).append(int(f))
    for faces in edge_faces.values():
        faces.sort()
    return neighbors, edge_faces


def vertex_normals(mesh, tolerances=DEFAULT_TOLERANCES):
    """Per-vertex unit normals: normalized area-weighted sum of incident
    face normals.

    Area weighting keeps the result stable under refinement and makes the
    derived edge-normal norms invariant to uniform scaling.
    """
    areas = triangle_areas(mesh)
    degenerate = areas <= tolerances.degenerate_area
    if degenerate.any():
        raise GeometryError(
            f"face {int(np.flatnonzero(degenerate)[0])} has zero area"
        )
    fnorm = face_normal_vectors(mesh)
    acc = np.zeros((mesh.n_vertices, 3))
    for k in range(3):
        np.add.at(acc, mesh.triangles[:, k], fnorm)
    lengths = np.linalg.norm(acc, axis=1)
    untouched = np.zeros(mesh.n_vertices, dtype=bool)
    untouched[mesh.triangles.ravel()] = True
    if not untouched.all():
        raise GeometryError(
            f"vertex {int(np.flatnonzero(~untouched)[0])} is isolated"
        )
    if (lengths == 0).any():
        raise GeometryError(
            f"vertex {int(np.flatnonzero(lengths == 0)[0])} has a vanishing "
            "normal sum"
        )
    return acc / lengths[:, None]


def edge_normal_norms(mesh, normals=None):
    """Norm of the averaged endpoint normals for every edge row.

    The average of two unit vectors has norm in [0, 1]; it reaches 1 only
    when the endpoint normals coincide, so the value encodes local bending.
    """
    if normals is None:
        normals = vertex_normals(mesh)
    e = mesh.edges
    avg = 0.5 * (normals[e[:, 0]] + normals[e[:, 1]])
    return np.linalg.norm(avg, axis=1)


def edge_normal_norm(mesh, normals, edge):
    """Norm of the averaged endpoint normals for one edge (a, b)."""
    a, b = edge
    avg = 0.5 * (normals[a] + normals[b])
    return float(np.linalg.norm(avg))


def edge_lengths(mesh):
    e = mesh.edges
    return np.linalg.norm(mesh.vertices[e[:, 0]] - mesh.vertices[e[:, 1]], axis=1)
