"""Generation of semiregular test meshes from platonic base solids."""

import numpy as np

from .mesh import TriangleMesh
from .multires import midpoint_subdivide

_PHI = (1.0 + np.sqrt(5.0)) / 2.0


def _unit(vertices):
    v = np.asarray(vertices, dtype=np.float64)
    return v / np.linalg.norm(v, axis=1)[:, None]


def tetrahedron():
    """Regular tetrahedron with unit circumradius, outward winding."""
    v = _unit([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)])
    t = [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)]
    return TriangleMesh(v, t)


def octahedron():
    v = np.array(
        [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)],
        dtype=np.float64,
    )
    t = [
        (0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4),
        (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5),
    ]
    return TriangleMesh(v, t)


def icosahedron():
    v = _unit(
        [
            (-1, _PHI, 0), (1, _PHI, 0), (-1, -_PHI, 0), (1, -_PHI, 0),
            (0, -1, _PHI), (0, 1, _PHI), (0, -1, -_PHI), (0, 1, -_PHI),
            (_PHI, 0, -1), (_PHI, 0, 1), (-_PHI, 0, -1), (-_PHI, 0, 1),
        ]
    )
    t = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    return TriangleMesh(v, t)


BASE_SOLIDS = {
    "tetra": tetrahedron,
    "octa": octahedron,
    "icosa": icosahedron,
}


def semiregular_mesh(base, levels, projection="none"):
    """Midpoint-refine a base solid `levels` times.

    projection="sphere" re-projects every vertex onto the unit sphere after
    each refinement, producing the standard sphere approximations.
    """
    try:
        mesh = BASE_SOLIDS[base]()
    except KeyError:
        raise ValueError(
            f"unknown base solid {base!r}; choose from {sorted(BASE_SOLIDS)}"
        ) from None
    if levels < 0:
        raise ValueError("levels must be >= 0")
    if projection not in ("none", "sphere"):
        raise ValueError(f"unknown projection {projection!r}")
    for _ in range(levels):
        mesh, _map = midpoint_subdivide(mesh)
        if projection == "sphere":
            mesh = mesh.replace_vertices(_unit(mesh.vertices))
    return mesh


def default_fixtures():
    """The three benchmark meshes used throughout the test suite."""
    return {
        "icosphere3": semiregular_mesh("icosa", 3, "sphere"),
        "octasphere3": semiregular_mesh("octa", 3, "sphere"),
        "tetrasphere4": semiregular_mesh("tetra", 4, "sphere"),
    }
