"""Subdivision connectivity: forward refinement, blind inverse detection,
and the prediction-error (wavelet) decomposition built on it.

One refinement level splits every triangle 1-to-4: original ("even")
vertices keep their positions and every edge gains one new ("odd") vertex.
The per-edge wavelet coefficient vector (WCV) is the difference between the
odd vertex and the midpoint of its coarse edge, so midpoint-refined
geometry has all-zero coefficients and analysis/synthesis is an exact
inverse pair.
"""

from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .errors import NotSemiregularError, TopologyError
from .mesh import (
    TriangleMesh,
    adjacency,
    validate_closed_manifold,
    vertex_neighbors,
)

ROLE_UNKNOWN = -1
ROLE_CENTER = 0
# roles 1..3: corner triangle whose even vertex sits at local index role-1


@dataclass(frozen=True)
class SubdivisionMap:
    """One level of 1-to-4 structure on a fine mesh.

    Attributes
    ----------
    even_vertices : (k,) int64, sorted
        Fine vertex ids that survive to the coarse level. The coarse index
        of an even vertex is its rank in this array.
    odd_assignment : dict
        Fine odd vertex id -> (a, b): the fine ids (a < b) of the even
        endpoints of the coarse edge the vertex subdivides.
    triangle_groups : (Fc, 4) int64
        Rows of fine triangle ids [corner0, corner1, corner2, center].
    coarse_triangles : (Fc, 3) int64
        Coarse faces with corners given as fine vertex ids, wound
        consistently with the fine faces.
    """

    even_vertices: np.ndarray
    odd_assignment: dict
    triangle_groups: np.ndarray
    coarse_triangles: np.ndarray

    @property
    def n_coarse_vertices(self):
        return len(self.even_vertices)

    @property
    def n_coarse_triangles(self):
        return len(self.triangle_groups)

    def coarse_index(self, fine_vertices):
        """Map fine even vertex ids to coarse ids (rank in sorted evens)."""
        idx = np.searchsorted(self.even_vertices, fine_vertices)
        if np.any(idx >= len(self.even_vertices)) or np.any(
            self.even_vertices[idx] != fine_vertices
        ):
            raise ValueError("vertex is not an even vertex of this map")
        return idx

    def validate(self, mesh):
        """Check the structural invariants against the fine mesh."""
        n_v = mesh.n_vertices
        evens = self.even_vertices
        if len(np.unique(evens)) != len(evens):
            raise TopologyError("even vertex list contains duplicates")
        odds = np.fromiter(self.odd_assignment.keys(), dtype=np.int64)
        marks = np.zeros(n_v, dtype=np.int8)
        marks[evens] += 1
        marks[odds] += 1
        if not np.all(marks == 1):
            v = int(np.flatnonzero(marks != 1)[0])
            raise TopologyError(
                f"vertex {v} is not covered exactly once by the even/odd split"
            )
        even_set = set(int(e) for e in evens)
        seen_edges = set()
        for v, (a, b) in self.odd_assignment.items():
            if a not in even_set or b not in even_set or a == b:
                raise TopologyError(
                    f"odd vertex {v} is not assigned to an even-vertex edge"
                )
            key = (min(a, b), max(a, b))
            if key in seen_edges:
                raise TopologyError(f"coarse edge {key} has two odd vertices")
            seen_edges.add(key)
        groups = self.triangle_groups
        flat = groups.ravel()
        if len(groups) * 4 != mesh.n_triangles or len(np.unique(flat)) != len(flat):
            raise TopologyError("triangle groups do not partition the fine faces")
        odd_mask = marks.copy()
        odd_mask[:] = 0
        odd_mask[odds] = 1
        center_verts = mesh.triangles[groups[:, 3]]
        if not np.all(odd_mask[center_verts] == 1):
            g = int(np.flatnonzero((odd_mask[center_verts] != 1).any(axis=1))[0])
            raise TopologyError(
                f"group {g}: center triangle has a non-odd vertex"
            )
        if not np.all(np.isin(self.coarse_triangles.ravel(), evens)):
            raise TopologyError("coarse triangle references a non-even vertex")


@dataclass(frozen=True)
class DecompositionLevel:
    """One analysis step: the fine connectivity it consumed, the coarse
    mesh it produced, and the per-coarse-edge coefficient vectors."""

    fine_triangles: np.ndarray
    n_fine_vertices: int
    submap: SubdivisionMap
    coarse: TriangleMesh
    # wcvs[i] belongs to coarse.edges[i]; odd_by_edge[i] is the fine vertex
    # the coefficient displaces.
    wcvs: np.ndarray
    odd_by_edge: np.ndarray


@dataclass(frozen=True)
class WaveletDecomposition:
    """Ordered analysis levels, finest first."""

    levels: tuple

    @property
    def depth(self):
        return len(self.levels)

    @property
    def coarsest(self):
        return self.levels[-1].coarse

    def with_level_wcvs(self, level_index, wcvs):
        """Copy of the decomposition with one level's coefficients replaced."""
        level = self.levels[level_index]
        wcvs = np.asarray(wcvs, dtype=np.float64)
        if wcvs.shape != level.wcvs.shape:
            raise ValueError("replacement coefficients have the wrong shape")
        new_level = replace(level, wcvs=wcvs)
        levels = list(self.levels)
        levels[level_index] = new_level
        return WaveletDecomposition(tuple(levels))


def _fine_connectivity(mesh):
    """Shared 1-to-4 connectivity refinement.

    Returns (fine_triangles, edges, odd_ids) where odd_ids[i] is the new
    vertex on edges[i]. Fine triangles for coarse face t are emitted as
    rows 4t..4t+3 = [corner0, corner1, corner2, center].
    """
    t = mesh.triangles
    edges = mesh.edges
    lookup = mesh.edge_row_lookup()
    n_v = mesh.n_vertices
    odd_ids = n_v + np.arange(len(edges), dtype=np.int64)

    fine = np.empty((4 * len(t), 3), dtype=np.int64)
    for f, (a, b, c) in enumerate(t):
        oab = odd_ids[lookup[(int(min(a, b)), int(max(a, b)))]]
        obc = odd_ids[lookup[(int(min(b, c)), int(max(b, c)))]]
        oca = odd_ids[lookup[(int(min(c, a)), int(max(c, a)))]]
        fine[4 * f + 0] = (a, oab, oca)
        fine[4 * f + 1] = (b, obc, oab)
        fine[4 * f + 2] = (c, oca, obc)
        fine[4 * f + 3] = (oab, obc, oca)
    return fine, edges, odd_ids


def _subdivision_map_for_refinement(mesh, edges, odd_ids):
    n_t = mesh.n_triangles
    groups = (4 * np.arange(n_t, dtype=np.int64))[:, None] + np.arange(4)
    return SubdivisionMap(
        even_vertices=np.arange(mesh.n_vertices, dtype=np.int64),
        odd_assignment={
            int(o): (int(a), int(b)) for o, (a, b) in zip(odd_ids, edges)
        },
        triangle_groups=groups,
        coarse_triangles=mesh.triangles.copy(),
    )


def midpoint_subdivide(mesh):
    """Split every triangle 1-to-4 with new vertices at edge midpoints.

    Returns the fine mesh and the SubdivisionMap tying it to the input.
    """
    validate_closed_manifold(mesh)
    fine_t, edges, odd_ids = _fine_connectivity(mesh)
    v = mesh.vertices
    odd_pos = 0.5 * (v[edges[:, 0]] + v[edges[:, 1]])
    fine_v = np.vstack([v, odd_pos])
    fine = TriangleMesh(fine_v, fine_t)
    return fine, _subdivision_map_for_refinement(mesh, edges, odd_ids)


def _loop_beta(n):
    """Even-vertex weight of the Loop scheme for valence n."""
    c = 3.0 / 8.0 + 0.25 * np.cos(2.0 * np.pi / n)
    return (5.0 / 8.0 - c * c) / n


def loop_subdivide(mesh):
    """One iteration of Loop subdivision (same connectivity as the midpoint
    scheme, smoothed positions). Requires a closed mesh."""
    validate_closed_manifold(mesh)
    fine_t, edges, odd_ids = _fine_connectivity(mesh)
    v = mesh.vertices
    neighbors, edge_faces = adjacency(mesh)

    odd_pos = np.empty((len(edges), 3))
    t = mesh.triangles
    for i, (a, b) in enumerate(edges):
        faces = edge_faces[(int(a), int(b))]
        opposite = []
        for f in faces:
            tri = t[f]
            opposite.append(int(tri[(tri != a) & (tri != b)][0]))
        c, d = opposite
        odd_pos[i] = 0.375 * (v[a] + v[b]) + 0.125 * (v[c] + v[d])

    even_pos = np.empty_like(v)
    for i in range(mesh.n_vertices):
        nb = neighbors[i]
        beta = _loop_beta(len(nb))
        even_pos[i] = (1.0 - len(nb) * beta) * v[i] + beta * v[nb].sum(axis=0)

    return TriangleMesh(np.vstack([even_pos, odd_pos]), fine_t)


def _triangle_neighbors(mesh):
    """(F, 3) array: entry [f, k] is the face sharing the edge opposite
    local vertex k of face f. Requires a closed manifold."""
    t = mesh.triangles
    n_t = len(t)
    locals_ = np.empty((n_t, 3, 2), dtype=np.int64)
    for k in range(3):
        locals_[:, k, 0] = t[:, (k + 1) % 3]
        locals_[:, k, 1] = t[:, (k + 2) % 3]
    locals_.sort(axis=2)
    flat = locals_.reshape(-1, 2)
    slots = np.arange(3 * n_t)
    order = np.lexsort((flat[:, 1], flat[:, 0]))
    srt_slots = slots[order]
    neighbors = np.full((n_t, 3), -1, dtype=np.int64)
    # closed manifold: slots pair up 2 by 2
    first = srt_slots[0::2]
    second = srt_slots[1::2]
    neighbors[first // 3, first % 3] = second // 3
    neighbors[second // 3, second % 3] = first // 3
    return neighbors


def detect_inverse_subdivision(mesh, validate=True):
    """Recover the 1-to-4 structure of a refined mesh from connectivity
    alone.

    The lowest-index triangle seeds the search; its four possible roles
    (group center, or corner with the even vertex at local position 0, 1,
    or 2) are tried in that fixed order and propagated across
    edge-adjacency. The first hypothesis that labels the whole mesh
    consistently and coarsens to a valid closed manifold wins, which makes
    the result deterministic and independent of vertex positions.
    """
    if validate:
        validate_closed_manifold(mesh)
    t = mesh.triangles
    n_t = len(t)
    n_v = mesh.n_vertices
    if n_t % 4 != 0 or n_t < 8:
        raise NotSemiregularError(
            f"face count {n_t} is not a refinement of a closed mesh"
        )
    tri_nb = _triangle_neighbors(mesh)

    reached = np.zeros(n_t, dtype=bool)
    stack = [0]
    reached[0] = True
    while stack:
        f = stack.pop()
        for n in tri_nb[f]:
            if not reached[n]:
                reached[n] = True
                stack.append(int(n))
    if not reached.all():
        raise NotSemiregularError("mesh is not edge-connected")

    neighbors_v = vertex_neighbors(mesh)
    tris = t.tolist()
    nbs = tri_nb.tolist()
    for hypothesis in (ROLE_CENTER, 1, 2, 3):
        result = _try_labeling(mesh, tris, nbs, neighbors_v, hypothesis)
        if result is not None:
            return result
    raise NotSemiregularError(
        "no consistent 1-to-4 labeling: mesh is not semiregular"
    )


def _try_labeling(mesh, tris, nbs, neighbors_v, seed_role):
    n_t = len(tris)
    n_v = mesh.n_vertices
    role = [ROLE_UNKNOWN] * n_t
    parity = [-1] * n_v
    queue = deque()

    def assign(face, r):
        """Record a role; False on conflict."""
        if role[face] != ROLE_UNKNOWN:
            return role[face] == r
        a, b, c = tris[face]
        if r == ROLE_CENTER:
            pa, pb, pc = 1, 1, 1
        elif r == 1:
            pa, pb, pc = 0, 1, 1
        elif r == 2:
            pa, pb, pc = 1, 0, 1
        else:
            pa, pb, pc = 1, 1, 0
        for vid, p in ((a, pa), (b, pb), (c, pc)):
            q = parity[vid]
            if q == -1:
                parity[vid] = p
            elif q != p:
                return False
        role[face] = r
        queue.append(face)
        return True

    if not assign(0, seed_role):
        return None
    while queue:
        f = queue.popleft()
        r = role[f]
        tri = tris[f]
        nb = nbs[f]
        if r == ROLE_CENTER:
            for k in range(3):
                n = nb[k]
                v1 = tri[(k + 1) % 3]
                v2 = tri[(k + 2) % 3]
                nt = tris[n]
                if nt[0] != v1 and nt[0] != v2:
                    j = 0
                elif nt[1] != v1 and nt[1] != v2:
                    j = 1
                else:
                    j = 2
                if not assign(n, 1 + j):
                    return None
        else:
            e = r - 1
            if not assign(nb[e], ROLE_CENTER):
                return None
            even_vertex = tri[e]
            for k in range(3):
                if k == e:
                    continue
                n = nb[k]
                nt = tris[n]
                if nt[0] == even_vertex:
                    j = 0
                elif nt[1] == even_vertex:
                    j = 1
                elif nt[2] == even_vertex:
                    j = 2
                else:
                    return None
                if not assign(n, 1 + j):
                    return None

    # Global structure: odd vertices must subdivide exactly one even-even
    # edge, and the groups must tile the face set.
    parity_arr = np.asarray(parity, dtype=np.int8)
    role_arr = np.asarray(role, dtype=np.int8)
    evens = np.flatnonzero(parity_arr == 0).astype(np.int64)
    odds = np.flatnonzero(parity_arr == 1).astype(np.int64)
    n_centers = int((role_arr == ROLE_CENTER).sum())
    if n_centers * 4 != n_t or len(odds) * 2 != 3 * n_centers:
        return None

    odd_assignment = {}
    seen_edges = set()
    for v in odds:
        nb = neighbors_v[v]
        ev = nb[parity_arr[nb] == 0]
        if len(ev) != 2:
            return None
        key = (int(ev.min()), int(ev.max()))
        if key in seen_edges:
            return None
        seen_edges.add(key)
        odd_assignment[int(v)] = key

    centers = np.flatnonzero(role_arr == ROLE_CENTER)
    groups = np.empty((n_centers, 4), dtype=np.int64)
    coarse_tris = np.empty((n_centers, 3), dtype=np.int64)
    claimed = np.zeros(n_t, dtype=bool)
    for g, c in enumerate(centers):
        corners = nbs[c]
        for f in corners:
            if role[f] == ROLE_CENTER or claimed[f]:
                return None
            claimed[f] = True
        claimed[c] = True
        groups[g, :3] = corners
        groups[g, 3] = c
        # Corner of the coarse face: shared even endpoint of two
        # consecutive odd (midpoint) vertices of the center.
        w = tris[c]
        ok = True
        for i in range(3):
            s = set(odd_assignment[w[i]]) & set(odd_assignment[w[(i + 2) % 3]])
            if len(s) != 1:
                ok = False
                break
            coarse_tris[g, i] = s.pop()
        if not ok:
            return None
        corner_evens = {tris[f][role[f] - 1] for f in corners}
        if corner_evens != set(int(x) for x in coarse_tris[g]):
            return None
    if not claimed.all():
        return None

    submap = SubdivisionMap(
        even_vertices=evens,
        odd_assignment=odd_assignment,
        triangle_groups=groups,
        coarse_triangles=coarse_tris,
    )
    try:
        coarse = coarsen(mesh, submap, validate_map=False)
        validate_closed_manifold(coarse)
    except TopologyError:
        return None
    if coarse.n_edges != len(odds):
        return None
    return submap


def coarsen(mesh, submap, validate_map=True):
    """Merge each 4-group into one triangle; even vertices keep their
    positions verbatim and are renumbered by ascending fine id."""
    if validate_map:
        submap.validate(mesh)
    evens = submap.even_vertices
    coarse_t = submap.coarse_index(submap.coarse_triangles.ravel()).reshape(-1, 3)
    return TriangleMesh(mesh.vertices[evens], coarse_t)


def analyze(mesh, max_levels, validate=True):
    """Peel refinement levels until detection fails or max_levels is
    reached; per level, record one coefficient vector per coarse edge
    (odd vertex position minus coarse edge midpoint).

    Raises NotSemiregularError only when no level at all can be peeled.
    """
    if max_levels < 1:
        raise ValueError("max_levels must be >= 1")
    if validate:
        validate_closed_manifold(mesh)
    levels = []
    current = mesh
    while len(levels) < max_levels:
        try:
            # Coarse meshes were already validated when their level was
            # accepted, so skip revalidation inside the loop.
            submap = detect_inverse_subdivision(current, validate=False)
        except NotSemiregularError:
            break
        coarse = coarsen(current, submap, validate_map=False)
        levels.append(_build_level(current, submap, coarse))
        current = coarse
    if not levels:
        raise NotSemiregularError("no refinement level detected")
    return WaveletDecomposition(tuple(levels))


def _build_level(fine, submap, coarse):
    evens = submap.even_vertices
    edges = coarse.edges
    fine_pairs = evens[edges]  # (E, 2) fine ids, a < b preserved by rank order
    odd_of = {pair: odd for odd, pair in submap.odd_assignment.items()}
    odd_by_edge = np.empty(len(edges), dtype=np.int64)
    for i, (fa, fb) in enumerate(fine_pairs):
        try:
            odd_by_edge[i] = odd_of[(int(fa), int(fb))]
        except KeyError:
            raise TopologyError(
                f"coarse edge ({int(fa)}, {int(fb)}) carries no odd vertex"
            ) from None
    v = fine.vertices
    mids = 0.5 * (v[fine_pairs[:, 0]] + v[fine_pairs[:, 1]])
    wcvs = v[odd_by_edge] - mids
    return DecompositionLevel(
        fine_triangles=fine.triangles,
        n_fine_vertices=fine.n_vertices,
        submap=submap,
        coarse=coarse,
        wcvs=wcvs,
        odd_by_edge=odd_by_edge,
    )


def synthesize(decomposition):
    """Rebuild the dense mesh: odd vertex = coarse edge midpoint + stored
    coefficient, applied from the coarsest level up. Exact inverse of
    analyze for untouched coefficients."""
    levels = decomposition.levels
    positions = levels[-1].coarse.vertices
    for level in reversed(levels):
        fine = np.empty((level.n_fine_vertices, 3))
        fine[level.submap.even_vertices] = positions
        e = level.coarse.edges
        mids = 0.5 * (positions[e[:, 0]] + positions[e[:, 1]])
        fine[level.odd_by_edge] = mids + level.wcvs
        positions = fine
    return TriangleMesh(positions, levels[0].fine_triangles)


def dump_decomposition(decomposition, directory):
    """Write one text file per level listing 'edge a b : wx wy wz' in
    synchronization order (descending edge-normal norm of the level's
    coarse mesh)."""
    import os

    from .watermark import compute_sync_order

    os.makedirs(directory, exist_ok=True)
    paths = []
    for li, level in enumerate(decomposition.levels):
        sync = compute_sync_order(level.coarse)
        path = os.path.join(directory, f"level_{li:02d}.txt")
        with open(path, "w", encoding="utf-8") as fh:
            for row in sync.edge_rows:
                a, b = level.coarse.edges[row]
                wx, wy, wz = level.wcvs[row]
                fh.write(f"edge {a} {b} : {wx:.17g} {wy:.17g} {wz:.17g}\n")
        paths.append(path)
    return paths
