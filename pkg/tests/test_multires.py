import numpy as np
import pytest

from conftest import random_rotation
from meshmark.errors import NotSemiregularError, TopologyError
from meshmark.generate import semiregular_mesh
from meshmark.multires import (
    SubdivisionMap,
    _loop_beta,
    analyze,
    coarsen,
    detect_inverse_subdivision,
    dump_decomposition,
    loop_subdivide,
    midpoint_subdivide,
    synthesize,
)

ICOSA_EDGE_DOT = 1.0 / np.sqrt(5.0)  # cos of the central angle of an edge


def connectivity_key(mesh):
    tris = np.sort(mesh.triangles, axis=1)
    order = np.lexsort((tris[:, 2], tris[:, 1], tris[:, 0]))
    return tris[order]


def test_midpoint_counts_tetra(tetra):
    fine, _ = midpoint_subdivide(tetra)
    assert fine.n_vertices == 10  # V + E
    assert fine.n_triangles == 16


def test_midpoint_counts_icosa(icosa):
    fine, _ = midpoint_subdivide(icosa)
    assert fine.n_vertices == 42
    assert fine.n_triangles == 80


def test_midpoint_twice_tetra(tetra):
    fine, _ = midpoint_subdivide(midpoint_subdivide(tetra)[0])
    assert fine.n_vertices == 34
    assert fine.n_triangles == 64


def test_midpoint_keeps_even_positions(icosa):
    fine, smap = midpoint_subdivide(icosa)
    assert np.array_equal(fine.vertices[:12], icosa.vertices)
    smap.validate(fine)


def test_midpoint_map_invariants(icosa):
    fine, smap = midpoint_subdivide(icosa)
    # every odd vertex maps to a coarse edge; centers are all-odd
    assert len(smap.odd_assignment) == icosa.n_edges
    centers = fine.triangles[smap.triangle_groups[:, 3]]
    assert (centers >= 12).all()


def test_loop_beta_valence_six():
    assert _loop_beta(6) == pytest.approx(0.0625, abs=1e-15)


def test_loop_counts_and_face_quadrupling(icosa):
    fine = loop_subdivide(icosa)
    assert fine.n_triangles == 4 * icosa.n_triangles
    assert fine.n_vertices == icosa.n_vertices + icosa.n_edges


def test_loop_positions_against_direct_masks(icosa):
    fine = loop_subdivide(icosa)
    v = icosa.vertices
    # even vertex 0: valence 5 for the icosahedron
    from meshmark.mesh import adjacency

    nb, ef = adjacency(icosa)
    n = len(nb[0])
    beta = (5.0 / 8.0 - (3.0 / 8.0 + 0.25 * np.cos(2 * np.pi / n)) ** 2) / n
    expected = (1 - n * beta) * v[0] + beta * v[nb[0]].sum(axis=0)
    assert np.allclose(fine.vertices[0], expected, atol=1e-15)
    # odd vertex on edge (a, b): 3/8 (a+b) + 1/8 (c+d)
    a, b = icosa.edges[0]
    faces = ef[(int(a), int(b))]
    opp = []
    for f in faces:
        tri = icosa.triangles[f]
        opp.append(tri[(tri != a) & (tri != b)][0])
    expected_odd = 0.375 * (v[a] + v[b]) + 0.125 * (v[opp[0]] + v[opp[1]])
    assert np.allclose(fine.vertices[12 + 0], expected_odd, atol=1e-15)


def test_loop_preserves_tetra_symmetry(tetra):
    fine = loop_subdivide(tetra)
    # vertex orbits: 4 corners, 6 midpoints; each orbit keeps a single
    # distance-to-centroid value under the tetrahedral symmetry group
    r = np.linalg.norm(fine.vertices - fine.vertices.mean(axis=0), axis=1)
    assert np.ptp(r[:4]) <= 1e-12
    assert np.ptp(r[4:]) <= 1e-12


def test_detect_recovers_midpoint_subdivision(icosa):
    fine, _ = midpoint_subdivide(icosa)
    smap = detect_inverse_subdivision(fine)
    coarse = coarsen(fine, smap)
    assert coarse.n_vertices == 12 and coarse.n_triangles == 20
    assert np.array_equal(connectivity_key(coarse), connectivity_key(icosa))


def test_detect_rejects_tetra(tetra):
    with pytest.raises(NotSemiregularError):
        detect_inverse_subdivision(tetra)


def test_detect_rejects_octahedron(octa):
    with pytest.raises(NotSemiregularError):
        detect_inverse_subdivision(octa)


def test_detect_twice(icosa):
    fine1, _ = midpoint_subdivide(icosa)
    fine2, _ = midpoint_subdivide(fine1)
    smap2 = detect_inverse_subdivision(fine2)
    mid = coarsen(fine2, smap2)
    smap1 = detect_inverse_subdivision(mid)
    coarse = coarsen(mid, smap1)
    assert np.array_equal(connectivity_key(coarse), connectivity_key(icosa))


def test_detect_is_connectivity_only(icosphere3):
    rng = np.random.default_rng(5)
    scrambled = icosphere3.replace_vertices(
        rng.normal(size=icosphere3.vertices.shape)
    )
    a = detect_inverse_subdivision(icosphere3)
    b = detect_inverse_subdivision(scrambled)
    assert np.array_equal(a.even_vertices, b.even_vertices)
    assert a.odd_assignment == b.odd_assignment
    assert np.array_equal(a.triangle_groups, b.triangle_groups)
    assert np.array_equal(a.coarse_triangles, b.coarse_triangles)


def test_coarsen_inverts_midpoint(icosphere3):
    fine, smap = midpoint_subdivide(icosphere3)
    coarse = coarsen(fine, smap)
    assert np.array_equal(coarse.vertices, icosphere3.vertices)
    assert np.array_equal(coarse.triangles, icosphere3.triangles)


def test_coarsen_rejects_corrupted_map(icosa):
    fine, smap = midpoint_subdivide(icosa)
    groups = smap.triangle_groups.copy()
    groups[0, 3] = groups[0, 0]  # center slot points at a corner triangle
    bad = SubdivisionMap(
        even_vertices=smap.even_vertices,
        odd_assignment=smap.odd_assignment,
        triangle_groups=groups,
        coarse_triangles=smap.coarse_triangles,
    )
    with pytest.raises(TopologyError):
        coarsen(fine, bad)


def test_analyze_zero_coefficients_for_midpoint(icosa):
    fine, _ = midpoint_subdivide(icosa)
    dec = analyze(fine, 1)
    assert dec.depth == 1
    assert len(dec.levels[0].wcvs) == 30
    assert np.abs(dec.levels[0].wcvs).max() == 0.0


def test_analyze_icosphere_level1_radial_closed_form(icosa):
    sphere1 = semiregular_mesh("icosa", 1, "sphere")
    dec = analyze(sphere1, 1)
    level = dec.levels[0]
    # every coefficient points radially outward with identical norm
    # 1 - |midpoint| derived from the icosahedron edge geometry
    expected = 1.0 - np.sqrt((1.0 + ICOSA_EDGE_DOT) / 2.0)
    norms = np.linalg.norm(level.wcvs, axis=1)
    assert np.abs(norms - expected).max() <= 1e-12
    odd = level.wcvs / norms[:, None]
    directions = sphere1.vertices[level.odd_by_edge]
    directions = directions / np.linalg.norm(directions, axis=1)[:, None]
    assert np.abs((odd * directions).sum(axis=1) - 1.0).max() <= 1e-12


def test_analyze_counting_invariants(icosphere3):
    dec = analyze(icosphere3, 5)
    assert dec.depth == 3
    fine_counts = [icosphere3.n_vertices, 162, 42]
    for level, v_fine in zip(dec.levels, fine_counts):
        assert level.n_fine_vertices == v_fine
        assert len(level.wcvs) == level.coarse.n_edges
        assert v_fine == level.coarse.n_vertices + level.coarse.n_edges


def test_analyze_respects_max_levels(icosphere3):
    dec = analyze(icosphere3, 2)
    assert dec.depth == 2
    assert dec.coarsest.n_vertices == 42


def test_analyze_rejects_non_semiregular(icosa):
    with pytest.raises(NotSemiregularError):
        analyze(icosa, 3)


@pytest.mark.parametrize("levels", [1, 2, 3])
def test_perfect_reconstruction(fixtures_by_name, levels):
    for mesh in fixtures_by_name.values():
        dec = analyze(mesh, levels)
        rec = synthesize(dec)
        assert np.array_equal(rec.triangles, mesh.triangles)
        err = np.abs(rec.vertices - mesh.vertices).max()
        assert err <= 1e-12 * mesh.bbox_diagonal()


def test_synthesize_zeroed_coefficients_gives_midpoint_mesh(icosa):
    sphere1 = semiregular_mesh("icosa", 1, "sphere")
    dec = analyze(sphere1, 1)
    zeroed = dec.with_level_wcvs(0, np.zeros_like(dec.levels[0].wcvs))
    flat = synthesize(zeroed)
    expected, _ = midpoint_subdivide(dec.levels[0].coarse)
    assert np.array_equal(connectivity_key(flat), connectivity_key(expected))
    assert np.abs(flat.vertices - expected.vertices).max() <= 1e-15


def test_doubling_one_coefficient_moves_one_vertex(icosphere3):
    dec = analyze(icosphere3, 1)
    level = dec.levels[0]
    wcvs = level.wcvs.copy()
    wcvs[7] *= 2.0
    moved = synthesize(dec.with_level_wcvs(0, wcvs))
    diff = np.linalg.norm(moved.vertices - icosphere3.vertices, axis=1)
    moved_ids = np.flatnonzero(diff > 1e-14)
    assert np.array_equal(moved_ids, [level.odd_by_edge[7]])
    delta = moved.vertices[level.odd_by_edge[7]] - icosphere3.vertices[
        level.odd_by_edge[7]
    ]
    assert np.allclose(delta, level.wcvs[7], atol=1e-14)


def test_analysis_equivariance_rotation(icosphere3):
    r = random_rotation(9)
    rotated = icosphere3.replace_vertices(icosphere3.vertices @ r.T)
    dec0 = analyze(icosphere3, 2)
    dec1 = analyze(rotated, 2)
    for l0, l1 in zip(dec0.levels, dec1.levels):
        assert np.abs(l1.wcvs - l0.wcvs @ r.T).max() <= 1e-9


def test_analysis_equivariance_scale(icosphere3):
    scaled = icosphere3.replace_vertices(icosphere3.vertices * 1.7)
    dec0 = analyze(icosphere3, 2)
    dec1 = analyze(scaled, 2)
    for l0, l1 in zip(dec0.levels, dec1.levels):
        assert np.abs(l1.wcvs - 1.7 * l0.wcvs).max() <= 1e-9


def test_detect_deterministic_repeat(icosphere3):
    a = detect_inverse_subdivision(icosphere3)
    b = detect_inverse_subdivision(icosphere3)
    assert np.array_equal(a.triangle_groups, b.triangle_groups)


def test_dump_decomposition(tmp_path, icosphere3):
    dec = analyze(icosphere3, 2)
    paths = dump_decomposition(dec, str(tmp_path / "dump"))
    assert len(paths) == 2
    lines = open(paths[1]).read().strip().splitlines()
    assert len(lines) == dec.levels[1].coarse.n_edges
    assert lines[0].startswith("edge ")
