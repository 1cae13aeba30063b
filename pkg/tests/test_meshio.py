import os

import numpy as np
import pytest

from meshmark.errors import MeshParseError, TopologyError
from meshmark.generate import semiregular_mesh
from meshmark.meshio import load_mesh, save_mesh


@pytest.mark.parametrize("fmt", ["off", "obj"])
def test_round_trip_tetra(tetra, tmp_path, fmt):
    path = str(tmp_path / f"tetra.{fmt}")
    save_mesh(tetra, path)
    back = load_mesh(path)
    assert np.array_equal(back.triangles, tetra.triangles)
    assert np.array_equal(back.vertices, tetra.vertices)


@pytest.mark.parametrize("fmt", ["off", "obj"])
def test_round_trip_icosphere_exact(tmp_path, fmt):
    mesh = semiregular_mesh("icosa", 3, "sphere")
    path = str(tmp_path / f"s.{fmt}")
    save_mesh(mesh, path)
    back = load_mesh(path)
    assert np.array_equal(back.triangles, mesh.triangles)
    # 17 significant digits reproduce doubles exactly
    assert np.abs(back.vertices - mesh.vertices).max() <= 1e-15
    assert np.array_equal(back.vertices, mesh.vertices)


def test_load_off_with_comments_and_blank_lines(tmp_path):
    path = tmp_path / "c.off"
    path.write_text(
        "OFF\n# a comment\n\n4 4 6\n"
        "1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n"
        "3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n"
    )
    mesh = load_mesh(str(path))
    assert mesh.n_vertices == 4 and mesh.n_triangles == 4


def test_load_off_counts_on_header_line(tmp_path):
    path = tmp_path / "h.off"
    path.write_text(
        "OFF 4 4 6\n"
        "1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n"
        "3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n"
    )
    assert load_mesh(str(path)).n_vertices == 4


def test_load_obj_with_slash_indices(tmp_path):
    path = tmp_path / "s.obj"
    path.write_text(
        "v 1 1 1\nv 1 -1 -1\nv -1 1 -1\nv -1 -1 1\n"
        "f 1/1 2/2 3/3\nf 1//1 4//4 2//2\nf 1 3 4\nf 2 4 3\n"
    )
    assert load_mesh(str(path)).n_triangles == 4


def test_missing_header_is_parse_error(tmp_path):
    path = tmp_path / "bad.off"
    path.write_text("4 4 6\n0 0 0\n")
    with pytest.raises(MeshParseError, match="OFF header"):
        load_mesh(str(path))


def test_out_of_range_face_index_is_error(tmp_path):
    path = tmp_path / "oor.off"
    path.write_text("OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 99\n")
    with pytest.raises(MeshParseError, match="out of range"):
        load_mesh(str(path))


def test_truncated_file_is_parse_error(tmp_path):
    path = tmp_path / "t.off"
    path.write_text("OFF\n4 4 6\n0 0 0\n1 0 0\n")
    with pytest.raises(MeshParseError, match="expected 4 vertices"):
        load_mesh(str(path))


def test_non_triangle_face_rejected(tmp_path):
    path = tmp_path / "quad.off"
    path.write_text("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
    with pytest.raises(MeshParseError, match="triangle"):
        load_mesh(str(path))


def test_open_mesh_rejected_by_default(tmp_path):
    path = tmp_path / "open.off"
    path.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    with pytest.raises(TopologyError, match="boundary"):
        load_mesh(str(path))
    patch = load_mesh(str(path), require_closed=False)
    assert patch.n_triangles == 1


def test_unwritable_path_raises(tetra):
    with pytest.raises(OSError):
        save_mesh(tetra, "/nonexistent-dir/x/y/mesh.off")


def test_format_inference_requires_known_extension(tetra, tmp_path):
    with pytest.raises(ValueError, match="cannot infer"):
        save_mesh(tetra, str(tmp_path / "mesh.ply"))
    # explicit fmt overrides the extension
    path = str(tmp_path / "mesh.dat")
    save_mesh(tetra, path, fmt="off")
    assert load_mesh(path, fmt="off").n_vertices == 4


def test_save_load_save_is_stable(tetra, tmp_path):
    p1 = str(tmp_path / "a.off")
    p2 = str(tmp_path / "b.off")
    save_mesh(tetra, p1)
    save_mesh(load_mesh(p1), p2)
    assert open(p1).read() == open(p2).read()
