"""OFF and OBJ reading/writing.

Writers emit 17 significant digits so a save/load round trip reproduces
double-precision coordinates exactly.
"""

import os

import numpy as np

from .errors import MeshParseError, TopologyError
from .mesh import TriangleMesh, validate_closed_manifold

_FLOAT_FMT = "%.17g"


def _detect_format(path, fmt):
    if fmt is not None:
        fmt = fmt.lower()
        if fmt not in ("off", "obj"):
            raise ValueError(f"unsupported mesh format: {fmt!r}")
        return fmt
    ext = os.path.splitext(path)[1].lower()
    if ext == ".off":
        return "off"
    if ext == ".obj":
        return "obj"
    raise ValueError(f"cannot infer mesh format from {path!r}; pass fmt=")


def load_mesh(path, fmt=None, require_closed=True):
    """Read a triangle mesh from an OFF or OBJ file.

    Raises MeshParseError on malformed input and TopologyError when the
    connectivity is not a closed orientable manifold (unless
    require_closed=False, for metric-only inputs).
    """
    fmt = _detect_format(path, fmt)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    if fmt == "off":
        mesh = _parse_off(lines, path)
    else:
        mesh = _parse_obj(lines, path)
    if require_closed:
        validate_closed_manifold(mesh)
    return mesh


def save_mesh(mesh, path, fmt=None):
    """Write a mesh as OFF or OBJ (inferred from the extension)."""
    fmt = _detect_format(path, fmt)
    with open(path, "w", encoding="utf-8") as fh:
        if fmt == "off":
            fh.write("OFF\n")
            fh.write(f"{mesh.n_vertices} {mesh.n_triangles} 0\n")
            for x, y, z in mesh.vertices:
                fh.write(f"{_FLOAT_FMT % x} {_FLOAT_FMT % y} {_FLOAT_FMT % z}\n")
            for a, b, c in mesh.triangles:
                fh.write(f"3 {a} {b} {c}\n")
        else:
            for x, y, z in mesh.vertices:
                fh.write(f"v {_FLOAT_FMT % x} {_FLOAT_FMT % y} {_FLOAT_FMT % z}\n")
            for a, b, c in mesh.triangles:
                fh.write(f"f {a + 1} {b + 1} {c + 1}\n")


def _content_lines(lines):
    """Yield (lineno, stripped text) skipping blanks and # comments."""
    for i, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if text:
            yield i, text


def _parse_off(lines, path):
    it = _content_lines(lines)
    try:
        lineno, header = next(it)
    except StopIteration:
        raise MeshParseError(f"{path}: empty file") from None
    tokens = header.split()
    if tokens[0] != "OFF":
        raise MeshParseError(f"{path}:{lineno}: missing OFF header")
    counts = tokens[1:]
    if not counts:
        try:
            lineno, text = next(it)
        except StopIteration:
            raise MeshParseError(f"{path}: missing count line") from None
        counts = text.split()
    if len(counts) != 3:
        raise MeshParseError(f"{path}:{lineno}: expected 'V F E' counts")
    try:
        n_v, n_f = int(counts[0]), int(counts[1])
    except ValueError:
        raise MeshParseError(f"{path}:{lineno}: bad counts {counts!r}") from None

    vertices = np.empty((n_v, 3))
    for k in range(n_v):
        try:
            lineno, text = next(it)
        except StopIteration:
            raise MeshParseError(f"{path}: expected {n_v} vertices, got {k}") from None
        parts = text.split()
        if len(parts) < 3:
            raise MeshParseError(f"{path}:{lineno}: vertex needs 3 coordinates")
        try:
            vertices[k] = [float(p) for p in parts[:3]]
        except ValueError:
            raise MeshParseError(f"{path}:{lineno}: bad coordinate") from None

    triangles = np.empty((n_f, 3), dtype=np.int64)
    for k in range(n_f):
        try:
            lineno, text = next(it)
        except StopIteration:
            raise MeshParseError(f"{path}: expected {n_f} faces, got {k}") from None
        parts = text.split()
        try:
            arity = int(parts[0])
        except ValueError:
            raise MeshParseError(f"{path}:{lineno}: bad face line") from None
        if arity != 3 or len(parts) < 4:
            raise MeshParseError(
                f"{path}:{lineno}: only triangle faces are supported"
            )
        try:
            triangles[k] = [int(p) for p in parts[1:4]]
        except ValueError:
            raise MeshParseError(f"{path}:{lineno}: bad face index") from None

    return _build(vertices, triangles, path)


def _parse_obj(lines, path):
    vertices = []
    faces = []
    for lineno, text in _content_lines(lines):
        parts = text.split()
        if parts[0] == "v":
            if len(parts) < 4:
                raise MeshParseError(f"{path}:{lineno}: vertex needs 3 coordinates")
            try:
                vertices.append([float(p) for p in parts[1:4]])
            except ValueError:
                raise MeshParseError(f"{path}:{lineno}: bad coordinate") from None
        elif parts[0] == "f":
            if len(parts) != 4:
                raise MeshParseError(
                    f"{path}:{lineno}: only triangle faces are supported"
                )
            idx = []
            for p in parts[1:]:
                head = p.split("/", 1)[0]
                try:
                    i = int(head)
                except ValueError:
                    raise MeshParseError(f"{path}:{lineno}: bad face index") from None
                if i < 1:
                    raise MeshParseError(
                        f"{path}:{lineno}: only positive 1-based indices supported"
                    )
                idx.append(i - 1)
            faces.append(idx)
        # other directives (vn, vt, o, g, s, usemtl, ...) are ignored
    if not vertices:
        raise MeshParseError(f"{path}: no vertices found")
    return _build(
        np.asarray(vertices, dtype=np.float64),
        np.asarray(faces, dtype=np.int64).reshape(-1, 3),
        path,
    )


def _build(vertices, triangles, path):
    try:
        return TriangleMesh(vertices, triangles)
    except TopologyError as exc:
        raise MeshParseError(f"{path}: {exc}") from exc
