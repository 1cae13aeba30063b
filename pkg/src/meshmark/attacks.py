"""Deterministic, parameterized robustness attacks.

Every attack is a pure function from mesh to mesh; stochastic ones take an
explicit seed, so the same spec always reproduces the same output mesh.
Specs serialize as flat JSON objects {"kind": ..., <params>, "seed": ...}
and the bench harness consumes arrays of them.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import GeometryError
from .mesh import vertex_neighbors
from .multires import loop_subdivide, midpoint_subdivide


def rotation_matrix(axis, angle_deg):
    """Rodrigues rotation about an arbitrary axis."""
    axis = np.asarray(axis, dtype=np.float64)
    n = np.linalg.norm(axis)
    if n == 0:
        raise ValueError("rotation axis must be nonzero")
    x, y, z = axis / n
    theta = np.deg2rad(angle_deg)
    c, s = np.cos(theta), np.sin(theta)
    k = np.array([[0, -z, y], [z, 0, -x], [-y, x, 0]])
    return np.eye(3) + s * k + (1 - c) * (k @ k)


def similarity_transform(mesh, translation=(0.0, 0.0, 0.0),
                         rotation_axis=(0.0, 0.0, 1.0), rotation_deg=0.0,
                         scale=1.0):
    """v -> scale * R v + t for every vertex; connectivity untouched."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    r = rotation_matrix(rotation_axis, rotation_deg)
    t = np.asarray(translation, dtype=np.float64)
    return mesh.replace_vertices(scale * (mesh.vertices @ r.T) + t)


def add_noise(mesh, amplitude_pct, seed):
    """Displace each vertex along an independent uniform random direction
    by a magnitude drawn uniformly from [0, amplitude_pct/100 * D].

    D is the mean distance from the vertices to their centroid (robust
    reference scale; a bounding box would be dominated by outliers).
    """
    if amplitude_pct < 0:
        raise ValueError("amplitude_pct must be >= 0")
    v = mesh.vertices
    centroid = v.mean(axis=0)
    d_ref = float(np.linalg.norm(v - centroid, axis=1).mean())
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((len(v), 3))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    magnitudes = rng.uniform(0.0, amplitude_pct / 100.0 * d_ref, size=len(v))
    return mesh.replace_vertices(v + directions * magnitudes[:, None])


def _uniform_averaging_matrix(mesh):
    neighbors = vertex_neighbors(mesh)
    rows, cols, vals = [], [], []
    for i, nb in enumerate(neighbors):
        if len(nb) == 0:
            raise GeometryError(f"vertex {i} is isolated; cannot smooth")
        rows.extend([i] * len(nb))
        cols.extend(int(j) for j in nb)
        vals.extend([1.0 / len(nb)] * len(nb))
    n = mesh.n_vertices
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def laplacian_smooth(mesh, iterations, relax):
    """Simultaneous relaxation: v <- v + relax * (mean(neighbors) - v)."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if not 0 < relax <= 1:
        raise ValueError("relax must be in (0, 1]")
    avg = _uniform_averaging_matrix(mesh)
    v = mesh.vertices.copy()
    for _ in range(iterations):
        v = v + relax * (avg @ v - v)
    return mesh.replace_vertices(v)


def taubin_smooth(mesh, iterations, lam=0.33, mu=-0.34):
    """Shrink-compensated variant: alternate a positive and a negative
    relaxation step per iteration."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    avg = _uniform_averaging_matrix(mesh)
    v = mesh.vertices.copy()
    for _ in range(iterations):
        v = v + lam * (avg @ v - v)
        v = v + mu * (avg @ v - v)
    return mesh.replace_vertices(v)


def quantize_coords(mesh, bits):
    """Snap each coordinate to a per-axis uniform grid of 2**bits levels
    spanning the axis range. Degenerate (constant) axes pass through."""
    if not 4 <= bits <= 16:
        raise ValueError("bits must be in [4, 16]")
    v = mesh.vertices.copy()
    levels = 2**bits - 1
    lo = v.min(axis=0)
    hi = v.max(axis=0)
    for axis in range(3):
        span = hi[axis] - lo[axis]
        if span == 0.0:
            continue
        q = np.rint((v[:, axis] - lo[axis]) / span * levels)
        v[:, axis] = lo[axis] + q / levels * span
    return mesh.replace_vertices(v)


def subdivide_attack(mesh, scheme):
    """One refinement iteration (midpoint keeps, Loop moves, the original
    vertices)."""
    if scheme == "midpoint":
        fine, _ = midpoint_subdivide(mesh)
        return fine
    if scheme == "loop":
        return loop_subdivide(mesh)
    raise ValueError(f"unknown subdivision scheme {scheme!r}")


@dataclass(frozen=True)
class AttackSpec:
    """Serializable attack description."""

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def label(self):
        """Compact human-readable identifier for reports."""
        if not self.params:
            return self.kind
        parts = []
        for k in sorted(self.params):
            val = self.params[k]
            if isinstance(val, (list, tuple)):
                val = ",".join(str(x) for x in val)
            parts.append(f"{k}={val}")
        return f"{self.kind}({'; '.join(parts)})"

    def to_json(self):
        obj = {"kind": self.kind, **self.params}
        if self.kind == "noise":
            obj["seed"] = self.seed
        return obj


_KNOWN_KINDS = {
    "none": (),
    "translate": ("offset",),
    "rotate": ("axis", "angle_deg"),
    "uniform_scale": ("factor",),
    "combined_similarity": ("offset", "axis", "angle_deg", "factor"),
    "noise": ("amplitude_pct",),
    "laplacian_smooth": ("iterations", "relax"),
    "taubin_smooth": ("iterations", "lam", "mu"),
    "quantize_coords": ("bits",),
    "subdivide_midpoint": (),
    "subdivide_loop": (),
}


def parse_attack_spec(obj):
    """Validate one JSON attack object into an AttackSpec."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError(f"attack spec must be an object with 'kind': {obj!r}")
    kind = obj["kind"]
    if kind not in _KNOWN_KINDS:
        raise ValueError(
            f"unknown attack kind {kind!r}; known: {sorted(_KNOWN_KINDS)}"
        )
    params = {k: v for k, v in obj.items() if k not in ("kind", "seed")}
    unknown = set(params) - set(_KNOWN_KINDS[kind])
    if unknown:
        raise ValueError(f"unknown parameters for {kind!r}: {sorted(unknown)}")
    return AttackSpec(kind=kind, params=params, seed=int(obj.get("seed", 0)))


def apply_attack(mesh, spec):
    """Execute one AttackSpec."""
    kind, p = spec.kind, spec.params
    if kind == "none":
        return mesh
    if kind == "translate":
        return similarity_transform(mesh, translation=p["offset"])
    if kind == "rotate":
        return similarity_transform(
            mesh, rotation_axis=p.get("axis", (0, 0, 1)),
            rotation_deg=p["angle_deg"],
        )
    if kind == "uniform_scale":
        return similarity_transform(mesh, scale=p["factor"])
    if kind == "combined_similarity":
        return similarity_transform(
            mesh,
            translation=p.get("offset", (0, 0, 0)),
            rotation_axis=p.get("axis", (0, 0, 1)),
            rotation_deg=p.get("angle_deg", 0.0),
            scale=p.get("factor", 1.0),
        )
    if kind == "noise":
        return add_noise(mesh, p["amplitude_pct"], spec.seed)
    if kind == "laplacian_smooth":
        return laplacian_smooth(mesh, p["iterations"], p.get("relax", 0.1))
    if kind == "taubin_smooth":
        return taubin_smooth(
            mesh, p["iterations"], p.get("lam", 0.33), p.get("mu", -0.34)
        )
    if kind == "quantize_coords":
        return quantize_coords(mesh, p["bits"])
    if kind == "subdivide_midpoint":
        return subdivide_attack(mesh, "midpoint")
    if kind == "subdivide_loop":
        return subdivide_attack(mesh, "loop")
    raise ValueError(f"unknown attack kind {kind!r}")


def apply_attacks(mesh, specs):
    """Apply a sequence of specs in order."""
    for spec in specs:
        mesh = apply_attack(mesh, spec)
    return mesh
