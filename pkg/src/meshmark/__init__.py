"""Blind robust watermarking of semiregular triangle meshes.

Public surface: mesh container and I/O, subdivision/wavelet analysis,
watermark embed/extract, the attack suite, distortion metrics, and the
benchmark harness. See the README for the CLI.
"""

__version__ = "0.1.0"

from .attacks import (
    AttackSpec,
    add_noise,
    apply_attack,
    apply_attacks,
    laplacian_smooth,
    parse_attack_spec,
    quantize_coords,
    similarity_transform,
    subdivide_attack,
    taubin_smooth,
)
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    CapacityError,
    GeometryError,
    MeshmarkError,
    MeshParseError,
    NotSemiregularError,
    TopologyError,
)
from .generate import semiregular_mesh
from .mesh import (
    TriangleMesh,
    adjacency,
    edge_normal_norm,
    edge_normal_norms,
    validate_closed_manifold,
    vertex_normals,
)
from .meshio import load_mesh, save_mesh
from .metrics import (
    MetricReport,
    curvature_field,
    evaluate_meshes,
    hausdorff,
    mrms,
    msdm,
    rms_distance,
)
from .multires import (
    SubdivisionMap,
    WaveletDecomposition,
    analyze,
    coarsen,
    detect_inverse_subdivision,
    loop_subdivide,
    midpoint_subdivide,
    synthesize,
)
from .watermark import (
    EmbedResult,
    ExtractResult,
    ScsParams,
    SyncOrder,
    compute_sync_order,
    correlation,
    dither_sequence,
    embed,
    extract,
    quantization_step,
    scs_codeword,
    scs_decode_value,
    scs_embed_value,
)
