"""Central numeric configuration.

Every tolerance used by the geometry, analysis, and watermarking code lives
in one record so that precision policy can be audited (and overridden) in a
single place.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # Triangle area below which a face counts as degenerate for normals.
    degenerate_area: float = 1e-30
    # Edge-normal norms closer than this are treated as tied when building
    # the synchronization order (ties then fall back to index order, which
    # is stable under every attack that preserves vertex numbering). The
    # width must exceed the norm churn of the attack suite (noise,
    # quantization, smoothing all move norms by up to a few 1e-3 at their
    # strongest benchmarked settings), otherwise near-tied slots swap
    # positions and desynchronize the payload.
    sync_tie: float = 0.05
    # Slots whose coefficient-vector norm is below this fraction of the mean
    # coarse edge length are skipped on both the embedding and the
    # extraction side (rescaling a near-zero vector is direction-undefined).
    zero_wcv_rel: float = 1e-12
    # Cotangent weights are clamped to +-cot_clamp to keep the discrete
    # curvature finite on near-degenerate triangles.
    cot_clamp: float = 1e6
    # Guard denominator for the perceptual metric comparison functions.
    msdm_eps: float = 1e-30


DEFAULT_TOLERANCES = Tolerances()

# Imperceptibility/robustness trade-off parameter: quantization step is
# (mean edge-normal norm) / lambda. Calibrated on the generated sphere
# fixtures: smaller values widen the decode margin (robustness against
# noise and coordinate quantization) at the cost of a proportionally
# larger embedding displacement.
DEFAULT_LAMBDA = 10.0

# Distortion-compensation factor of the dithered quantizer; 1/2 is the
# security-optimal choice.
DEFAULT_GAMMA = 0.5

DEFAULT_N_BITS = 64

# Upper bound on the number of analysis levels peeled during decomposition.
DEFAULT_MAX_LEVELS = 5
