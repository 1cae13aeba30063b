"""Blind watermark embedding and extraction.

The payload is carried by the norms of the coefficient vectors at the
deepest analysis level that still offers one slot (coarse edge) per payload
bit. Slots are ordered by descending edge-normal norm of that level's
coarse mesh -- a quantity built purely from unit vectors, hence invariant
under translation, rotation, and uniform scaling -- and each slot's
norm-to-mean-edge-length ratio is quantized with a keyed dithered
two-codebook lattice.

Dither stream (wire-level contract, reproduced bit-exactly at extraction):
    t_i = Q_S * U_i,   U_i = int_be(SHA-256(key || b":" || uint64_be(i))[:8]) / 2**64
where i is the slot position in the synchronization order.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from .config import (
    DEFAULT_GAMMA,
    DEFAULT_LAMBDA,
    DEFAULT_MAX_LEVELS,
    DEFAULT_N_BITS,
    DEFAULT_TOLERANCES,
)
from .errors import CapacityError, GeometryError
from .mesh import edge_lengths, edge_normal_norms, vertex_normals
from .multires import analyze, synthesize


@dataclass(frozen=True)
class ScsParams:
    """Embedding parameters shared (secretly) by embedder and extractor."""

    lam: float = DEFAULT_LAMBDA
    gamma: float = DEFAULT_GAMMA
    key: bytes = b""
    n_bits: int = DEFAULT_N_BITS
    # Quantize raw coefficient norms instead of the scale-invariant
    # norm / mean-edge-length ratio (fidelity experiments only; raw norms
    # do not survive uniform scaling).
    raw_norms: bool = False

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if self.n_bits < 1:
            raise ValueError("n_bits must be >= 1")
        if isinstance(self.key, str):
            object.__setattr__(self, "key", self.key.encode("utf-8"))


@dataclass(frozen=True)
class SyncOrder:
    """Deterministic slot ordering over the edges of a coarse mesh.

    Edges are sorted by descending edge-normal norm. Norms closer than the
    tie tolerance form a tie class ordered by sorted endpoint indices;
    index order is stable under every supported attack (none renumbers
    vertices, and detection-derived coarse indices depend on connectivity
    only), which keeps the slot sequence similarity-invariant even on
    highly symmetric meshes where whole classes of norms coincide.
    """

    edge_rows: np.ndarray  # permutation into mesh.edges
    edges: np.ndarray      # (E, 2) endpoint pairs in slot order
    norms: np.ndarray      # edge-normal norms in slot order
    n_av: float            # mean edge-normal norm over all edges
    l_av: float            # mean edge length over all edges

    def __len__(self):
        return len(self.edge_rows)


def compute_sync_order(coarse_mesh, tolerances=DEFAULT_TOLERANCES):
    """Order the coarse mesh's edges for slot assignment."""
    normals = vertex_normals(coarse_mesh, tolerances)
    norms = edge_normal_norms(coarse_mesh, normals)
    lengths = edge_lengths(coarse_mesh)
    order = np.argsort(-norms, kind="stable")
    keys = coarse_mesh.edges
    tol = tolerances.sync_tie

    rows = np.empty(len(order), dtype=np.int64)
    pos = 0
    i = 0
    n = len(order)
    while i < n:
        anchor = norms[order[i]]
        j = i + 1
        while j < n and anchor - norms[order[j]] <= tol:
            j += 1
        cluster = order[i:j]
        ek = keys[cluster]
        sub = np.lexsort((ek[:, 1], ek[:, 0]))
        rows[pos:pos + len(cluster)] = cluster[sub]
        pos += len(cluster)
        i = j
    return SyncOrder(
        edge_rows=rows,
        edges=keys[rows],
        norms=norms[rows],
        n_av=float(norms.mean()),
        l_av=float(lengths.mean()),
    )


def quantization_step(sync, params):
    """Q_S = (mean edge-normal norm) / lambda."""
    if len(sync) == 0:
        raise ValueError("synchronization order is empty")
    if sync.n_av == 0.0:
        raise GeometryError(
            "mean edge-normal norm is zero; quantization step undefined"
        )
    return sync.n_av / params.lam


def dither_sequence(key, count, q_s):
    """Keyed per-slot dither offsets in [0, Q_S).

    Implemented with SHA-256 (see module docstring) so the stream is stable
    across platforms and library versions.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if isinstance(key, str):
        key = key.encode("utf-8")
    out = np.empty(count)
    for i in range(count):
        h = hashlib.sha256(key + b":" + i.to_bytes(8, "big")).digest()
        out[i] = int.from_bytes(h[:8], "big") / 2.0**64
    return out * q_s


def scs_codeword(x, bit, q_s, t):
    """Nearest codeword of the bit's sub-lattice {z*Q_S + bit*Q_S/2 + t}.

    Exact ties between two codewords resolve to the smaller one.
    """
    if q_s <= 0:
        raise ValueError("q_s must be positive")
    if not 0 <= t < q_s:
        raise ValueError("dither must lie in [0, q_s)")
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    return float(_nearest_codeword(float(x), bit, q_s, t))


def _nearest_codeword(x, bit, q_s, t):
    offset = 0.5 * q_s * bit + t
    # ceil(v - 0.5) rounds to nearest with ties toward the smaller integer
    z = np.ceil((x - offset) / q_s - 0.5)
    return z * q_s + offset


def scs_embed_value(x, bit, q_s, t, gamma):
    """Move x a gamma-fraction of the way to its bit's nearest codeword."""
    u = scs_codeword(x, bit, q_s, t)
    return float(x + gamma * (u - x))


def scs_decode_value(x, q_s, t):
    """Bit of the globally nearest codeword (ties decode as 0)."""
    if q_s <= 0:
        raise ValueError("q_s must be positive")
    d0 = abs(x - _nearest_codeword(x, 0, q_s, t))
    d1 = abs(x - _nearest_codeword(x, 1, q_s, t))
    return 0 if d0 <= d1 else 1


def _decode_array(x, q_s, t):
    d0 = np.abs(x - _nearest_codeword(x, 0, q_s, t))
    d1 = np.abs(x - _nearest_codeword(x, 1, q_s, t))
    return (d1 < d0).astype(np.int8)


@dataclass(frozen=True)
class EmbedResult:
    mesh: object
    levels_peeled: int      # total analysis depth J
    embed_depth: int        # peels from the input mesh to the slot level
    slots: int
    skipped_slots: int
    q_s: float
    n_av: float
    l_av: float
    # max vertex displacement guaranteed by the quantizer geometry
    displacement_bound: float

    def summary(self):
        return {
            "levels_peeled": self.levels_peeled,
            "embed_depth": self.embed_depth,
            "slots": self.slots,
            "skipped_slots": self.skipped_slots,
            "q_s": self.q_s,
            "n_av": self.n_av,
            "l_av": self.l_av,
            "displacement_bound": self.displacement_bound,
        }


@dataclass(frozen=True)
class ExtractResult:
    bits: np.ndarray
    votes_one: np.ndarray
    votes_total: np.ndarray
    slot_bits: np.ndarray   # per-slot decoded bit, -1 where skipped
    levels_peeled: int
    embed_depth: int
    slots: int
    skipped_slots: int
    q_s: float

    def summary(self):
        return {
            "payload_bits": "".join(str(int(b)) for b in self.bits),
            "levels_peeled": self.levels_peeled,
            "embed_depth": self.embed_depth,
            "slots": self.slots,
            "skipped_slots": self.skipped_slots,
            "q_s": self.q_s,
            "votes_one": self.votes_one.tolist(),
            "votes_total": self.votes_total.tolist(),
        }


def _select_level(decomposition, n_bits):
    """Deepest analysis level whose coarse mesh still has >= n_bits edges.

    Keeping the selection rule a pure function of the detected level chain
    makes it blind and lets a subdivision attack's extra level be peeled
    without desynchronizing the slot set.
    """
    for k in reversed(range(decomposition.depth)):
        if len(decomposition.levels[k].wcvs) >= n_bits:
            return k
    raise CapacityError(
        f"payload needs {n_bits} slots but the finest analysis level has "
        f"only {len(decomposition.levels[0].wcvs)} coarse edges"
    )


def _slot_values(level, sync, params, tolerances):
    """Per-slot primitive values and the skip mask (near-zero coefficients
    cannot be rescaled direction-preservingly)."""
    norms = np.linalg.norm(level.wcvs, axis=1)
    slot_norms = norms[sync.edge_rows]
    skip = slot_norms < tolerances.zero_wcv_rel * sync.l_av
    scale = 1.0 if params.raw_norms else sync.l_av
    return slot_norms, slot_norms / scale, skip, scale


def embed(mesh, bits, params, max_levels=DEFAULT_MAX_LEVELS,
          tolerances=DEFAULT_TOLERANCES):
    """Embed a bit sequence, returning the watermarked mesh plus the
    parameters an auditor needs (step, slot count, distortion bound).

    Bits repeat cyclically over the slots in synchronization order;
    extraction recovers each bit by majority vote over its slots.
    """
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim != 1 or len(bits) != params.n_bits:
        raise ValueError(f"payload must be a flat sequence of {params.n_bits} bits")
    if not np.isin(bits, (0, 1)).all():
        raise ValueError("payload bits must be 0 or 1")

    decomposition = analyze(mesh, max_levels)
    k = _select_level(decomposition, params.n_bits)
    level = decomposition.levels[k]
    sync = compute_sync_order(level.coarse, tolerances)
    q_s = quantization_step(sync, params)
    dither = dither_sequence(params.key, len(sync), q_s)
    slot_norms, x, skip, scale = _slot_values(level, sync, params, tolerances)

    slot_bits = bits[np.arange(len(sync)) % params.n_bits]
    u = _nearest_codeword(x, slot_bits, q_s, dither)
    x_new = x + params.gamma * (u - x)
    factors = np.ones(len(sync))
    live = ~skip
    factors[live] = (x_new[live] * scale) / slot_norms[live]

    wcvs = level.wcvs.copy()
    wcvs[sync.edge_rows] *= factors[:, None]
    watermarked = synthesize(decomposition.with_level_wcvs(k, wcvs))
    return EmbedResult(
        mesh=watermarked,
        levels_peeled=decomposition.depth,
        embed_depth=k + 1,
        slots=len(sync),
        skipped_slots=int(skip.sum()),
        q_s=q_s,
        n_av=sync.n_av,
        l_av=sync.l_av,
        displacement_bound=params.gamma * q_s * scale / 2.0,
    )


def extract(mesh, params, max_levels=DEFAULT_MAX_LEVELS,
            tolerances=DEFAULT_TOLERANCES):
    """Blindly recover the payload: re-run analysis, re-derive the slot
    order, step, and dither from the mesh and the secret parameters, decode
    every slot, and majority-vote per payload bit (ties decode as 0)."""
    decomposition = analyze(mesh, max_levels)
    k = _select_level(decomposition, params.n_bits)
    level = decomposition.levels[k]
    sync = compute_sync_order(level.coarse, tolerances)
    q_s = quantization_step(sync, params)
    dither = dither_sequence(params.key, len(sync), q_s)
    _slot_norms, x, skip, _scale = _slot_values(level, sync, params, tolerances)

    decoded = _decode_array(x, q_s, dither)
    slot_bits = np.where(skip, np.int8(-1), decoded)

    votes_one = np.zeros(params.n_bits, dtype=np.int64)
    votes_total = np.zeros(params.n_bits, dtype=np.int64)
    bit_index = np.arange(len(sync)) % params.n_bits
    live = ~skip
    np.add.at(votes_total, bit_index[live], 1)
    np.add.at(votes_one, bit_index[live], decoded[live].astype(np.int64))
    bits = (2 * votes_one > votes_total).astype(np.int64)
    return ExtractResult(
        bits=bits,
        votes_one=votes_one,
        votes_total=votes_total,
        slot_bits=slot_bits,
        levels_peeled=decomposition.depth,
        embed_depth=k + 1,
        slots=len(sync),
        skipped_slots=int(skip.sum()),
        q_s=q_s,
    )


def correlation(reference, extracted):
    """Pearson correlation between two equal-length bit sequences."""
    a = np.asarray(reference, dtype=np.float64)
    b = np.asarray(extracted, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("sequences must be flat and of equal length")
    da = a - a.mean()
    db = b - b.mean()
    denom = np.sqrt((da * da).sum() * (db * db).sum())
    if denom == 0.0:
        raise ValueError("correlation undefined for a constant sequence")
    return float((da * db).sum() / denom)


def bits_from_hex(text, n_bits=DEFAULT_N_BITS):
    """Hex payload (MSB first) to a bit array; n_bits must be a multiple
    of 4."""
    if n_bits % 4 != 0:
        raise ValueError("hex payloads require n_bits divisible by 4")
    if len(text) != n_bits // 4:
        raise ValueError(f"expected {n_bits // 4} hex chars, got {len(text)}")
    value = int(text, 16)
    return np.array(
        [(value >> (n_bits - 1 - i)) & 1 for i in range(n_bits)], dtype=np.int64
    )


def hex_from_bits(bits):
    bits = np.asarray(bits, dtype=np.int64)
    if len(bits) % 4 != 0:
        raise ValueError("hex output requires a multiple of 4 bits")
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return f"{value:0{len(bits) // 4}x}"


def parse_payload(text, n_bits=DEFAULT_N_BITS):
    """Accept a payload as an explicit bit string or as hex (MSB first)."""
    text = text.strip().lower()
    if len(text) == n_bits and set(text) <= {"0", "1"}:
        return np.array([int(c) for c in text], dtype=np.int64)
    if n_bits % 4 == 0 and len(text) == n_bits // 4:
        try:
            return bits_from_hex(text, n_bits)
        except ValueError:
            pass
    raise ValueError(
        f"payload must be {n_bits} bits ('01...') or {n_bits // 4} hex chars"
    )


def random_bits(n_bits, seed):
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2, size=n_bits, dtype=np.int64)
