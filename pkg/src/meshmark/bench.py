"""Robustness benchmark: embed -> attack -> extract -> metrics grids.

A config (JSON) names the input meshes (files or generator specs), the
payload/key/parameters, and an attack list; the harness emits one row per
(mesh, attack) as CSV (deterministic, byte-identical across reruns) and
JSON (adds wall-clock timings, which necessarily vary).
"""

import csv
import json
import os
import time
from dataclasses import dataclass

from .attacks import AttackSpec, apply_attack, parse_attack_spec
from .config import (
    DEFAULT_GAMMA,
    DEFAULT_LAMBDA,
    DEFAULT_MAX_LEVELS,
    DEFAULT_N_BITS,
)
from .errors import MeshmarkError
from .generate import semiregular_mesh
from .meshio import load_mesh
from .metrics import evaluate_meshes
from .watermark import (
    ScsParams,
    correlation,
    embed,
    extract,
    hex_from_bits,
    parse_payload,
    random_bits,
)

CSV_COLUMNS = [
    "mesh", "attack", "corr", "mrms_1e3", "hd_1e3", "msdm",
    "levels_peeled", "embed_depth", "slots",
]


@dataclass
class BenchConfig:
    meshes: list
    attacks: list
    payload: str = "random"
    key: str = "bench-key"
    lam: float = DEFAULT_LAMBDA
    gamma: float = DEFAULT_GAMMA
    n_bits: int = DEFAULT_N_BITS
    max_levels: int = DEFAULT_MAX_LEVELS
    seed: int = 1
    samples: int = 4000
    out_dir: str = "bench_out"

    @classmethod
    def from_json(cls, obj):
        meshes = obj.get("meshes")
        if not meshes:
            raise ValueError("config needs a non-empty 'meshes' list")
        for entry in meshes:
            if "id" not in entry or ("path" not in entry and "generator" not in entry):
                raise ValueError(
                    "each mesh entry needs 'id' and either 'path' or 'generator'"
                )
            if "path" in entry and not os.path.exists(entry["path"]):
                raise ValueError(f"mesh file not found: {entry['path']}")
        attacks = [parse_attack_spec(a) for a in obj.get("attacks", [])]
        kwargs = {}
        for name, key in [
            ("payload", "payload"), ("key", "key"), ("lam", "lambda"),
            ("gamma", "gamma"), ("n_bits", "n_bits"),
            ("max_levels", "max_levels"), ("seed", "seed"),
            ("samples", "samples"), ("out_dir", "out_dir"),
        ]:
            if key in obj:
                kwargs[name] = obj[key]
        return cls(meshes=meshes, attacks=attacks, **kwargs)

    def to_json(self):
        return {
            "meshes": self.meshes,
            "attacks": [a.to_json() for a in self.attacks],
            "payload": self.payload,
            "key": self.key,
            "lambda": self.lam,
            "gamma": self.gamma,
            "n_bits": self.n_bits,
            "max_levels": self.max_levels,
            "seed": self.seed,
            "samples": self.samples,
            "out_dir": self.out_dir,
        }


def default_attack_suite(seed=1):
    """The benchmarked attack grid: similarity transforms and their
    combination, noise levels, smoothing schedules, coordinate
    quantization depths, and one iteration of each subdivision scheme."""
    specs = [
        {"kind": "translate", "offset": [0.31, -1.7, 2.3]},
        {"kind": "rotate", "axis": [1, 2, 3], "angle_deg": 10.0},
        {"kind": "rotate", "axis": [1, 2, 3], "angle_deg": 40.0},
        {"kind": "uniform_scale", "factor": 0.8},
        {"kind": "uniform_scale", "factor": 1.3},
        {"kind": "combined_similarity", "offset": [0.31, -1.7, 2.3],
         "axis": [1, 2, 3], "angle_deg": 10.0, "factor": 0.8},
    ]
    for amp in (0.05, 0.1, 0.3, 0.5):
        specs.append({"kind": "noise", "amplitude_pct": amp, "seed": seed})
    for iters in (5, 10, 30, 50):
        specs.append({"kind": "laplacian_smooth", "iterations": iters,
                      "relax": 0.1})
    for bits in (10, 9, 8, 7):
        specs.append({"kind": "quantize_coords", "bits": bits})
    specs.append({"kind": "subdivide_midpoint"})
    specs.append({"kind": "subdivide_loop"})
    return [parse_attack_spec(s) for s in specs]


def default_config(out_dir="bench_out", seed=1):
    meshes = [
        {"id": "icosphere3",
         "generator": {"base": "icosa", "levels": 3, "projection": "sphere"}},
        {"id": "octasphere3",
         "generator": {"base": "octa", "levels": 3, "projection": "sphere"}},
        {"id": "tetrasphere4",
         "generator": {"base": "tetra", "levels": 4, "projection": "sphere"}},
    ]
    return BenchConfig(
        meshes=meshes,
        attacks=default_attack_suite(seed=seed),
        seed=seed,
        out_dir=out_dir,
    )


def _load_bench_mesh(entry):
    if "path" in entry:
        return load_mesh(entry["path"])
    gen = entry["generator"]
    return semiregular_mesh(
        gen["base"], int(gen["levels"]), gen.get("projection", "none")
    )


@dataclass
class BenchRow:
    mesh_id: str
    attack: AttackSpec
    corr: float
    mrms: float
    hausdorff: float
    msdm: float
    levels_peeled: int
    embed_depth: int
    slots: int
    runtime_ms: float
    error: str = ""

    def to_json(self):
        return {
            "mesh": self.mesh_id,
            "attack": self.attack.to_json(),
            "corr": self.corr,
            "mrms": self.mrms,
            "hausdorff": self.hausdorff,
            "msdm": self.msdm,
            "levels_peeled": self.levels_peeled,
            "embed_depth": self.embed_depth,
            "slots": self.slots,
            "runtime_ms": self.runtime_ms,
            "error": self.error or None,
        }

    def to_csv(self):
        def fmt(x, scale=1.0):
            return "" if x is None else f"{x * scale:.6g}"

        return {
            "mesh": self.mesh_id,
            "attack": self.attack.label(),
            "corr": fmt(self.corr),
            "mrms_1e3": fmt(self.mrms, 1e3),
            "hd_1e3": fmt(self.hausdorff, 1e3),
            "msdm": fmt(self.msdm),
            "levels_peeled": self.levels_peeled,
            "embed_depth": self.embed_depth,
            "slots": self.slots,
        }


def run_bench(config, progress=None):
    """Execute the full grid. Rows are ordered (mesh, [baseline] + attacks)
    and depend only on the config and its seeds."""
    params = ScsParams(
        lam=config.lam, gamma=config.gamma, key=config.key,
        n_bits=config.n_bits,
    )
    if config.payload == "random":
        bits = random_bits(config.n_bits, config.seed)
    else:
        bits = parse_payload(config.payload, config.n_bits)

    rows = []
    for entry in config.meshes:
        mesh_id = entry["id"]
        original = _load_bench_mesh(entry)
        emb = embed(original, bits, params, config.max_levels)
        baseline = AttackSpec(kind="none")
        for spec in [baseline] + list(config.attacks):
            if progress:
                progress(f"{mesh_id}: {spec.label()}")
            start = time.perf_counter()
            attacked = apply_attack(emb.mesh, spec)
            corr = None
            err = ""
            try:
                ext = extract(attacked, params, config.max_levels)
                corr = correlation(bits, ext.bits)
            except (MeshmarkError, ValueError) as exc:
                err = f"{type(exc).__name__}: {exc}"
            report = evaluate_meshes(original, attacked, config.samples)
            runtime_ms = (time.perf_counter() - start) * 1e3
            rows.append(BenchRow(
                mesh_id=mesh_id,
                attack=spec,
                corr=corr,
                mrms=report.mrms,
                hausdorff=report.hausdorff,
                msdm=report.msdm,
                levels_peeled=emb.levels_peeled,
                embed_depth=emb.embed_depth,
                slots=emb.slots,
                runtime_ms=runtime_ms,
                error=err,
            ))
    meta = {
        "config": config.to_json(),
        "payload_hex": hex_from_bits(bits) if config.n_bits % 4 == 0 else None,
        "payload_bits": "".join(str(int(b)) for b in bits),
    }
    return rows, meta


def write_reports(rows, meta, out_dir):
    """bench.csv (deterministic) and bench.json (adds timings)."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "bench.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.to_csv())
    json_path = os.path.join(out_dir, "bench.json")
    payload = dict(meta)
    payload["rows"] = [r.to_json() for r in rows]
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return csv_path, json_path
