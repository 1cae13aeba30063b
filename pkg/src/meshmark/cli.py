"""Command-line front end.

Commands: generate | embed | extract | attack | evaluate | bench.
Machine-readable JSON goes to stdout; errors are JSON on stderr.

Exit codes: 0 success, 1 runtime error (I/O, parsing, topology, geometry),
2 payload capacity exceeded, 3 input not semiregular, 64 usage error.
"""

import argparse
import json
import sys

from . import __version__
from .attacks import apply_attacks, parse_attack_spec
from .bench import BenchConfig, default_config, run_bench, write_reports
from .config import (
    DEFAULT_GAMMA,
    DEFAULT_LAMBDA,
    DEFAULT_MAX_LEVELS,
    DEFAULT_N_BITS,
)
from .errors import CapacityError, MeshmarkError, NotSemiregularError
from .generate import BASE_SOLIDS, semiregular_mesh
from .meshio import load_mesh, save_mesh
from .metrics import DEFAULT_SAMPLES, evaluate_meshes
from .watermark import ScsParams, embed, extract, hex_from_bits, parse_payload

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CAPACITY = 2
EXIT_NOT_SEMIREGULAR = 3
EXIT_USAGE = 64


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _emit(obj):
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _params_from_args(args):
    return ScsParams(
        lam=args.lam,
        gamma=args.gamma,
        key=args.key,
        n_bits=args.bits,
        raw_norms=getattr(args, "raw_norms", False),
    )


def _add_param_flags(sub):
    sub.add_argument("--key", default="", help="secret key (UTF-8 string)")
    sub.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA,
                     help="step divisor: larger = finer step = less distortion")
    sub.add_argument("--gamma", type=float, default=DEFAULT_GAMMA,
                     help="distortion compensation factor in (0, 1]")
    sub.add_argument("--bits", type=int, default=DEFAULT_N_BITS,
                     help="payload length in bits")
    sub.add_argument("--max-levels", type=int, default=DEFAULT_MAX_LEVELS,
                     help="analysis depth bound")
    sub.add_argument("--raw-norms", action="store_true",
                     help="quantize raw coefficient norms (not scale-invariant)")


def build_parser():
    parser = _Parser(prog="meshmark",
                     description="Blind robust watermarking of semiregular "
                                 "triangle meshes")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a semiregular test mesh")
    p.add_argument("--base", choices=sorted(BASE_SOLIDS), required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--projection", choices=["none", "sphere"], default="none")
    p.add_argument("--out", required=True)

    p = sub.add_parser("embed", help="embed a payload")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--payload", required=True,
                   help="hex (bits/4 chars) or bit string (bits chars)")
    _add_param_flags(p)

    p = sub.add_parser("extract", help="blindly extract a payload")
    p.add_argument("--in", dest="infile", required=True)
    _add_param_flags(p)

    p = sub.add_parser("attack", help="apply attack spec(s) to a mesh")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--spec", required=True,
                   help="JSON attack object/array, or @file.json")
    p.add_argument("--seed", type=int, default=None,
                   help="override seed for stochastic attacks")

    p = sub.add_parser("evaluate", help="distortion metrics between meshes")
    p.add_argument("--a", dest="mesh_a", required=True)
    p.add_argument("--b", dest="mesh_b", required=True)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)

    p = sub.add_parser("bench", help="run the attack/metric benchmark grid")
    p.add_argument("--config", default=None,
                   help="bench config JSON; omit for the built-in default")
    p.add_argument("--out-dir", default=None, help="override output directory")
    p.add_argument("--seed", type=int, default=None, help="override seed")
    p.add_argument("--quiet", action="store_true")
    return parser


def cmd_generate(args):
    mesh = semiregular_mesh(args.base, args.levels, args.projection)
    save_mesh(mesh, args.out)
    _emit({
        "out": args.out,
        "vertices": mesh.n_vertices,
        "triangles": mesh.n_triangles,
        "edges": mesh.n_edges,
    })
    return EXIT_OK


def cmd_embed(args):
    mesh = load_mesh(args.infile)
    params = _params_from_args(args)
    bits = parse_payload(args.payload, params.n_bits)
    result = embed(mesh, bits, params, args.max_levels)
    save_mesh(result.mesh, args.out)
    summary = result.summary()
    summary["out"] = args.out
    summary["payload_hex"] = (
        hex_from_bits(bits) if params.n_bits % 4 == 0 else None
    )
    summary["lambda"] = params.lam
    summary["gamma"] = params.gamma
    summary["n_bits"] = params.n_bits
    _emit(summary)
    return EXIT_OK


def cmd_extract(args):
    mesh = load_mesh(args.infile)
    params = _params_from_args(args)
    result = extract(mesh, params, args.max_levels)
    summary = result.summary()
    summary["payload_hex"] = (
        hex_from_bits(result.bits) if params.n_bits % 4 == 0 else None
    )
    summary["lambda"] = params.lam
    summary["n_bits"] = params.n_bits
    _emit(summary)
    return EXIT_OK


def cmd_attack(args):
    text = args.spec
    if text.startswith("@"):
        with open(text[1:], "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _UsageError(f"--spec is not valid JSON: {exc}") from exc
    if isinstance(obj, dict):
        obj = [obj]
    try:
        specs = [parse_attack_spec(o) for o in obj]
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    if args.seed is not None:
        specs = [
            type(s)(kind=s.kind, params=s.params, seed=args.seed)
            for s in specs
        ]
    mesh = load_mesh(args.infile)
    attacked = apply_attacks(mesh, specs)
    save_mesh(attacked, args.out)
    _emit({
        "out": args.out,
        "applied": [s.to_json() for s in specs],
        "vertices": attacked.n_vertices,
        "triangles": attacked.n_triangles,
    })
    return EXIT_OK


def cmd_evaluate(args):
    mesh_a = load_mesh(args.mesh_a, require_closed=False)
    mesh_b = load_mesh(args.mesh_b, require_closed=False)
    report = evaluate_meshes(mesh_a, mesh_b, args.samples)
    out = report.to_json()
    # match the tables' unit convention
    out["mrms_1e3"] = report.mrms * 1e3
    out["hd_1e3"] = report.hausdorff * 1e3
    _emit(out)
    return EXIT_OK


def cmd_bench(args):
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = BenchConfig.from_json(json.load(fh))
    else:
        config = default_config()
    if args.out_dir:
        config.out_dir = args.out_dir
    if args.seed is not None:
        config.seed = args.seed
    progress = None if args.quiet else (
        lambda msg: print(f"[bench] {msg}", file=sys.stderr)
    )
    rows, meta = run_bench(config, progress=progress)
    csv_path, json_path = write_reports(rows, meta, config.out_dir)
    _emit({
        "csv": csv_path,
        "json": json_path,
        "rows": len(rows),
        "meshes": [m["id"] for m in config.meshes],
        "attacks": len(config.attacks),
    })
    return EXIT_OK


_COMMANDS = {
    "generate": cmd_generate,
    "embed": cmd_embed,
    "extract": cmd_extract,
    "attack": cmd_attack,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
}


def _error_json(exc, code):
    json.dump(
        {"error": {"type": type(exc).__name__, "message": str(exc),
                   "exit_code": code}},
        sys.stderr,
    )
    sys.stderr.write("\n")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        _error_json(exc, EXIT_CAPACITY)
        return EXIT_CAPACITY
    except NotSemiregularError as exc:
        _error_json(exc, EXIT_NOT_SEMIREGULAR)
        return EXIT_NOT_SEMIREGULAR
    except (MeshmarkError, ValueError, OSError) as exc:
        _error_json(exc, EXIT_ERROR)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
