import json

import pytest

from meshmark.attacks import parse_attack_spec
from meshmark.bench import (
    BenchConfig,
    default_attack_suite,
    default_config,
    run_bench,
    write_reports,
)


def small_config(out_dir, attacks=None):
    meshes = [{
        "id": "icosphere2",
        "generator": {"base": "icosa", "levels": 2, "projection": "sphere"},
    }]
    if attacks is None:
        attacks = [
            parse_attack_spec({"kind": "rotate", "axis": [1, 2, 3],
                               "angle_deg": 10.0}),
            parse_attack_spec({"kind": "noise", "amplitude_pct": 0.1,
                               "seed": 5}),
        ]
    return BenchConfig(
        meshes=meshes, attacks=attacks, seed=3, samples=1500,
        out_dir=str(out_dir), n_bits=64,
    )


def test_empty_attack_list_gives_baseline_only(tmp_path):
    cfg = small_config(tmp_path, attacks=[])
    rows, _ = run_bench(cfg)
    assert len(rows) == 1
    assert rows[0].attack.kind == "none"
    assert rows[0].corr == 1.0


def test_similarity_grid_shape(tmp_path):
    attacks = [
        parse_attack_spec(s) for s in [
            {"kind": "translate", "offset": [1, 2, 3]},
            {"kind": "rotate", "axis": [0, 0, 1], "angle_deg": 10.0},
            {"kind": "uniform_scale", "factor": 0.8},
            {"kind": "combined_similarity", "offset": [1, 0, 0],
             "axis": [0, 0, 1], "angle_deg": 10.0, "factor": 0.8},
        ]
    ]
    cfg = small_config(tmp_path, attacks=attacks)
    rows, _ = run_bench(cfg)
    assert len(rows) == 5  # baseline + 4 similarity rows
    for row in rows:
        assert row.corr == 1.0


def test_rows_sorted_and_reports_written(tmp_path):
    cfg = small_config(tmp_path)
    rows, meta = run_bench(cfg)
    csv_path, json_path = write_reports(rows, meta, cfg.out_dir)
    lines = open(csv_path).read().strip().splitlines()
    assert lines[0].startswith("mesh,attack,corr")
    assert len(lines) == len(rows) + 1
    payload = json.loads(open(json_path).read())
    assert len(payload["rows"]) == len(rows)
    assert payload["config"]["seed"] == 3
    assert payload["payload_hex"]


def test_csv_byte_identical_across_reruns(tmp_path):
    cfg1 = small_config(tmp_path / "r1")
    rows1, meta1 = run_bench(cfg1)
    write_reports(rows1, meta1, cfg1.out_dir)
    cfg2 = small_config(tmp_path / "r2")
    rows2, meta2 = run_bench(cfg2)
    write_reports(rows2, meta2, cfg2.out_dir)
    csv1 = open(str(tmp_path / "r1" / "bench.csv")).read()
    csv2 = open(str(tmp_path / "r2" / "bench.csv")).read()
    assert csv1 == csv2


def test_subdivision_row_has_no_msdm(tmp_path):
    cfg = small_config(
        tmp_path, attacks=[parse_attack_spec({"kind": "subdivide_midpoint"})]
    )
    rows, _ = run_bench(cfg)
    assert rows[1].msdm is None
    assert rows[1].corr == 1.0
    assert rows[1].to_csv()["msdm"] == ""


def test_default_config_covers_attack_families():
    cfg = default_config()
    kinds = {a.kind for a in cfg.attacks}
    assert {"translate", "rotate", "uniform_scale", "combined_similarity",
            "noise", "laplacian_smooth", "quantize_coords",
            "subdivide_midpoint", "subdivide_loop"} <= kinds
    assert len(default_attack_suite()) == 20


def test_config_json_roundtrip(tmp_path):
    cfg = small_config(tmp_path)
    back = BenchConfig.from_json(cfg.to_json())
    assert back.seed == cfg.seed
    assert [a.to_json() for a in back.attacks] == [
        a.to_json() for a in cfg.attacks
    ]


def test_config_rejects_missing_mesh_file():
    with pytest.raises(ValueError, match="not found"):
        BenchConfig.from_json({
            "meshes": [{"id": "x", "path": "/no/such.off"}],
            "attacks": [],
        })


def test_explicit_payload_used(tmp_path):
    cfg = small_config(tmp_path, attacks=[])
    cfg.payload = "deadbeefcafe0123"
    rows, meta = run_bench(cfg)
    assert meta["payload_hex"] == "deadbeefcafe0123"
    assert rows[0].corr == 1.0
