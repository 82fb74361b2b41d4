"""Command-line surface: flags, exit codes, output schemas."""

import json
import os

import pytest

from htplus.cli import main

CODE_FLAGS = ["--n", "6", "--k", "4", "--alpha-base", "4", "--field-w", "4"]


def run(capsys, argv):
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def test_gen_code_descriptor(capsys):
    rc, out, _ = run(capsys, ["gen-code", *CODE_FLAGS])
    assert rc == 0
    desc = json.loads(out)
    assert desc["params"] == {"n": 6, "k": 4, "alpha_base": 4, "alpha": 8,
                              "field_w": 4, "poly": 0b11001, "theta": 2, "seed": 0}
    assert desc["mds"] == "verified"
    assert desc["search_attempts"] >= 1


def test_gen_code_small_alpha(capsys):
    rc, out, _ = run(capsys, ["gen-code", "--n", "6", "--k", "4",
                              "--alpha-base", "2", "--field-w", "4"])
    assert rc == 0
    assert json.loads(out)["params"]["alpha"] == 4


def test_gen_code_invalid_params(capsys):
    rc, _, err = run(capsys, ["gen-code", "--n", "6", "--k", "7",
                              "--alpha-base", "2", "--field-w", "4"])
    assert rc == 2 and "error" in err


def encode_tree(tmp_path, capsys, payload=b"x" * 1300, w="8"):
    src = tmp_path / "input.bin"
    src.write_bytes(payload)
    shards = tmp_path / "shards"
    rc, _, _ = run(capsys, ["encode", "--input", str(src), "--out-dir", str(shards),
                            "--n", "6", "--k", "4", "--alpha-base", "4",
                            "--field-w", w])
    assert rc == 0
    return src, shards


def test_encode_writes_n_shards(tmp_path, capsys):
    _, shards = encode_tree(tmp_path, capsys)
    names = sorted(p.name for p in shards.iterdir())
    assert names == [f"shard_{i:03d}" for i in range(6)]


def test_encode_empty_file(tmp_path, capsys):
    _, shards = encode_tree(tmp_path, capsys, payload=b"")
    from htplus.shardio import read_shard
    hdr, cols = read_shard((shards / "shard_003").read_bytes())
    assert hdr.stripe_count == 0 and cols == []


def test_decode_any_four_shards(tmp_path, capsys):
    src, shards = encode_tree(tmp_path, capsys)
    for victim in ("shard_001", "shard_002"):
        (shards / victim).unlink()
    out = tmp_path / "out.bin"
    rc, _, _ = run(capsys, ["decode", "--shards", str(shards), "--output", str(out)])
    assert rc == 0
    assert out.read_bytes() == src.read_bytes()


def test_decode_not_enough_shards(tmp_path, capsys):
    _, shards = encode_tree(tmp_path, capsys)
    for victim in ("shard_000", "shard_001", "shard_002"):
        (shards / victim).unlink()
    rc, _, _ = run(capsys, ["decode", "--shards", str(shards),
                            "--output", str(tmp_path / "o")])
    assert rc == 4


def test_decode_mixed_runs_rejected(tmp_path, capsys):
    src, shards = encode_tree(tmp_path, capsys)
    src2 = tmp_path / "other.bin"
    src2.write_bytes(b"y" * 1300)
    shards2 = tmp_path / "shards2"
    rc, _, _ = run(capsys, ["encode", "--input", str(src2), "--out-dir", str(shards2),
                            "--n", "6", "--k", "4", "--alpha-base", "4",
                            "--field-w", "8", "--seed", "7"])
    assert rc == 0
    (shards / "shard_000").write_bytes((shards2 / "shard_000").read_bytes())
    rc, _, _ = run(capsys, ["decode", "--shards", str(shards),
                            "--output", str(tmp_path / "o")])
    assert rc == 5


def test_repair_regenerates_byte_identical_shard(tmp_path, capsys):
    _, shards = encode_tree(tmp_path, capsys)
    lost = (shards / "shard_004").read_bytes()
    (shards / "shard_004").unlink()
    rc, out, _ = run(capsys, ["repair", "--shards", str(shards), "--failed", "4"])
    assert rc == 0
    assert "reads=20 symbols (62.5% of M)" in out
    assert (shards / "shard_004").read_bytes() == lost


def test_repair_dry_run_prints_plan(tmp_path, capsys):
    _, shards = encode_tree(tmp_path, capsys)
    (shards / "shard_000").unlink()
    rc, out, _ = run(capsys, ["repair", "--shards", str(shards), "--failed", "0",
                              "--dry-run"])
    assert rc == 0
    plan = json.loads(out)
    assert plan["failed_node"] == 0
    assert plan["symbols_accessed"] == plan["symbols_transferred"] == 20
    assert len(plan["reads"]) == 20
    assert not (shards / "shard_000").exists()


def test_repair_missing_helpers(tmp_path, capsys):
    _, shards = encode_tree(tmp_path, capsys)
    (shards / "shard_000").unlink()
    (shards / "shard_001").unlink()
    rc, _, _ = run(capsys, ["repair", "--shards", str(shards), "--failed", "0"])
    assert rc == 4


def test_verify_reports_schema(capsys):
    rc, out, _ = run(capsys, ["verify", *CODE_FLAGS])
    assert rc == 0
    rep = json.loads(out)
    assert set(rep) == {"params", "mds", "per_node", "avg_fraction",
                        "systematic_avg", "parity_avg", "eq1_optimum_fraction",
                        "prop1_bounds"}
    assert rep["mds"] == "verified"
    assert rep["avg_fraction"] == 0.625
    assert rep["eq1_optimum_fraction"] == 0.625
    assert rep["prop1_bounds"][0] == 0.625
    assert [e["symbols_read"] for e in rep["per_node"]] == [20] * 6
    assert {e["role"] for e in rep["per_node"]} == {"systematic", "parity"}


def test_verify_corrupt_exits_6(capsys):
    rc, out, _ = run(capsys, ["verify", "--mds", "--corrupt", *CODE_FLAGS])
    assert rc == 6
    witness = json.loads(out)
    assert witness["violation"] == "mds"
    assert isinstance(witness["failing_subset"], list)


def test_bench_json_and_csv(tmp_path, capsys):
    params = tmp_path / "bench.json"
    params.write_text(json.dumps([
        {"n": 6, "k": 4, "alpha_base": 4, "field_w": 4},
        {"n": 6, "k": 4, "alpha_base": 2, "field_w": 4},
    ]))
    rc, out, _ = run(capsys, ["bench", "--params-file", str(params)])
    assert rc == 0
    rows = json.loads(out)
    assert len(rows) == 2
    assert rows[0]["avg_fraction"] == 0.625
    assert rows[0]["published"] is None  # (6,4) has no published reference
    assert rows[1]["params"]["alpha"] == 4

    rc, out, _ = run(capsys, ["bench", "--params-file", str(params),
                              "--format", "csv"])
    assert rc == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("n,k,alpha_base")
    assert len(lines) == 3


def test_bench_published_labels(tmp_path, capsys):
    params = tmp_path / "bench.json"
    params.write_text(json.dumps([{"n": 12, "k": 10, "alpha_base": 8,
                                   "field_w": 8}]))
    rc, out, _ = run(capsys, ["bench", "--params-file", str(params)])
    assert rc == 0
    row = json.loads(out)[0]
    assert row["published"]["hashtag_plus"] == 58.3
    assert "published" in row["published"]["note"]


def test_bench_invalid_entry(tmp_path, capsys):
    params = tmp_path / "bench.json"
    params.write_text(json.dumps([{"n": 6, "k": 9, "alpha_base": 2}]))
    rc, _, _ = run(capsys, ["bench", "--params-file", str(params)])
    assert rc == 2
