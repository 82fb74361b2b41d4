"""Command-line surface: gen-code, encode, decode, repair, verify, bench.

Exit codes: 0 success, 2 invalid parameters or failed construction, 3 I/O
error, 4 not enough shards / missing repair reads, 5 shard header mismatch,
6 property violation (verify).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import codec, repair as repair_mod, shardio
from .base import CodeParams
from .errors import (
    FieldTooSmall, HtplusError, InvalidParams, MdsSearchExhausted, MissingRead,
    NotEnoughShards, ShardFormatError, VerificationFailure,
)
from .plus import PlusCode, build_plus_code, make_code_from_params
from .verifier import exhaustive_repair_check, verify_mds

EXIT_INVALID = 2
EXIT_IO = 3
EXIT_SHARDS = 4
EXIT_HEADER = 5
EXIT_VIOLATION = 6

# Published average-repair-fraction reference curves (percent of file size)
# for the same (n, k) points, all at base sub-packetization 8.  Context only;
# not computed by this package.
PUBLISHED_AVG_PERCENT = {
    (12, 10): {"piggyback2": 100.0, "hashtag": 65.83, "hashtag_plus": 58.3},
    (14, 12): {"piggyback2": 100.0, "hashtag": 64.86, "hashtag_plus": 58.31},
    (15, 12): {"piggyback2": 68.0, "hashtag": 60.936, "hashtag_plus": 48.72},
    (12, 9): {"piggyback2": 70.0, "hashtag": 60.88, "hashtag_plus": 46.065},
    (14, 10): {"piggyback2": 66.0, "hashtag": 57.5, "hashtag_plus": 38.21},
    (16, 12): {"piggyback2": 63.5, "hashtag": 55.0, "hashtag_plus": 37.8125},
    (20, 15): {"piggyback2": 62.0, "hashtag": 55.125, "hashtag_plus": 36.4575},
    (24, 18): {"piggyback2": 60.0, "hashtag": 55.208335, "hashtag_plus": 35.53},
}


def _add_code_flags(p: argparse.ArgumentParser, required: bool = True):
    p.add_argument("--n", type=int, required=required)
    p.add_argument("--k", type=int, required=required)
    p.add_argument("--alpha-base", type=int, required=required, dest="alpha_base")
    p.add_argument("--field-w", type=int, required=required, dest="field_w",
                   choices=(4, 8, 16))
    p.add_argument("--poly", type=lambda s: int(s, 0), default=None)
    p.add_argument("--theta", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)


def _params_from_args(args) -> CodeParams:
    return CodeParams.create(args.n, args.k, args.alpha_base, args.field_w,
                             args.poly, args.theta, args.seed)


def _build(args) -> PlusCode:
    return make_code_from_params(_params_from_args(args))


def _params_dict(code: PlusCode) -> dict:
    p = code.params
    return {"n": p.n, "k": p.k, "alpha_base": p.alpha_b, "alpha": p.alpha,
            "field_w": p.field.w, "poly": p.field.poly, "theta": p.theta,
            "seed": p.seed}


def report_dict(code: PlusCode, bw: repair_mod.BandwidthReport) -> dict:
    p = code.params
    lo, hi = repair_mod.systematic_bounds(p.n, p.k, p.r, p.alpha)
    eq1 = repair_mod.optimal_bandwidth(p.n, p.k, p.stripe_symbols)
    return {
        "params": _params_dict(code),
        "mds": code.mds_mode,
        "per_node": [{"node": e.node, "role": e.role,
                      "symbols_read": e.symbols_accessed,
                      "fraction": float(e.fraction_of_M)}
                     for e in bw.per_node],
        "avg_fraction": float(bw.avg_fraction),
        "systematic_avg": float(bw.systematic_avg),
        "parity_avg": float(bw.parity_avg),
        "eq1_optimum_fraction": float(eq1 / p.stripe_symbols),
        "prop1_bounds": [float(lo * p.alpha / p.stripe_symbols),
                         float(hi * p.alpha / p.stripe_symbols)],
    }


def cmd_gen_code(args) -> int:
    try:
        code = _build(args)
    except (InvalidParams, FieldTooSmall, MdsSearchExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out = {"params": _params_dict(code), "mds": code.mds_mode,
           "search_attempts": code.base.attempt + 1,
           "effective_seed": code.base.effective_seed}
    print(json.dumps(out, indent=2))
    return 0


def _shard_path(out_dir: Path, node: int) -> Path:
    return out_dir / f"shard_{node:03d}"


def cmd_encode(args) -> int:
    try:
        code = _build(args)
    except (InvalidParams, FieldTooSmall, MdsSearchExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    p = code.params
    try:
        data = Path(args.input).read_bytes()
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        blocks = codec.file_to_blocks(p, data)
        words = [codec.encode(code, b) for b in blocks]
        for node in range(p.n):
            header = shardio.ShardHeader.for_code(p, node, len(blocks), len(data))
            cols = [w[:, node] for w in words]
            _shard_path(out_dir, node).write_bytes(shardio.write_shard(header, cols))
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {p.n} shards ({len(blocks)} stripes, {len(data)} bytes) to {out_dir}")
    return 0


def _load_shards(paths) -> list[tuple[shardio.ShardHeader, list[np.ndarray]]]:
    loaded = []
    for path in paths:
        loaded.append(shardio.read_shard(Path(path).read_bytes()))
    return loaded


def _shard_paths_from(shards_arg: str) -> list[Path]:
    p = Path(shards_arg)
    if p.is_dir():
        return sorted(x for x in p.iterdir() if x.name.startswith("shard_"))
    return [Path(s) for s in shards_arg.split(",") if s]


def cmd_decode(args) -> int:
    try:
        loaded = _load_shards(_shard_paths_from(args.shards))
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ShardFormatError as exc:
        print(f"shard error: {exc}", file=sys.stderr)
        return EXIT_HEADER
    if not loaded:
        print("error: no shards found", file=sys.stderr)
        return EXIT_SHARDS
    key = loaded[0][0].compat_key()
    if any(h.compat_key() != key for h, _ in loaded):
        print("error: shards come from different encode runs", file=sys.stderr)
        return EXIT_HEADER
    header = loaded[0][0]
    by_node = {h.node_id: cols for h, cols in loaded}
    if len(by_node) < header.k:
        print(f"error: need at least k={header.k} distinct shards, got {len(by_node)}",
              file=sys.stderr)
        return EXIT_SHARDS

    params = header.to_params()
    systematic = sorted(m for m in by_node if m < header.k)
    chosen = (systematic + sorted(m for m in by_node if m >= header.k))[:header.k]
    code = make_code_from_params(params)
    blocks = []
    for s in range(header.stripe_count):
        shard_cols = {m: by_node[m][s] for m in chosen}
        blocks.append(codec.decode_any_k(code, shard_cols))
    out = codec.blocks_to_file(params, blocks, header.payload_len)
    try:
        Path(args.output).write_bytes(out)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"decoded {len(out)} bytes from shards {chosen} to {args.output}")
    return 0


def _plan_to_dict(plan: repair_mod.RepairPlan) -> dict:
    return {
        "failed_node": plan.failed_node,
        "symbols_accessed": plan.symbols_accessed,
        "symbols_transferred": plan.symbols_transferred,
        "reads": [{"node": n, "instance": v, "row": t} for n, v, t in plan.reads],
        "solve_steps": [f"{type(s).__name__}{s.__dict__}" for s in plan.solve_steps],
    }


def cmd_repair(args) -> int:
    try:
        shard_paths = _shard_paths_from(args.shards)
        loaded = _load_shards(shard_paths)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ShardFormatError as exc:
        print(f"shard error: {exc}", file=sys.stderr)
        return EXIT_HEADER
    by_node = {h.node_id: (h, cols) for h, cols in loaded if h.node_id != args.failed}
    if not by_node:
        print("error: no surviving shards found", file=sys.stderr)
        return EXIT_SHARDS
    header = next(iter(by_node.values()))[0]
    params = header.to_params()
    if len(by_node) < params.n - 1:
        print(f"error: repair needs all {params.n - 1} surviving shards, got {len(by_node)}",
              file=sys.stderr)
        return EXIT_SHARDS
    code = make_code_from_params(params)
    plan = repair_mod.plan_repair(code, args.failed)

    M = params.stripe_symbols
    frac = Fraction(plan.symbols_accessed, M)
    if args.dry_run:
        print(json.dumps(_plan_to_dict(plan), indent=2))
        return 0
    cols = []
    try:
        for s in range(header.stripe_count):
            shard_cols = {m: c[1][s] for m, c in by_node.items()}
            cols.append(repair_mod.execute_repair(code, plan, shard_cols))
    except MissingRead as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHARDS
    new_header = shardio.ShardHeader.for_code(params, args.failed,
                                              header.stripe_count, header.payload_len)
    out_path = Path(args.out) if args.out else _shard_paths_from(args.shards)[0].parent / f"shard_{args.failed:03d}"
    try:
        out_path.write_bytes(shardio.write_shard(new_header, cols))
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"repaired node {args.failed}: reads={plan.symbols_accessed} symbols "
          f"({float(frac) * 100:.4g}% of M) per stripe, "
          f"transferred={plan.symbols_transferred}, stripes={header.stripe_count}, "
          f"wrote {out_path}")
    return 0


def cmd_verify(args) -> int:
    try:
        code = _build(args)
    except (InvalidParams, FieldTooSmall, MdsSearchExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.corrupt:
        # test hook: zero every coefficient that feeds from data symbol (0, 0)
        from .base import CoefficientTensor
        rows = tuple(tuple(tuple((sr, sn, 0 if (sr, sn) == (0, 0) else f)
                                 for sr, sn, f in row) for row in arr)
                     for arr in code.base.tensor.rows)
        code = build_plus_code(code.base.with_tensor(CoefficientTensor(rows=rows)))

    run_mds = args.mds or not (args.mds or args.bounds)
    run_bounds = args.bounds or not (args.mds or args.bounds)
    if run_mds:
        res = verify_mds(code)
        if not res.ok:
            print(json.dumps({"violation": "mds", "failing_subset": list(res.failing_subset),
                              "checked": res.checked, "mode": res.mode}))
            return EXIT_VIOLATION
    bw = None
    if run_bounds:
        try:
            bw = exhaustive_repair_check(code)
        except VerificationFailure as exc:
            print(json.dumps({"violation": type(exc).__name__, "witness": exc.witness}))
            return EXIT_VIOLATION
    if bw is None:
        bw = repair_mod.measure_bandwidth(code)
    print(json.dumps(report_dict(code, bw), indent=2))
    return 0


def _default_bench_w(n: int, k: int) -> int:
    return 8 if math.comb(n, k) <= 100 else 16


def _bench_entry(entry: dict) -> dict:
    n, k, alpha_b = entry["n"], entry["k"], entry["alpha_base"]
    w = entry.get("field_w", _default_bench_w(n, k))
    params = CodeParams.create(n, k, alpha_b, w, entry.get("poly"),
                               entry.get("theta", 2), entry.get("seed", 0))
    code = make_code_from_params(params)
    out = report_dict(code, repair_mod.measure_bandwidth(code))
    published = PUBLISHED_AVG_PERCENT.get((n, k))
    out["published"] = (
        {"note": "published reference averages, percent of file size", **published}
        if published and alpha_b == 8 else None)
    return out


def cmd_bench(args) -> int:
    try:
        entries = json.loads(Path(args.params_file).read_text())
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: bad params file: {exc}", file=sys.stderr)
        return EXIT_INVALID
    results = []
    for entry in entries:
        try:
            results.append(_bench_entry(entry))
        except (KeyError, TypeError, InvalidParams, FieldTooSmall, MdsSearchExhausted) as exc:
            print(f"error: entry {entry!r}: {exc}", file=sys.stderr)
            return EXIT_INVALID
    if args.format == "json":
        print(json.dumps(results, indent=2))
    else:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["n", "k", "alpha_base", "alpha", "field_w", "seed", "mds",
                         "avg_fraction", "systematic_avg", "parity_avg",
                         "eq1_optimum_fraction", "prop1_lower", "prop1_upper",
                         "published_hashtag_plus"])
        for res in results:
            par = res["params"]
            pub = res.get("published") or {}
            writer.writerow([par["n"], par["k"], par["alpha_base"], par["alpha"],
                             par["field_w"], par["seed"], res["mds"],
                             res["avg_fraction"], res["systematic_avg"],
                             res["parity_avg"], res["eq1_optimum_fraction"],
                             res["prop1_bounds"][0], res["prop1_bounds"][1],
                             pub.get("hashtag_plus", "")])
        print(buf.getvalue(), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="htplus",
                                  description="HashTag+ erasure coding toolkit")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-code", help="construct and verify a code, print its descriptor")
    _add_code_flags(p)
    p.set_defaults(func=cmd_gen_code)

    p = sub.add_parser("encode", help="encode a file into n shard files")
    p.add_argument("--input", required=True)
    p.add_argument("--out-dir", required=True, dest="out_dir")
    _add_code_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="rebuild a file from any k shards")
    p.add_argument("--shards", required=True,
                   help="shard directory or comma-separated shard files")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("repair", help="regenerate a lost shard from the survivors")
    p.add_argument("--shards", required=True)
    p.add_argument("--failed", type=int, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--dry-run", action="store_true", dest="dry_run")
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("verify", help="check MDS and repair-bound properties")
    p.add_argument("--mds", action="store_true")
    p.add_argument("--bounds", action="store_true")
    p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    _add_code_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="average repair bandwidth table for a parameter list")
    p.add_argument("--params-file", required=True, dest="params_file")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_bench)
    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotEnoughShards as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHARDS
    except ShardFormatError as exc:
        print(f"shard error: {exc}", file=sys.stderr)
        return EXIT_HEADER
    except HtplusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
