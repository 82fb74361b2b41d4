"""Full-file encode to n shards and decode from any k of them.

One stripe is an alpha x k symbol block (M = k*alpha symbols); files are
split into ceil(bytes / stripe_bytes) stripes with the last stripe
zero-padded, and the pre-padding length travels in the shard headers.
Within a stripe the symbol stream fills column-by-column, so systematic
shard j carries a contiguous slice of the file.
"""

from __future__ import annotations

import numpy as np

from .base import CodeParams
from .errors import DimensionMismatch, NotEnoughShards, SingularSubmatrix
from .gf import SingularMatrix
from .plus import PlusCode, encode_plus
from .shardio import bytes_to_symbols, symbols_byte_len, symbols_to_bytes


def encode(code: PlusCode, block: np.ndarray) -> np.ndarray:
    """Encode one stripe; systematic columns are the input verbatim."""
    return encode_plus(code, block)


def decode_any_k(code: PlusCode, shards) -> np.ndarray:
    """Reconstruct the alpha x k data block from exactly k node columns.

    shards maps node id -> column of alpha symbols (dict or iterable of
    (node, column) pairs).  Supplying all k systematic columns short-circuits
    to a pure copy with no field arithmetic.
    """
    p = code.params
    items = dict(shards.items() if hasattr(shards, "items") else shards)
    if len(items) != p.k:
        raise NotEnoughShards(f"need exactly {p.k} distinct node columns, got {len(items)}")
    for node, col in items.items():
        if not 0 <= node < p.n:
            raise NotEnoughShards(f"node id {node} out of range")
        if np.asarray(col).size != p.alpha:
            raise DimensionMismatch(f"column of node {node} has wrong length")

    out = np.zeros((p.alpha, p.k), dtype=np.int32)
    known = [m for m in sorted(items) if m < p.k]
    for m in known:
        out[:, m] = np.asarray(items[m], dtype=np.int32)
    missing = [m for m in range(p.k) if m not in items]
    if not missing:
        return out

    parities = sorted(m - p.k for m in items if m >= p.k)
    gen = code.parity_generator
    rows = np.concatenate([np.arange(lam * p.alpha, (lam + 1) * p.alpha) for lam in parities])
    miss_cols = np.concatenate([np.arange(j * p.alpha, (j + 1) * p.alpha) for j in missing])

    rhs = np.concatenate([np.asarray(items[p.k + lam], dtype=np.int32) for lam in parities])
    if known:
        known_cols = np.concatenate([np.arange(j * p.alpha, (j + 1) * p.alpha) for j in known])
        known_flat = np.concatenate([out[:, j] for j in known])
        rhs = rhs ^ code.field.matmul(gen[np.ix_(rows, known_cols)], known_flat)
    try:
        solved = code.field.solve(gen[np.ix_(rows, miss_cols)], rhs)
    except SingularMatrix as exc:
        raise SingularSubmatrix(
            f"subset {sorted(items)} does not decode; construction is not MDS") from exc
    for idx, j in enumerate(missing):
        out[:, j] = solved[idx * p.alpha:(idx + 1) * p.alpha]
    return out


# -- striping -------------------------------------------------------------------


def stripe_byte_len(params: CodeParams) -> int:
    return symbols_byte_len(params.stripe_symbols, params.field.w)


def stripe_count_for(params: CodeParams, payload_len: int) -> int:
    per = stripe_byte_len(params)
    return (payload_len + per - 1) // per


def file_to_blocks(params: CodeParams, data: bytes) -> list[np.ndarray]:
    """Split file bytes into zero-padded alpha x k stripe blocks."""
    per = stripe_byte_len(params)
    count = stripe_count_for(params, len(data))
    blocks = []
    for s in range(count):
        chunk = data[s * per:(s + 1) * per]
        if len(chunk) < per:
            chunk = chunk + b"\x00" * (per - len(chunk))
        symbols = bytes_to_symbols(chunk, params.field.w)
        blocks.append(symbols.reshape(params.k, params.alpha).T.astype(np.int32))
    return blocks


def blocks_to_file(params: CodeParams, blocks, payload_len: int) -> bytes:
    """Inverse of file_to_blocks; trims the zero padding."""
    chunks = []
    for block in blocks:
        block = np.asarray(block, dtype=np.int32)
        if block.shape != (params.alpha, params.k):
            raise DimensionMismatch(f"stripe block has shape {block.shape}")
        chunks.append(symbols_to_bytes(block.T.reshape(-1), params.field.w))
    return b"".join(chunks)[:payload_len]
