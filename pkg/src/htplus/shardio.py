"""Bit-exact shard serialization.

A shard file is one node's column stream: a fixed 41-byte header followed by
the node's alpha symbols per stripe, row-major within each stripe.  Symbols
pack two per byte for w=4 (low nibble first), one byte for w=8 and
little-endian pairs for w=16.  All multi-byte header integers are
little-endian; the header ends with a CRC-32C of the preceding bytes.

Headers carry the full deterministic construction inputs (n, k, alpha_b,
field, theta, seed), so any k shards of one encode run suffice to rebuild
the code and the file without shipping coefficient tensors.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .base import CodeParams
from .errors import CorruptHeader, InvalidParams, TruncatedPayload, UnsupportedVersion

MAGIC = b"HTP1"
VERSION = 1

_HEAD_FMT = "<4sBBBHBIHQBIQ"  # magic..payload_len, then crc32c
_HEAD_LEN = struct.calcsize(_HEAD_FMT)
HEADER_LEN = _HEAD_LEN + 4


def _crc32c_table():
    poly = 0x82F63B78
    table = []
    for i in range(256):
        c = i
        for _ in range(8):
            c = (c >> 1) ^ poly if c & 1 else c >> 1
        table.append(c)
    return table


_CRC_TABLE = _crc32c_table()


def crc32c(data: bytes) -> int:
    crc = 0xFFFFFFFF
    for b in data:
        crc = (crc >> 8) ^ _CRC_TABLE[(crc ^ b) & 0xFF]
    return crc ^ 0xFFFFFFFF


@dataclass(frozen=True)
class ShardHeader:
    n: int
    k: int
    alpha_b: int
    field_w: int
    poly: int
    theta: int
    seed: int
    node_id: int
    stripe_count: int
    payload_len: int  # original file length in bytes, before padding
    version: int = VERSION

    @property
    def alpha(self) -> int:
        return (self.n - self.k) * self.alpha_b

    @property
    def symbol_bytes(self) -> float:
        return {4: 0.5, 8: 1, 16: 2}[self.field_w]

    def column_bytes_per_stripe(self) -> int:
        return symbols_byte_len(self.alpha, self.field_w)

    def compat_key(self):
        """Fields that must agree across the shards of one decode."""
        return (self.n, self.k, self.alpha_b, self.field_w, self.poly,
                self.theta, self.seed, self.stripe_count, self.payload_len)

    def to_params(self) -> CodeParams:
        return CodeParams.create(self.n, self.k, self.alpha_b, self.field_w,
                                 self.poly, self.theta, self.seed)

    def pack(self) -> bytes:
        body = struct.pack(_HEAD_FMT, MAGIC, self.version, self.n, self.k,
                           self.alpha_b, self.field_w, self.poly, self.theta,
                           self.seed, self.node_id, self.stripe_count,
                           self.payload_len)
        return body + struct.pack("<I", crc32c(body))

    @classmethod
    def unpack(cls, raw: bytes) -> "ShardHeader":
        if len(raw) < HEADER_LEN:
            raise CorruptHeader(f"header needs {HEADER_LEN} bytes, got {len(raw)}")
        body, (crc,) = raw[:_HEAD_LEN], struct.unpack("<I", raw[_HEAD_LEN:HEADER_LEN])
        (magic, version, n, k, alpha_b, field_w, poly, theta, seed, node_id,
         stripe_count, payload_len) = struct.unpack(_HEAD_FMT, body)
        if magic != MAGIC:
            raise CorruptHeader(f"bad magic {magic!r}")
        if crc32c(body) != crc:
            raise CorruptHeader("header CRC mismatch")
        if version != VERSION:
            raise UnsupportedVersion(f"shard format version {version} not supported")
        hdr = cls(n=n, k=k, alpha_b=alpha_b, field_w=field_w, poly=poly,
                  theta=theta, seed=seed, node_id=node_id,
                  stripe_count=stripe_count, payload_len=payload_len,
                  version=version)
        if node_id >= n:
            raise CorruptHeader(f"node id {node_id} out of range for n={n}")
        try:
            hdr.to_params()
        except InvalidParams as exc:
            raise CorruptHeader(f"header parameters invalid: {exc}") from exc
        return hdr

    @staticmethod
    def for_code(params: CodeParams, node_id: int, stripe_count: int,
                 payload_len: int) -> "ShardHeader":
        return ShardHeader(n=params.n, k=params.k, alpha_b=params.alpha_b,
                           field_w=params.field.w, poly=params.field.poly,
                           theta=params.theta, seed=params.seed,
                           node_id=node_id, stripe_count=stripe_count,
                           payload_len=payload_len)


# -- symbol packing -------------------------------------------------------------


def symbols_byte_len(count: int, w: int) -> int:
    if w == 4:
        if count % 2:
            raise InvalidParams("w=4 packing requires an even symbol count")
        return count // 2
    return count * (w // 8)


def symbols_to_bytes(symbols: np.ndarray, w: int) -> bytes:
    vals = np.asarray(symbols, dtype=np.uint32).ravel()
    if w == 4:
        if vals.size % 2:
            raise InvalidParams("w=4 packing requires an even symbol count")
        lo = vals[0::2] & 0xF
        hi = vals[1::2] & 0xF
        return (lo | (hi << 4)).astype(np.uint8).tobytes()
    if w == 8:
        return vals.astype(np.uint8).tobytes()
    if w == 16:
        return vals.astype("<u2").tobytes()
    raise InvalidParams(f"unsupported width {w}")


def bytes_to_symbols(data: bytes, w: int) -> np.ndarray:
    raw = np.frombuffer(data, dtype=np.uint8)
    if w == 4:
        out = np.empty(raw.size * 2, dtype=np.int32)
        out[0::2] = raw & 0xF
        out[1::2] = raw >> 4
        return out
    if w == 8:
        return raw.astype(np.int32)
    if w == 16:
        if raw.size % 2:
            raise TruncatedPayload("w=16 payload has an odd byte count")
        return np.frombuffer(data, dtype="<u2").astype(np.int32)
    raise InvalidParams(f"unsupported width {w}")


# -- shard streams --------------------------------------------------------------


def write_shard(header: ShardHeader, stripe_columns) -> bytes:
    """Serialize one node's column data (list of alpha-symbol arrays, one per
    stripe) behind its header.  Byte-identical for identical inputs."""
    if len(stripe_columns) != header.stripe_count:
        raise InvalidParams(
            f"{len(stripe_columns)} stripes supplied, header says {header.stripe_count}")
    chunks = [header.pack()]
    for col in stripe_columns:
        col = np.asarray(col)
        if col.size != header.alpha:
            raise InvalidParams(f"column has {col.size} symbols, expected {header.alpha}")
        chunks.append(symbols_to_bytes(col, header.field_w))
    return b"".join(chunks)


def read_shard(raw: bytes) -> tuple[ShardHeader, list[np.ndarray]]:
    """Parse and validate a shard stream; returns (header, per-stripe columns)."""
    header = ShardHeader.unpack(raw)
    per_stripe = header.column_bytes_per_stripe()
    expected = HEADER_LEN + per_stripe * header.stripe_count
    if len(raw) < expected:
        raise TruncatedPayload(f"shard has {len(raw)} bytes, expected {expected}")
    if len(raw) > expected:
        raise CorruptHeader(f"shard has {len(raw) - expected} trailing bytes")
    cols = []
    off = HEADER_LEN
    for _ in range(header.stripe_count):
        cols.append(bytes_to_symbols(raw[off:off + per_stripe], header.field_w))
        off += per_stripe
    return header, cols
