"""Stripe encode/decode and file striping."""

from itertools import combinations

import numpy as np
import pytest

import htplus
from htplus import codec
from htplus.errors import DimensionMismatch, NotEnoughShards


def test_decode_every_k_subset(code_6_4_a4, rng):
    code = code_6_4_a4
    p = code.params
    data = rng.integers(0, 16, size=(p.alpha, p.k)).astype(np.int32)
    word = codec.encode(code, data)
    subsets = list(combinations(range(p.n), p.k))
    assert len(subsets) == 15
    for sub in subsets:
        got = codec.decode_any_k(code, {m: word[:, m] for m in sub})
        assert np.array_equal(got, data), sub


def test_decode_mixed_subset_small(code_6_4_a2, rng):
    code = code_6_4_a2
    p = code.params
    data = rng.integers(0, 16, size=(p.alpha, p.k)).astype(np.int32)
    word = codec.encode(code, data)
    got = codec.decode_any_k(code, {m: word[:, m] for m in (0, 1, 2, 4)})
    assert np.array_equal(got, data)


def test_decode_rejects_bad_shard_sets(code_6_4_a4, rng):
    code = code_6_4_a4
    p = code.params
    data = rng.integers(0, 16, size=(p.alpha, p.k)).astype(np.int32)
    word = codec.encode(code, data)
    with pytest.raises(NotEnoughShards):
        codec.decode_any_k(code, {m: word[:, m] for m in (0, 1, 2)})
    with pytest.raises(NotEnoughShards):
        # a duplicated node id leaves fewer than k distinct columns
        codec.decode_any_k(code, [(0, word[:, 0]), (0, word[:, 0]),
                                  (1, word[:, 1]), (2, word[:, 2])])
    with pytest.raises(DimensionMismatch):
        codec.decode_any_k(code, {0: word[:-1, 0], 1: word[:, 1],
                                  2: word[:, 2], 3: word[:, 3]})


def test_systematic_fast_path_does_no_algebra(code_6_4_a4, rng, monkeypatch):
    code = code_6_4_a4
    p = code.params
    data = rng.integers(0, 16, size=(p.alpha, p.k)).astype(np.int32)
    word = codec.encode(code, data)

    def boom(*a, **kw):  # decode of all systematic columns must not solve
        raise AssertionError("field solve reached on the systematic fast path")

    monkeypatch.setattr(type(code.field), "solve", boom)
    monkeypatch.setattr(type(code.field), "matmul", boom)
    got = codec.decode_any_k(code, {m: word[:, m] for m in range(p.k)})
    assert np.array_equal(got, data)


def test_file_striping_round_trip(code_6_4_a4, rng):
    p = code_6_4_a4.params
    per = codec.stripe_byte_len(p)
    assert per == p.stripe_symbols // 2  # w=4 packs two symbols per byte
    for size in (0, 1, per, per + 1, 3 * per - 5):
        data = rng.bytes(size)
        blocks = codec.file_to_blocks(p, data)
        assert len(blocks) == codec.stripe_count_for(p, size)
        assert codec.blocks_to_file(p, blocks, size) == data


def test_full_file_pipeline_any_subset(code_6_4_a4, rng):
    code = code_6_4_a4
    p = code.params
    data = rng.bytes(200)
    blocks = codec.file_to_blocks(p, data)
    words = [codec.encode(code, b) for b in blocks]
    for sub in ((0, 1, 2, 3), (0, 1, 4, 5), (2, 3, 4, 5)):
        rec = codec.blocks_to_file(
            p, [codec.decode_any_k(code, {m: w[:, m] for m in sub}) for w in words],
            len(data))
        assert rec == data


def test_batched_stripes_match_loop(code_9_6_a3, rng):
    code = code_9_6_a3
    p = code.params
    fld = code.field
    batch = rng.integers(0, 256, size=(p.k * p.alpha, 32)).astype(np.int32)
    # one matmul for 32 stripes equals stripe-by-stripe encodes
    par = fld.matmul(code.parity_generator, batch)
    for s in range(32):
        data = batch[:, s].reshape(p.k, p.alpha).T
        word = codec.encode(code, data)
        assert np.array_equal(par[:, s].reshape(p.r, p.alpha).T, word[:, p.k:])
