"""Lift structure: permutation, pairing, unmixing."""

import numpy as np
import pytest

import htplus
from htplus.base import encode_base
from htplus.errors import DimensionMismatch
from htplus.gf import field_for
from htplus.plus import build_plus_code, encode_plus, raw_parity_blocks, unpair


def test_pairing_structure_r2(code_6_4_a4):
    code = code_6_4_a4
    slots = [code.slot(l, i) for l in range(2) for i in range(2)]
    unpaired = [(s.node, s.instance) for s in slots if not s.paired]
    paired = [(s.node, s.instance) for s in slots if s.paired]
    assert unpaired == [(0, 0), (1, 1)]
    assert set(paired) == {(0, 1), (1, 0)}
    assert code.slot(0, 1).partner == (1, 0)
    assert code.slot(1, 0).partner == (0, 1)
    # exactly one coefficient of the unordered pair equals theta
    coeffs = {code.slot(0, 1).own_coeff, code.slot(1, 0).own_coeff}
    assert coeffs == {1, code.params.theta}


def test_pairing_structure_r3(code_9_6_a3):
    code = code_9_6_a3
    r = code.params.r
    unpaired = [(l, i) for l in range(r) for i in range(r)
                if not code.slot(l, i).paired]
    assert unpaired == [(l, l) for l in range(r)]
    pairs = set()
    for l in range(r):
        for i in range(r):
            if l != i:
                s = code.slot(l, i)
                assert s.partner == (i, l)
                pairs.add(frozenset({(l, i), (i, l)}))
    assert len(pairs) == r * (r - 1) // 2  # 3 unordered pairs for r=3


def test_encode_plus_zero_and_systematic(code_6_4_a4, rng):
    code = code_6_4_a4
    p = code.params
    assert not encode_plus(code, np.zeros((p.alpha, p.k), dtype=np.int32)).any()
    data = rng.integers(0, 16, size=(p.alpha, p.k)).astype(np.int32)
    word = encode_plus(code, data)
    assert np.array_equal(word[:, :p.k], data)
    with pytest.raises(DimensionMismatch):
        encode_plus(code, data[:-1])


def test_diagonal_blocks_are_raw_row_parities(code_6_4_a4, rng):
    """Stored slot (v, v) is instance v's unmodified first base parity."""
    code = code_6_4_a4
    p = code.params
    data = rng.integers(0, 16, size=(p.alpha, p.k)).astype(np.int32)
    word = encode_plus(code, data)
    for v in range(p.r):
        inst = data[v * p.alpha_b:(v + 1) * p.alpha_b, :]
        raw = encode_base(code.base, inst)
        stored = word[v * p.alpha_b:(v + 1) * p.alpha_b, p.k + v]
        assert np.array_equal(stored, raw[:, 0])


def test_paired_symbol_has_theta_and_one(code_6_4_a4, rng):
    """Off-diagonal stored block = theta * own raw + 1 * partner raw."""
    code = code_6_4_a4
    p = code.params
    fld = field_for(p.field)
    data = rng.integers(0, 16, size=(p.alpha, p.k)).astype(np.int32)
    word = encode_plus(code, data)
    raws = [encode_base(code.base, data[v * p.alpha_b:(v + 1) * p.alpha_b, :])
            for v in range(p.r)]
    for lam in range(p.r):
        for s in range(p.r):
            if lam == s:
                continue
            q_own = raws[s][:, (lam - s) % p.r]
            q_partner = raws[lam][:, (s - lam) % p.r]
            own_c = code.slot(lam, s).own_coeff
            expect = fld.scale_vec(own_c, q_own) ^ q_partner
            stored = word[s * p.alpha_b:(s + 1) * p.alpha_b, p.k + lam]
            assert np.array_equal(stored, expect)
            assert {own_c, code.slot(s, lam).own_coeff} == {1, p.theta}


@pytest.mark.parametrize("w", [4, 8])
def test_unpair_round_trip(w, rng):
    code = htplus.make_code(6, 4, 2, field_w=w)
    p = code.params
    fld = field_for(p.field)
    for _ in range(100):
        u = rng.integers(0, p.field.order, size=p.alpha_b).astype(np.int32)
        v = rng.integers(0, p.field.order, size=p.alpha_b).astype(np.int32)
        t_own = code.slot(0, 1).own_coeff
        t_partner = code.slot(1, 0).own_coeff
        stored_a = fld.scale_vec(t_own, u) ^ v
        stored_b = fld.scale_vec(t_partner, v) ^ u
        got_u, got_v = unpair(code, stored_a, stored_b, 0, 1)
        assert np.array_equal(got_u, u) and np.array_equal(got_v, v)


def test_unpair_zero_blocks(code_6_4_a4):
    z = np.zeros(4, dtype=np.int32)
    u, v = unpair(code_6_4_a4, z, z, 0, 1)
    assert not u.any() and not v.any()


def test_raw_parity_blocks_inverts_lift(code_9_6_a3, rng):
    code = code_9_6_a3
    p = code.params
    data = rng.integers(0, p.field.order, size=(p.alpha, p.k)).astype(np.int32)
    word = encode_plus(code, data)
    raw = raw_parity_blocks(code, word[:, p.k:])
    for v in range(p.r):
        inst = data[v * p.alpha_b:(v + 1) * p.alpha_b, :]
        expect = encode_base(code.base, inst)
        for l in range(p.r):
            assert np.array_equal(raw[l, v], expect[:, l])


def test_encode_plus_linearity(code_6_4_a2, rng):
    code = code_6_4_a2
    p = code.params
    fld = field_for(p.field)
    x = rng.integers(0, 16, size=(p.alpha, p.k)).astype(np.int32)
    y = rng.integers(0, 16, size=(p.alpha, p.k)).astype(np.int32)
    lhs = encode_plus(code, fld.scale_vec(5, x) ^ y)
    rhs = fld.scale_vec(5, encode_plus(code, x)) ^ encode_plus(code, y)
    assert np.array_equal(lhs, rhs)


def test_build_is_deterministic(code_6_4_a4):
    again = build_plus_code(code_6_4_a4.base)
    assert np.array_equal(again.parity_generator, code_6_4_a4.parity_generator)
    assert again.pairing == code_6_4_a4.pairing
