"""Brute-force oracles: subset rank checks against decode outcomes."""

from itertools import combinations

import numpy as np
import pytest

import htplus
from htplus import codec
from htplus.base import CoefficientTensor
from htplus.errors import BoundViolation, SingularSubmatrix
from htplus.gf import field_for, FieldSpec
from htplus.plus import build_plus_code
from htplus.verifier import exhaustive_repair_check, rank, subset_decodable, verify_mds


def test_rank_basics():
    f = field_for(FieldSpec(4, 0b11001))
    assert rank(f, np.eye(5, dtype=np.int32)) == 5
    assert rank(f, np.zeros((3, 4), dtype=np.int32)) == 0


def cofactor_det(f, m):
    m = [[int(x) for x in row] for row in m]
    n = len(m)
    if n == 1:
        return m[0][0]
    acc = 0
    for c in range(n):
        if m[0][c] == 0:
            continue
        minor = [row[:c] + row[c + 1:] for row in m[1:]]
        acc ^= f.mul(m[0][c], cofactor_det(f, minor))  # char 2: no signs
    return acc


def test_rank_matches_cofactor_determinant(rng):
    f = field_for(FieldSpec(4, 0b11001))
    for _ in range(40):
        m = rng.integers(0, 16, size=(4, 4)).astype(np.int32)
        assert (rank(f, m) == 4) == (cofactor_det(f, m) != 0)


def test_rank_invariant_under_row_ops(rng):
    f = field_for(FieldSpec(4, 0b11001))
    m = rng.integers(0, 16, size=(4, 6)).astype(np.int32)
    r0 = rank(f, m)
    assert rank(f, m[::-1]) == r0
    scaled = m.copy()
    scaled[1] = f.scale_vec(7, scaled[1])
    assert rank(f, scaled) == r0


def test_verify_mds_passes_for_built_codes(code_6_4_a4, code_9_6_a3):
    for code in (code_6_4_a4, code_9_6_a3):
        res = verify_mds(code)
        assert res.ok and res.mode == "verified"
    assert verify_mds(code_6_4_a4).checked == 15


def _corrupt(code):
    """Zero every coefficient fed by data symbol (0, 0)."""
    rows = tuple(tuple(tuple((sr, sn, 0 if (sr, sn) == (0, 0) else f)
                             for sr, sn, f in row) for row in arr)
                 for arr in code.base.tensor.rows)
    return build_plus_code(code.base.with_tensor(CoefficientTensor(rows=rows)))


def test_mutation_fails_with_witness_and_decode_agrees(code_6_4_a4, rng):
    bad = _corrupt(code_6_4_a4)
    res = verify_mds(bad)
    assert not res.ok and res.failing_subset is not None

    p = bad.params
    data = rng.integers(0, 16, size=(p.alpha, p.k)).astype(np.int32)
    word = codec.encode(bad, data)
    # every subset's rank verdict agrees with an actual decode attempt
    for sub in combinations(range(p.n), p.k):
        ranks_ok = subset_decodable(bad.field, bad.parity_generator,
                                    p.k, p.alpha, sub)
        if ranks_ok:
            got = codec.decode_any_k(bad, {m: word[:, m] for m in sub})
            assert np.array_equal(got, data)
        else:
            with pytest.raises(SingularSubmatrix):
                codec.decode_any_k(bad, {m: word[:, m] for m in sub})
    assert not subset_decodable(bad.field, bad.parity_generator, p.k, p.alpha,
                                res.failing_subset)


def test_exhaustive_repair_check_passes(code_6_4_a4, code_6_4_a2):
    bw = exhaustive_repair_check(code_6_4_a4)
    assert all(e.symbols_accessed == 20 for e in bw.per_node)
    bw = exhaustive_repair_check(code_6_4_a2)
    assert [e.symbols_accessed for e in bw.per_node] == [12, 12, 12, 12, 10, 10]


def test_exhaustive_repair_check_flags_bound_violations(code_6_4_a4, monkeypatch):
    import htplus.repair as repair_mod

    def tiny_bounds(n, k, r, alpha):
        from fractions import Fraction
        return Fraction(0), Fraction(1, alpha)  # absurd upper: 1 symbol

    monkeypatch.setattr(repair_mod, "systematic_bounds", tiny_bounds)
    with pytest.raises(BoundViolation):
        exhaustive_repair_check(code_6_4_a4)


def test_sampled_mode_beyond_desk_scale(code_24_18_a8):
    assert code_24_18_a8.mds_mode == "sampled"
    res = verify_mds(code_24_18_a8)
    assert res.ok and res.mode == "sampled" and res.checked == 1000
