"""Lift of a base code to the full construction: instances, permutation, pairing.

The full code stacks r instances of the base code, so every node stores
alpha = r * alpha_b symbols; instance v of node m occupies rows
[v*alpha_b, (v+1)*alpha_b).  Let p_l^(v) denote the base parity block l
computed over instance v.  Two deterministic transforms are applied to the
r x r grid of raw parity blocks:

* permutation: block p_l^(v) is stored on parity node (l + v) mod r, in
  instance slot v (cyclic index arithmetic), so the pre-pairing content of
  parity node lam, slot s is q(lam, s) = p_((lam - s) mod r)^(s);
* pairing: slot s of node lam and slot lam of node s are mixed symbol-wise,
  stored(lam, s) = theta_(lam,s) * q(lam, s) + q(s, lam), except the diagonal
  slots s == lam which are stored unmodified.  Exactly one coefficient of
  each unordered pair equals theta and the other equals 1, so each pair
  unmixes by solving an invertible 2x2 system.

The diagonal slot of node v therefore carries the plain row parity of
instance v, which is what phase 1 of systematic repair consumes, while every
off-diagonal stored block mixes one block of its own instance with one block
of a partner instance, which is what makes parity repair possible from a
single instance's worth of reads.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield

import numpy as np

from .base import BaseCode, CodeParams, build_index_arrays, build_partition, assign_coefficients
from .errors import DimensionMismatch, SingularPairing
from .gf import Field, field_for


@dataclass(frozen=True)
class PairingSlot:
    """Descriptor of one (parity node, instance slot) stored block."""

    node: int
    instance: int
    paired: bool
    partner: tuple[int, int] | None  # (node, instance) of the partner slot
    own_coeff: int
    partner_coeff: int


@dataclass(frozen=True)
class PlusCode:
    """A full code instance: shared base code plus pairing metadata and the
    flattened alpha-level parity generator."""

    base: BaseCode
    pairing: tuple[PairingSlot, ...]
    _gen: np.ndarray = dfield(compare=False, repr=False, default=None)

    @property
    def params(self) -> CodeParams:
        return self.base.params

    @property
    def field(self) -> Field:
        return field_for(self.base.params.field)

    @property
    def mds_mode(self) -> str:
        return self.base.mds_mode

    @property
    def parity_generator(self) -> np.ndarray:
        """(r*alpha) x (k*alpha) matrix from node-major flattened data to
        node-major flattened parity columns; decode and MDS verification share
        this one code path."""
        return self._gen

    def slot(self, node: int, instance: int) -> PairingSlot:
        return self.pairing[node * self.params.r + instance]

    def theta_coeff(self, node: int, instance: int) -> int:
        """theta_(l,i) of the pairing rule: theta when l < i, else 1."""
        return self.params.theta if node < instance else 1


def _pairing_table(params: CodeParams) -> tuple[PairingSlot, ...]:
    out = []
    for lam in range(params.r):
        for s in range(params.r):
            if lam == s:
                out.append(PairingSlot(lam, s, False, None, 1, 0))
            else:
                own = params.theta if lam < s else 1
                partner = params.theta if s < lam else 1
                out.append(PairingSlot(lam, s, True, (s, lam), own, partner))
    return tuple(out)


def _plus_generator(base: BaseCode) -> np.ndarray:
    p = base.params
    ab, k, r, alpha = p.alpha_b, p.k, p.r, p.alpha
    bgen = base.parity_generator  # (r*ab) x (k*ab), node-major both sides
    gen = np.zeros((r * alpha, k * alpha), dtype=np.int32)
    fld = base.field

    def add_raw(rows, l, v, coeff):
        # accumulate coeff * p_l^(v) into the given generator row block
        block = bgen[l * ab:(l + 1) * ab, :] if coeff == 1 else \
            fld.scale_vec(coeff, bgen[l * ab:(l + 1) * ab, :])
        for j in range(k):
            cols = slice(j * alpha + v * ab, j * alpha + (v + 1) * ab)
            gen[rows, cols] ^= block[:, j * ab:(j + 1) * ab]

    for lam in range(r):
        for s in range(r):
            rows = slice(lam * alpha + s * ab, lam * alpha + (s + 1) * ab)
            if lam == s:
                add_raw(rows, 0, lam, 1)
            else:
                theta_own = p.theta if lam < s else 1
                add_raw(rows, (lam - s) % r, s, theta_own)
                add_raw(rows, (s - lam) % r, lam, 1)
    return gen


def build_plus_code(base: BaseCode) -> PlusCode:
    """Deterministic lift; the base code was already accepted as MDS."""
    return PlusCode(base=base, pairing=_pairing_table(base.params),
                    _gen=_plus_generator(base))


def make_code(n: int, k: int, alpha_b: int, field_w: int = 8,
              poly: int | None = None, theta: int = 2, seed: int = 0) -> PlusCode:
    """Construct and verify a full code from scratch."""
    params = CodeParams.create(n, k, alpha_b, field_w, poly, theta, seed)
    return make_code_from_params(params)


def make_code_from_params(params: CodeParams) -> PlusCode:
    partition = build_partition(params.k, params.r, params.alpha_b)
    indexes = build_index_arrays(params, partition)
    base = assign_coefficients(params, indexes)
    return build_plus_code(base)


def encode_plus(code: PlusCode, data: np.ndarray) -> np.ndarray:
    """Encode an alpha x k data block into the full alpha x n codeword.

    Systematic columns are the input verbatim; parity columns come from the
    cached generator.
    """
    p = code.params
    data = np.asarray(data, dtype=np.int32)
    if data.shape != (p.alpha, p.k):
        raise DimensionMismatch(f"data shape {data.shape} != {(p.alpha, p.k)}")
    flat = data.T.reshape(-1)
    par = code.field.matmul(code.parity_generator, flat).reshape(p.r, p.alpha)
    out = np.zeros((p.alpha, p.n), dtype=np.int32)
    out[:, :p.k] = data
    out[:, p.k:] = par.T
    return out


def unpair(code: PlusCode, stored_own: np.ndarray, stored_partner: np.ndarray,
           node: int, instance: int):
    """Recover the raw pre-pairing blocks of one unordered pair.

    Given stored(node, instance) and stored(instance, node), returns
    (q(node, instance), q(instance, node)).
    """
    p = code.params
    slot = code.slot(node, instance)
    if not slot.paired:
        raise SingularPairing(f"slot ({node},{instance}) is unpaired")
    fld = code.field
    t_own = slot.own_coeff
    t_partner = code.slot(instance, node).own_coeff
    det = fld.add(fld.mul(t_own, t_partner), 1)
    if det == 0:
        raise SingularPairing("pairing system is singular; theta must differ from 1")
    det_inv = fld.inv(det)
    a = np.asarray(stored_own, dtype=np.int32)
    b = np.asarray(stored_partner, dtype=np.int32)
    # a = t_own*u + v, b = t_partner*v + u  =>  u = (t_partner*a + b)/det
    u = fld.scale_vec(det_inv, fld.scale_vec(t_partner, a) ^ b)
    v = a ^ fld.scale_vec(t_own, u)
    return u, v


def raw_parity_blocks(code: PlusCode, parity_columns: np.ndarray) -> np.ndarray:
    """Invert permutation and pairing of full parity columns.

    parity_columns has shape (alpha, r); returns raw[l, v] = p_l^(v) as an
    (r, r, alpha_b) array.  Test/verification helper: the inverse of the two
    lift transforms.
    """
    p = code.params
    cols = np.asarray(parity_columns, dtype=np.int32)
    if cols.shape != (p.alpha, p.r):
        raise DimensionMismatch(f"parity shape {cols.shape} != {(p.alpha, p.r)}")
    raw = np.zeros((p.r, p.r, p.alpha_b), dtype=np.int32)
    for lam in range(p.r):
        for s in range(p.r):
            stored = cols[s * p.alpha_b:(s + 1) * p.alpha_b, lam]
            l = (lam - s) % p.r
            if lam == s:
                raw[0, lam] = stored
            elif s < lam:
                partner = cols[lam * p.alpha_b:(lam + 1) * p.alpha_b, s]
                u, v = unpair(code, stored, partner, lam, s)
                raw[l, s] = u
                raw[(s - lam) % p.r, lam] = v
    return raw
