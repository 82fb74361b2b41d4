"""GF(2^w) arithmetic and exact dense linear algebra.

Field elements are plain Python ints in [0, 2^w); bit i of an element is the
coefficient of x^i in the polynomial basis.  Addition is XOR.  Multiplication
goes through log/antilog tables built once per field, which keeps encode,
decode and repair throughput reasonable for w in {4, 8, 16}; correctness of
the tables is anchored in the test suite to a table-free carryless
multiply-and-reduce oracle.

Matrices are two-dimensional numpy int32 arrays of field values.  Elimination
is exact (there are no tolerances over a finite field) and pivots on the
first nonzero entry of each column.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParams, SingularMatrix, ZeroInverse

# Reduction polynomials used when the caller does not pick one.  Only the
# w=4 default is structurally significant (it matches the canonical worked
# (6,4) code over GF(16)); the others are the conventional choices.
DEFAULT_POLY = {4: 0b1_1001, 8: 0x11D, 16: 0x1100B}

SUPPORTED_WIDTHS = (4, 8, 16)


def _degree(p: int) -> int:
    return p.bit_length() - 1


def _poly_rem(a: int, b: int) -> int:
    """Remainder of a / b in GF(2)[x]."""
    db = _degree(b)
    while a and _degree(a) >= db:
        a ^= b << (_degree(a) - db)
    return a


def clmul_reduce(a: int, b: int, poly: int) -> int:
    """Carryless multiply then reduce modulo poly.  Table-free reference path."""
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        a <<= 1
        b >>= 1
    return _poly_rem(acc, poly)


def is_irreducible(poly: int) -> bool:
    """Trial division against every polynomial of degree 1..deg(poly)/2."""
    d = _degree(poly)
    if d < 1:
        return False
    for q in range(2, 1 << (d // 2 + 1)):
        if _poly_rem(poly, q) == 0:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """Bit width and reduction polynomial of a GF(2^w) field.

    The polynomial is encoded as an integer bitmask including the leading
    term, e.g. x^4 + x^3 + 1 -> 0b11001.
    """

    w: int
    poly: int

    def __post_init__(self):
        if self.w not in SUPPORTED_WIDTHS:
            raise InvalidParams(f"unsupported field width {self.w}; expected one of {SUPPORTED_WIDTHS}")
        if _degree(self.poly) != self.w:
            raise InvalidParams(f"polynomial 0x{self.poly:x} does not have degree {self.w}")
        if not is_irreducible(self.poly):
            raise InvalidParams(f"polynomial 0x{self.poly:x} is reducible over GF(2)")

    @property
    def order(self) -> int:
        return 1 << self.w

    @staticmethod
    def default(w: int, poly: int | None = None) -> "FieldSpec":
        return FieldSpec(w, DEFAULT_POLY[w] if poly is None else poly)


def _small_prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


class Field:
    """Arithmetic over one GF(2^w) instance.

    Immutable after construction; every method is pure, so instances are safe
    to share across threads.
    """

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        self.q = spec.order
        self.poly = spec.poly
        g = self._find_generator()
        exp = np.zeros(2 * (self.q - 1), dtype=np.int32)
        log = np.zeros(self.q, dtype=np.int32)
        x = 1
        for i in range(self.q - 1):
            exp[i] = x
            log[x] = i
            x = clmul_reduce(x, g, self.poly)
        if x != 1:
            raise InvalidParams(f"element {g} does not generate GF(2^{spec.w})")
        exp[self.q - 1:] = exp[: self.q - 1]
        self._exp = exp
        self._log = log
        self.generator = g

    def _pow_nt(self, a: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = clmul_reduce(r, a, self.poly)
            a = clmul_reduce(a, a, self.poly)
            e >>= 1
        return r

    def _find_generator(self) -> int:
        factors = _small_prime_factors(self.q - 1)
        for g in range(2, self.q):
            if all(self._pow_nt(g, (self.q - 1) // p) != 1 for p in factors):
                return g
        raise InvalidParams("no generator found; field construction is broken")

    # -- scalar operations ------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return a ^ b

    sub = add

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self._exp[self._log[a] + self._log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroInverse("zero has no multiplicative inverse")
        return int(self._exp[self.q - 1 - self._log[a]])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 1 if e == 0 else 0
        return int(self._exp[(int(self._log[a]) * e) % (self.q - 1)])

    # -- vectorized operations on numpy arrays of field values -----------

    def mul_vec(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.int32)
        b = np.asarray(b, dtype=np.int32)
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int32)
        mask = (a != 0) & (b != 0)
        if mask.any():
            out[mask] = self._exp[self._log[a[mask]] + self._log[b[mask]]]
        return out

    def scale_vec(self, c: int, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.int32)
        if c == 0:
            return np.zeros_like(v)
        out = np.zeros_like(v)
        mask = v != 0
        out[mask] = self._exp[self._log[v[mask]] + self._log[c]]
        return out

    def outer_mul(self, col: np.ndarray, row: np.ndarray) -> np.ndarray:
        """col[i] * row[j] for all i, j."""
        col = np.asarray(col, dtype=np.int32)
        row = np.asarray(row, dtype=np.int32)
        out = np.zeros((col.size, row.size), dtype=np.int32)
        cm = col != 0
        rm = row != 0
        if cm.any() and rm.any():
            sub = self._exp[self._log[col[cm]][:, None] + self._log[row[rm]][None, :]]
            block = out[cm]
            block[:, rm] = sub
            out[cm] = block
        return out

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Matrix product over the field; b may be a matrix or a vector."""
        a = np.asarray(a, dtype=np.int32)
        b = np.asarray(b, dtype=np.int32)
        vec = b.ndim == 1
        if vec:
            b = b[:, None]
        if a.shape[1] != b.shape[0]:
            raise SingularMatrix(f"shape mismatch {a.shape} @ {b.shape}")
        out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int32)
        for i in range(a.shape[1]):
            out ^= self.outer_mul(a[:, i], b[i, :])
        return out[:, 0] if vec else out

    # -- elimination -------------------------------------------------------

    def _eliminate(self, a: np.ndarray, b: np.ndarray | None, full: bool):
        """Forward (or full Gauss-Jordan) elimination, first-nonzero pivoting.

        Returns (a, b, pivot_count).  Exact over the field; no scaling
        heuristics exist or are needed.
        """
        a = np.array(a, dtype=np.int32)
        if b is not None:
            b = np.array(b, dtype=np.int32)
        m, n = a.shape
        piv = 0
        for col in range(n):
            if piv == m:
                break
            nz = np.nonzero(a[piv:, col])[0]
            if nz.size == 0:
                continue
            p = piv + int(nz[0])
            if p != piv:
                a[[piv, p]] = a[[p, piv]]
                if b is not None:
                    b[[piv, p]] = b[[p, piv]]
            pinv = self.inv(int(a[piv, col]))
            if pinv != 1:
                a[piv] = self.scale_vec(pinv, a[piv])
                if b is not None:
                    b[piv] = self.scale_vec(pinv, b[piv])
            if full:
                rows = np.nonzero(a[:, col])[0]
                rows = rows[rows != piv]
            else:
                rows = piv + 1 + np.nonzero(a[piv + 1:, col])[0]
            if rows.size:
                factors = a[rows, col]
                a[rows] ^= self.outer_mul(factors, a[piv])
                if b is not None:
                    b[rows] ^= self.outer_mul(factors, b[piv])
            piv += 1
        return a, b, piv

    def rank(self, a: np.ndarray) -> int:
        a = np.asarray(a, dtype=np.int32)
        if a.size == 0:
            return 0
        _, _, piv = self._eliminate(a, None, full=False)
        return piv

    def solve(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Solve a @ x = b for square invertible a; b may hold many columns."""
        a = np.asarray(a, dtype=np.int32)
        b = np.asarray(b, dtype=np.int32)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise SingularMatrix(f"solve requires a square matrix, got {a.shape}")
        vec = b.ndim == 1
        rhs = b[:, None] if vec else b
        if rhs.shape[0] != a.shape[0]:
            raise SingularMatrix("right-hand side length does not match matrix")
        _, x, piv = self._eliminate(a, rhs, full=True)
        if piv < a.shape[0]:
            raise SingularMatrix(f"matrix is singular (rank {piv} < {a.shape[0]})")
        return x[:, 0] if vec else x

    def invert(self, a: np.ndarray) -> np.ndarray:
        n = np.asarray(a).shape[0]
        return self.solve(a, np.eye(n, dtype=np.int32))


@lru_cache(maxsize=None)
def field_for(spec: FieldSpec) -> Field:
    """Shared Field instance per spec; tables are immutable."""
    return Field(spec)


def as_matrix(entries, rows: int, cols: int) -> np.ndarray:
    """Build a rows x cols field matrix from row-major entries."""
    m = np.asarray(list(entries), dtype=np.int32).reshape(rows, cols)
    return m
