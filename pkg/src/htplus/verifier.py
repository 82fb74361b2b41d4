"""Brute-force oracles: exhaustive MDS verification and repair measurement.

verify_mds checks, for every k-subset of nodes, that the codeword restriction
to those nodes determines the data.  With the identity rows of the supplied
systematic nodes eliminated first, that reduces to a square rank check of the
parity generator restricted to (chosen parity nodes) x (missing systematic
nodes).  Desk-scale codes (k*alpha <= 512) are checked exhaustively in
lexicographic subset order so failure witnesses are reproducible; bigger
codes fall back to 1000 seeded random subsets and are reported as
"sampled" rather than "verified".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .base import splitmix64
from .errors import BoundViolation, RepairMismatch
from .gf import Field

FULL_CHECK_LIMIT = 512
SUBSET_LIMIT = 2000
SAMPLE_COUNT = 1000


@dataclass(frozen=True)
class MdsResult:
    ok: bool
    mode: str  # "verified" | "sampled"
    checked: int
    failing_subset: tuple[int, ...] | None = None


def rank(field: Field, matrix) -> int:
    """Row rank over the field via exact elimination."""
    return field.rank(np.asarray(matrix, dtype=np.int32))


def subset_decodable(field: Field, parity_gen: np.ndarray, k: int, alpha: int,
                     subset) -> bool:
    """True when the k node columns in `subset` determine the data."""
    subset = sorted(subset)
    missing = [j for j in range(k) if j not in subset]
    if not missing:
        return True
    parities = [m - k for m in subset if m >= k]
    if len(parities) < len(missing):
        return False  # cannot happen for a true k-subset
    rows = np.concatenate([np.arange(lam * alpha, (lam + 1) * alpha) for lam in parities])
    cols = np.concatenate([np.arange(j * alpha, (j + 1) * alpha) for j in missing])
    sub = parity_gen[np.ix_(rows, cols)]
    return field.rank(sub) == len(missing) * alpha


def _block_alpha(code) -> int:
    # a PlusCode stores alpha symbols per node, a BaseCode alpha_b
    return code.params.alpha if hasattr(code, "base") else code.params.alpha_b


def iter_subsets_for(code):
    """Subset iterator and mode used to verify `code`; deterministic."""
    p = code.params
    if (p.k * _block_alpha(code) <= FULL_CHECK_LIMIT
            and math.comb(p.n, p.k) <= SUBSET_LIMIT):
        return combinations(range(p.n), p.k), "verified", math.comb(p.n, p.k)

    def sampled():
        state = p.seed ^ 0xC0FFEE
        population = list(range(p.n))
        for _ in range(SAMPLE_COUNT):
            chosen = []
            pool = population.copy()
            for need in range(p.k):
                state, out = splitmix64(state)
                chosen.append(pool.pop(out % len(pool)))
            yield tuple(sorted(chosen))

    return sampled(), "sampled", SAMPLE_COUNT


def verify_mds(code) -> MdsResult:
    """Check that every (or, beyond desk scale, a 1000-subset sample of)
    k-subset of node columns decodes; returns the first failing subset."""
    p = code.params
    subsets, mode, total = iter_subsets_for(code)
    alpha = _block_alpha(code)
    for subset in subsets:
        if not subset_decodable(code.field, code.parity_generator, p.k, alpha, subset):
            return MdsResult(ok=False, mode=mode, checked=total,
                             failing_subset=tuple(subset))
    return MdsResult(ok=True, mode=mode, checked=total)


def exhaustive_repair_check(code, seed: int = 0x5EED):
    """Plan and execute a repair of every node on random data.

    Asserts symbol exactness for every node, exact conformance of every
    parity node to the single-parity-repair optimum, and conformance of every
    systematic node to the proven [lower, upper] read-count window.  Returns
    the aggregated bandwidth report; raises a VerificationFailure with a
    witness on the first violation.
    """
    from .plus import encode_plus
    from .repair import (measure_bandwidth, parity_bandwidth, plan_repair,
                         execute_repair, systematic_bounds)

    p = code.params
    rng = np.random.default_rng(seed)
    data = rng.integers(0, p.field.order, size=(p.alpha, p.k), dtype=np.int64).astype(np.int32)
    word = encode_plus(code, data)
    shards = {m: word[:, m].copy() for m in range(p.n)}

    lo, hi = systematic_bounds(p.n, p.k, p.r, p.alpha)
    lo_sym, hi_sym = lo * p.alpha, hi * p.alpha
    parity_sym = parity_bandwidth(p.n, p.r, p.alpha) * p.alpha

    for node in range(p.n):
        plan = plan_repair(code, node)
        helpers = {m: c for m, c in shards.items() if m != node}
        rebuilt = execute_repair(code, plan, helpers)
        if not np.array_equal(rebuilt, word[:, node]):
            raise RepairMismatch(f"repair of node {node} is not symbol-exact",
                                 witness={"node": node})
        nreads = len(plan.reads)
        if node >= p.k:
            if nreads != parity_sym:
                raise BoundViolation(
                    f"parity node {node} read {nreads} symbols; optimum is {parity_sym}",
                    witness={"node": node, "reads": nreads, "expected": int(parity_sym)})
        else:
            if not lo_sym <= nreads <= hi_sym:
                raise BoundViolation(
                    f"systematic node {node} read {nreads} symbols; "
                    f"window is [{lo_sym}, {hi_sym}]",
                    witness={"node": node, "reads": nreads,
                             "window": [float(lo_sym), float(hi_sym)]})
    return measure_bandwidth(code)
