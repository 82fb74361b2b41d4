"""Single-node repair: planning, execution and bandwidth accounting.

Systematic node j is repaired in two phases, instance by instance, driven by
its designated row set S (the scheduler's repair rows, |S| = ceil(alpha_b/r)
rows inside each instance):

* phase 1 reads rows S of every surviving systematic column plus rows S of
  each instance's diagonal parity slot (the plain row parity of that
  instance) and solves each lost symbol of rows S directly;
* phase 2 reads, for every scheduled cell (array l, row t) of node j, the
  stored paired symbols at row t of the parity slots carrying p_l of each
  instance together with their pairing partners, unmixes the 2x2 pairs, and
  solves each remaining lost symbol from the parity row in which the
  scheduler placed it.  Extra symbols referenced by those parity rows that
  phase 1 did not already cover are read once, globally deduplicated.

A parity node is repaired from a single instance: all systematic symbols of
instance lam plus the instance-lam slot of every surviving parity node.
Re-encoding the instance yields every raw parity block of that instance;
each read slot then unmixes to the failed node's own pre-pairing block, and
every stored block of the failed node is recomposed exactly.  That costs
(n-1) * ceil(alpha/r) symbol reads for any sub-packetization.

Plans list every symbol access explicitly; a symbol is accessed exactly once
and everything accessed is transferred (access-optimal accounting).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidNode, InvalidParams, MissingRead
from .plus import PlusCode, unpair

Read = tuple[int, int, int]  # (node id, instance slot, row within instance)


# -- reference bound functions -----------------------------------------------


def optimal_bandwidth(n: int, k: int, M: int) -> Fraction:
    """Minimum symbols transferred to repair one node of an (n, k) MDS code
    storing M symbols: (M/k) * (n-1)/(n-k)."""
    if n <= k or k < 1 or M < 0 or M % k != 0:
        raise InvalidParams(f"invalid bound arguments n={n} k={k} M={M}")
    return Fraction(M, k) * Fraction(n - 1, n - k)


def systematic_bounds(n: int, k: int, r: int, alpha: int) -> tuple[Fraction, Fraction]:
    """Proven [lower, upper] single-systematic-node repair cost in units of
    one node's capacity (alpha symbols)."""
    if n != k + r or r < 1 or k < 1 or alpha < 1:
        raise InvalidParams(f"invalid bound arguments n={n} k={k} r={r} alpha={alpha}")
    ceil_ar = math.ceil(alpha / r)
    lower = Fraction(n - 1, alpha) * ceil_ar
    upper = lower + Fraction(r - 1, alpha) * ceil_ar * math.ceil(k / r)
    return lower, upper


def parity_bandwidth(n: int, r: int, alpha: int) -> Fraction:
    """Exact single-parity-node repair cost in node-capacity units:
    (n-1)/alpha * ceil(alpha/r); meets the MDS repair lower bound."""
    if r < 1 or n <= r or alpha < 1:
        raise InvalidParams(f"invalid bound arguments n={n} r={r} alpha={alpha}")
    return Fraction(n - 1, alpha) * math.ceil(alpha / r)


# -- plan structures ----------------------------------------------------------


@dataclass(frozen=True)
class RowSolve:
    """Recover a[row, j] of one instance from a parity equation of that row:
    the diagonal (row parity) read when array == 0, else an already-unmixed
    raw parity whose scheduled extras are all known."""
    instance: int
    row: int
    array: int = 0


@dataclass(frozen=True)
class PairSolve:
    """Unmix stored(node_a, node_b)[row] / stored(node_b, node_a)[row] into
    the raw pre-pairing parity values."""
    node_a: int
    node_b: int
    row: int


@dataclass(frozen=True)
class ForeignSolve:
    """Recover a surviving node's symbol a[src_row, node] from a spare raw
    parity equation instead of reading it."""
    instance: int
    array: int
    row: int
    src_row: int
    node: int


@dataclass(frozen=True)
class CellSolve:
    """Recover a[src_row, j] of one instance from raw parity l at `row`."""
    instance: int
    array: int
    row: int
    src_row: int


@dataclass(frozen=True)
class ReencodeInstance:
    """Recompute all raw parity blocks of one instance from its data."""
    instance: int


@dataclass(frozen=True)
class ExtractPartner:
    """From stored(helper, lam) recover the failed parity node's own raw slot
    q(lam, helper)."""
    helper: int


@dataclass(frozen=True)
class ComposeBlock:
    """Re-apply the pairing rule to rebuild stored(lam, slot)."""
    slot: int


@dataclass(frozen=True)
class RepairPlan:
    """Explicit reads plus the ordered solve steps that consume them."""

    failed_node: int
    reads: tuple[Read, ...]
    solve_steps: tuple

    @property
    def symbols_accessed(self) -> int:
        return len(self.reads)

    @property
    def symbols_transferred(self) -> int:
        return len(self.reads)

    def reads_by_node(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for node, _, _ in self.reads:
            out[node] = out.get(node, 0) + 1
        return out


# -- planners ------------------------------------------------------------------


def plan_systematic_repair(code: PlusCode, j: int) -> RepairPlan:
    p = code.params
    if not 0 <= j < p.k:
        raise InvalidNode(f"systematic node id {j} outside [0, {p.k})")
    part = code.base.indexes.partition[j]
    s_rows = sorted(part.rows)
    s_set = set(s_rows)
    tensor = code.base.tensor
    cells = code.base.indexes.cells_of_node(j)  # (array l, row t, src_row)

    reads: dict[Read, None] = {}
    steps: list = []

    # overflow rows: a tightly packed schedule may have placed a cell at the
    # row of an earlier-recovered source; its row terms are read like rows S
    overflow_rows = sorted({t for _l, t, _src in cells} - s_set)
    known_rows = s_set | set(overflow_rows)

    # phase 1 reads: rows S (plus any overflow rows) of every surviving
    # systematic column
    for v in range(p.r):
        for m in range(p.k):
            if m == j:
                continue
            for t in s_rows + overflow_rows:
                reads[(m, v, t)] = None

    # paired parity reads: for every scheduled cell row, the stored symbols of
    # all parity slots whose raw content belongs to the conjugate closure of
    # the arrays used at that row (both pair members are needed to unmix)
    arrays_by_row: dict[int, set[int]] = {}
    for l, t, _src in cells:
        arrays_by_row.setdefault(t, set()).add(l)
    closure_by_row: dict[int, tuple[int, ...]] = {}
    pair_rows: dict[tuple[int, int], set[int]] = {}
    for t, arrays in sorted(arrays_by_row.items()):
        deltas = set()
        for l in arrays:
            deltas.add(l)
            deltas.add((p.r - l) % p.r)
        closure_by_row[t] = tuple(sorted(deltas))
        for b in range(p.r):
            for d in sorted(deltas):
                a = (b + d) % p.r
                reads[(p.k + a, b, t)] = None
                pair_rows.setdefault((min(a, b), max(a, b)), set()).add(t)
    for (a, b), rows_set in sorted(pair_rows.items()):
        for t in sorted(rows_set):
            steps.append(PairSolve(node_a=a, node_b=b, row=t))

    # template simulation, identical across instances: which foreign symbols
    # each usable equation still needs, given that rows S are read
    def extras(l, t):
        return [(sr, sn) for sr, sn in
                ((sr, sn) for sr, sn, _f in tensor.rows[l][t][p.k:]) if sn != j]

    known_foreign: set[tuple[int, int]] = set()  # (node, row) beyond read rows

    def unknown_foreign(l, t):
        return [(sr, sn) for sr, sn in extras(l, t)
                if sr not in known_rows and (sn, sr) not in known_foreign]

    cell_arrays = {t: {l for l, tt, _ in cells if tt == t} for t in arrays_by_row}
    # spare equations must live at rows whose lost symbol phase 1 recovers,
    # or their row terms would not resolve yet
    spare_eqs = [(l, t) for t in sorted(arrays_by_row) if t in s_set
                 for l in closure_by_row[t] if l not in cell_arrays[t]]
    consumed: set[tuple[int, int]] = set()

    # phase 1 solves: prefer a spare equation that is already fully covered
    # (saves the diagonal read); fall back to reading the row parity
    row_solves = []
    for t in s_rows:
        free = next((l for l, tt in spare_eqs
                     if tt == t and (l, t) not in consumed and not unknown_foreign(l, t)),
                    None)
        if free is not None:
            consumed.add((free, t))
            row_solves.append((t, free))
        else:
            for v in range(p.r):
                reads[(p.k + v, v, t)] = None
            row_solves.append((t, 0))
    for v in range(p.r):
        for t, arr in row_solves:
            steps.append(RowSolve(instance=v, row=t, array=arr))

    # peel foreign symbols out of spare equations where possible; read the
    # rest once (globally deduplicated step-6 reads)
    foreign_steps: list[tuple[int, int, int, int]] = []  # (l, t, src, node)
    needed = {fs for l, t, _src in cells for fs in unknown_foreign(l, t)}
    while needed:
        progress = True
        while progress:
            progress = False
            for l, t in spare_eqs:
                if (l, t) in consumed:
                    continue
                unk = unknown_foreign(l, t)
                if len(unk) == 1:
                    sr, sn = unk[0]
                    consumed.add((l, t))
                    known_foreign.add((sn, sr))
                    foreign_steps.append((l, t, sr, sn))
                    needed.discard((sr, sn))
                    progress = True
        if not needed:
            break
        sr, sn = min((sr, sn) for sr, sn in needed)
        for v in range(p.r):
            reads[(sn, v, sr)] = None
        known_foreign.add((sn, sr))
        needed.discard((sr, sn))
    for v in range(p.r):
        for l, t, sr, sn in foreign_steps:
            steps.append(ForeignSolve(instance=v, array=l, row=t, src_row=sr, node=sn))

    # chain order: a cell at an overflow row needs that row's lost symbol
    # recovered by an earlier cell
    ordered_cells: list = []
    solved_rows = set(s_rows)
    pending = list(cells)
    while pending:
        ready = [c for c in pending if c[1] in solved_rows]
        if not ready:
            raise InvalidNode(f"schedule of node {j} has an unresolvable cell chain")
        cell = ready[0]
        pending.remove(cell)
        ordered_cells.append(cell)
        solved_rows.add(cell[2])
    for v in range(p.r):
        for l, t, src in ordered_cells:
            steps.append(CellSolve(instance=v, array=l, row=t, src_row=src))

    return RepairPlan(failed_node=j, reads=tuple(reads), solve_steps=tuple(steps))


def plan_parity_repair(code: PlusCode, lam_or_node: int) -> RepairPlan:
    p = code.params
    lam = lam_or_node - p.k if lam_or_node >= p.k else lam_or_node
    if not 0 <= lam < p.r:
        raise InvalidNode(f"parity index {lam_or_node} outside [0, {p.r}) / [{p.k}, {p.n})")

    reads: dict[Read, None] = {}
    for m in range(p.k):
        for t in range(p.alpha_b):
            reads[(m, lam, t)] = None
    for mu in range(p.r):
        if mu == lam:
            continue
        for t in range(p.alpha_b):
            reads[(p.k + mu, lam, t)] = None

    steps: list = [ReencodeInstance(instance=lam)]
    steps += [ExtractPartner(helper=mu) for mu in range(p.r) if mu != lam]
    steps += [ComposeBlock(slot=s) for s in range(p.r)]
    return RepairPlan(failed_node=p.k + lam, reads=tuple(reads), solve_steps=tuple(steps))


def plan_repair(code: PlusCode, node: int) -> RepairPlan:
    p = code.params
    if not 0 <= node < p.n:
        raise InvalidNode(f"node id {node} outside [0, {p.n})")
    if node < p.k:
        return plan_systematic_repair(code, node)
    return plan_parity_repair(code, node)


# -- execution -----------------------------------------------------------------


def _symbol(shards, node: int, instance: int, row: int, alpha_b: int) -> int:
    try:
        col = shards[node]
    except KeyError:
        raise MissingRead(f"plan reads node {node} which is not among the survivors") from None
    return int(col[instance * alpha_b + row])


def _execute_systematic(code: PlusCode, plan: RepairPlan, shards) -> np.ndarray:
    p = code.params
    j = plan.failed_node
    tensor = code.base.tensor
    fld = code.field
    read_set = set(plan.reads)

    recovered: dict[tuple[int, int], int] = {}  # (instance, row) of node j
    foreign: dict[tuple[int, int, int], int] = {}  # (node, instance, row), solved
    raw: dict[tuple[int, int, int], int] = {}   # (parity l, instance, row)

    def sym(node, v, t):
        if (node, v, t) in foreign:
            return foreign[(node, v, t)]
        if node == j:
            return recovered[(v, t)]
        if (node, v, t) not in read_set:
            raise MissingRead(f"executor needs unplanned symbol {(node, v, t)}")
        return _symbol(shards, node, v, t, p.alpha_b)

    def solve_equation(l, v, t, target_node, target_row):
        """Solve one parity equation of array l, instance v, row t for the
        single unknown (target_node, target_row); all other terms resolve."""
        acc = sym(p.k + v, v, t) if l == 0 else raw[(l, v, t)]
        f_target = None
        for sr, sn, f in tensor.rows[l][t]:
            if sn == target_node and sr == target_row:
                f_target = f
            else:
                acc ^= fld.mul(f, sym(sn, v, sr))
        return fld.mul(fld.inv(f_target), acc)

    for step in plan.solve_steps:
        if isinstance(step, RowSolve):
            v, t = step.instance, step.row
            recovered[(v, t)] = solve_equation(step.array, v, t, j, t)
        elif isinstance(step, PairSolve):
            a, b, t = step.node_a, step.node_b, step.row
            stored_ab = sym(p.k + a, b, t)
            stored_ba = sym(p.k + b, a, t)
            u, v_val = unpair(code, np.array([stored_ab]), np.array([stored_ba]), a, b)
            raw[((a - b) % p.r, b, t)] = int(u[0])
            raw[((b - a) % p.r, a, t)] = int(v_val[0])
        elif isinstance(step, ForeignSolve):
            v = step.instance
            foreign[(step.node, v, step.src_row)] = solve_equation(
                step.array, v, step.row, step.node, step.src_row)
        elif isinstance(step, CellSolve):
            v = step.instance
            recovered[(v, step.src_row)] = solve_equation(
                step.array, v, step.row, j, step.src_row)
        else:
            raise MissingRead(f"unexpected step {step!r} in a systematic plan")

    out = np.zeros(p.alpha, dtype=np.int32)
    for (v, t), val in recovered.items():
        out[v * p.alpha_b + t] = val
    if len(recovered) != p.alpha:
        raise MissingRead(f"plan recovered {len(recovered)} of {p.alpha} symbols")
    return out


def _execute_parity(code: PlusCode, plan: RepairPlan, shards) -> np.ndarray:
    from .base import encode_base

    p = code.params
    lam = plan.failed_node - p.k
    fld = code.field

    data = np.zeros((p.alpha_b, p.k), dtype=np.int32)
    for m in range(p.k):
        for t in range(p.alpha_b):
            data[t, m] = _symbol(shards, m, lam, t, p.alpha_b)
    parities = encode_base(code.base, data)  # alpha_b x r: p_m^(lam) columns

    own_raw: dict[int, np.ndarray] = {lam: parities[:, 0].copy()}  # q(lam, mu)
    out = np.zeros(p.alpha, dtype=np.int32)
    for step in plan.solve_steps:
        if isinstance(step, ReencodeInstance):
            continue
        if isinstance(step, ExtractPartner):
            mu = step.helper
            stored = np.array([
                _symbol(shards, p.k + mu, lam, t, p.alpha_b) for t in range(p.alpha_b)
            ], dtype=np.int32)
            # stored(mu, lam) = theta_(mu,lam) * q(mu, lam) + q(lam, mu)
            theta_mu = p.theta if mu < lam else 1
            q_mu_lam = parities[:, (mu - lam) % p.r]
            own_raw[mu] = stored ^ fld.scale_vec(theta_mu, q_mu_lam)
        elif isinstance(step, ComposeBlock):
            s = step.slot
            rows = slice(s * p.alpha_b, (s + 1) * p.alpha_b)
            if s == lam:
                out[rows] = parities[:, 0]
            else:
                theta_own = p.theta if lam < s else 1
                q_s_lam = parities[:, (s - lam) % p.r]
                out[rows] = fld.scale_vec(theta_own, own_raw[s]) ^ q_s_lam
        else:
            raise MissingRead(f"unexpected step {step!r} in a parity plan")
    return out


def execute_repair(code: PlusCode, plan: RepairPlan, surviving_shards) -> np.ndarray:
    """Rebuild the failed node's column exactly from the planned reads.

    surviving_shards maps node id -> full column (alpha symbols); only the
    planned symbols are consumed.
    """
    for node, _, _ in plan.reads:
        if node not in surviving_shards:
            raise MissingRead(f"plan reads node {node} which is not among the survivors")
    if plan.failed_node < code.params.k:
        return _execute_systematic(code, plan, surviving_shards)
    return _execute_parity(code, plan, surviving_shards)


# -- accounting ----------------------------------------------------------------


@dataclass(frozen=True)
class NodeBandwidth:
    node: int
    role: str  # "systematic" | "parity"
    symbols_accessed: int
    symbols_transferred: int
    fraction_of_M: Fraction


@dataclass(frozen=True)
class BandwidthReport:
    params: object
    per_node: tuple[NodeBandwidth, ...]
    avg_fraction: Fraction
    systematic_avg: Fraction
    parity_avg: Fraction

    def node(self, node_id: int) -> NodeBandwidth:
        return self.per_node[node_id]


def measure_bandwidth(code: PlusCode) -> BandwidthReport:
    """Plan repairs for every node and account reads as fractions of the
    stripe size M = k*alpha."""
    p = code.params
    M = p.stripe_symbols
    entries = []
    for node in range(p.n):
        plan = plan_repair(code, node)
        nreads = plan.symbols_accessed
        entries.append(NodeBandwidth(
            node=node,
            role="systematic" if node < p.k else "parity",
            symbols_accessed=nreads,
            symbols_transferred=plan.symbols_transferred,
            fraction_of_M=Fraction(nreads, M)))
    sys_e = entries[:p.k]
    par_e = entries[p.k:]
    avg = sum(e.fraction_of_M for e in entries) / p.n
    return BandwidthReport(
        params=p,
        per_node=tuple(entries),
        avg_fraction=avg,
        systematic_avg=sum(e.fraction_of_M for e in sys_e) / p.k,
        parity_avg=sum(e.fraction_of_M for e in par_e) / p.r)
