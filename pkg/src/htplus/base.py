"""Base code construction: row partitions, scheduled index arrays, coefficients.

A base (n, k) code stores one stripe as an alpha_b x k array of field symbols
(column j lives on systematic node j).  Parity node 0 combines, per row, the
k symbols of that row.  Parity nodes 1..r-1 combine the row plus up to
ceil(k/r) extra symbols scheduled from other rows; that schedule is what makes
single-node repair cheap, because reading a small set of rows of every column
then exposes, through the extra cells, the symbols of the remaining rows.

Scheduling works per node j:

* the rows [0, alpha_b) are partitioned into r near-equal subsets, one family
  of subsets per node group (nodes j with equal floor(j/r) share a family);
* one subset of maximal size ceil(alpha_b/r) is designated as node j's
  repair row set S_j;
* every pair (i, j) with i outside S_j is placed in exactly one extra cell of
  one of the arrays 1..r-1, in a row belonging to S_j.

When alpha_b == r^ceil(k/r) the families are the base-r digit classes of the
row index and the placement is the classic digit-rotation layout, which makes
repair of every node read exactly ceil(alpha_b/r) rows per helper.  For
smaller alpha_b a deterministic greedy packs pairs row-dense (few distinct
rows per node, reducing parity reads) while preferring cells whose
co-scheduled neighbours keep the extra systematic reads low.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield

import numpy as np

from .errors import (
    DimensionMismatch,
    FieldTooSmall,
    InvalidParams,
    MdsSearchExhausted,
    SchedulingInfeasible,
)
from .gf import Field, FieldSpec, field_for

_M64 = (1 << 64) - 1


def splitmix64(state: int):
    """One step of the splitmix64 generator: (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return state, (z ^ (z >> 31)) & _M64


class _Stream:
    """Deterministic 64-bit stream used for coefficient draws."""

    def __init__(self, seed: int):
        self._state = seed & _M64

    def next_nonzero(self, q: int) -> int:
        self._state, out = splitmix64(self._state)
        return 1 + out % (q - 1)


def derive_seed(seed: int, attempt: int) -> int:
    _, out = splitmix64((seed ^ (attempt * 0xA5A5A5A5A5A5A5A5)) & _M64)
    return out


@dataclass(frozen=True)
class CodeParams:
    """Parameters of one code instance; the single source of truth.

    alpha_b is the base sub-packetization; the full code stores
    alpha = r * alpha_b symbols per node and a stripe holds M = k * alpha
    symbols.
    """

    n: int
    k: int
    r: int
    alpha_b: int
    alpha: int
    field: FieldSpec
    theta: int
    seed: int

    def __post_init__(self):
        if self.k < 2 or self.r < 2:
            raise InvalidParams(f"need k >= 2 and r >= 2, got k={self.k} r={self.r}")
        if self.n != self.k + self.r:
            raise InvalidParams(f"n={self.n} != k+r={self.k + self.r}")
        max_ab = self.r ** math.ceil(self.k / self.r)
        if not 2 <= self.alpha_b <= max_ab:
            raise InvalidParams(
                f"alpha_b={self.alpha_b} outside [2, r^ceil(k/r)] = [2, {max_ab}]")
        if self.alpha != self.r * self.alpha_b:
            raise InvalidParams(f"alpha={self.alpha} != r*alpha_b={self.r * self.alpha_b}")
        if not 2 <= self.theta < self.field.order:
            raise InvalidParams(f"theta={self.theta} must lie in [2, 2^w); 0 and 1 are forbidden")

    @staticmethod
    def create(n: int, k: int, alpha_b: int, field_w: int = 8,
               poly: int | None = None, theta: int = 2, seed: int = 0) -> "CodeParams":
        if not 2 <= k < n:
            raise InvalidParams(f"need 2 <= k < n, got n={n} k={k}")
        spec = FieldSpec.default(field_w, poly)
        return CodeParams(n=n, k=k, r=n - k, alpha_b=alpha_b,
                          alpha=(n - k) * alpha_b, field=spec, theta=theta, seed=seed)

    @property
    def groups(self) -> int:
        return math.ceil(self.k / self.r)

    @property
    def stripe_symbols(self) -> int:
        return self.k * self.alpha


@dataclass(frozen=True)
class NodePartition:
    """The r disjoint row subsets of one systematic node, plus the index of
    the designated subset used as its repair row set."""

    subsets: tuple[tuple[int, ...], ...]
    designated: int

    @property
    def rows(self) -> tuple[int, ...]:
        return self.subsets[self.designated]


def _classes_by_key(alpha_b: int, r: int, key) -> list[list[int]] | None:
    classes = [[] for _ in range(r)]
    for i in range(alpha_b):
        classes[key(i)].append(i)
    sizes = [len(c) for c in classes]
    if max(sizes) - min(sizes) > 1:
        return None
    return classes


def partition_families(alpha_b: int, r: int) -> list[tuple[tuple[int, ...], ...]]:
    """Deterministic list of near-equal r-way partitions of [alpha_b].

    Stride partitions (class = floor(i / sigma) mod r for sigma a power of r,
    largest stride first) come first so that, at the maximal sub-packetization
    r^G, family g is exactly the g-th most significant base-r digit class.
    Shifted contiguous block patterns follow, then block patterns on
    index multiples coprime to alpha_b, for extra variety at small alpha_b
    (diverse repair row sets keep co-scheduled pairs reusable).
    """
    fams: list[tuple[tuple[int, ...], ...]] = []
    seen = set()

    def push(classes):
        if classes is None:
            return
        fam = tuple(tuple(c) for c in classes)
        key = frozenset(frozenset(c) for c in classes)
        if key not in seen:
            seen.add(key)
            fams.append(fam)

    sigma = 1
    strides = []
    while sigma <= alpha_b:
        strides.append(sigma)
        sigma *= r
    for sigma in reversed(strides):
        push(_classes_by_key(alpha_b, r, lambda i: (i // sigma) % r))

    floor_sz, big = divmod(alpha_b, r)
    sizes = [floor_sz + 1] * big + [floor_sz] * (r - big)
    bounds = np.cumsum([0] + sizes)

    def block_of(x: int) -> int:
        return int(np.searchsorted(bounds, x, side="right")) - 1

    cap = max(4 * r, 24)
    for g in range(1, alpha_b):
        if math.gcd(g, alpha_b) != 1:
            continue
        for s in range(alpha_b):
            push(_classes_by_key(alpha_b, r, lambda i: block_of((i * g + s) % alpha_b)))
            if len(fams) >= cap:
                return fams
    return fams


def build_partition(k: int, r: int, alpha_b: int) -> tuple[NodePartition, ...]:
    """Partition rows for every systematic node and pick designated subsets.

    At the maximal sub-packetization the per-group digit classes with
    designated index j mod r are forced (they are what aligns the scheduled
    pairs with zero extra reads).  Below that, nodes cycle through the family
    list and each picks the maximal-size subset whose rows currently carry
    the least scheduled-pair demand, which keeps the row occupancy feasible
    and the repair row sets diverse.
    """
    if k < 2 or r < 2 or alpha_b < 2:
        raise InvalidParams(f"invalid partition parameters k={k} r={r} alpha_b={alpha_b}")
    groups = math.ceil(k / r)
    if alpha_b > r ** groups:
        raise InvalidParams(f"alpha_b={alpha_b} exceeds r^ceil(k/r)")
    fams = partition_families(alpha_b, r)
    big_sz = math.ceil(alpha_b / r)
    out = []
    if alpha_b % r == 0:
        # every class has maximal size: let the r nodes of a group cycle
        # through all classes of one family, covering each row exactly once
        # per group (tightly packed schedules need this exact balance); at
        # alpha_b = r^G this is the digit-class layout
        for j in range(k):
            fam = fams[(j // r) % len(fams)]
            out.append(NodePartition(subsets=fam, designated=j % r))
        return tuple(out)
    # membership-balancing assignment: each node picks any (family, class)
    # whose designated rows keep the per-row scheduled-pair demand within the
    # cell capacity and as even as possible; tightly packed schedules become
    # infeasible otherwise.  A throwaway flow placement validates each
    # assignment and failing options are banned before retrying.
    demand = alpha_b - big_sz            # scheduled pairs per node
    cap = (r - 1) * groups * big_sz      # row cell capacity, scaled by |S|
    options = [(fi, rho) for fi, fam in enumerate(fams)
               for rho, c in enumerate(fam) if len(c) == big_sz]

    def assign(banned) -> list[tuple[int, int]] | None:
        members = [0] * alpha_b

        def objective():
            over = sum(max(0, m * demand - cap) ** 2 for m in members)
            return over * (1 << 20) + sum((m * demand) ** 2 for m in members)

        def apply(opt, delta):
            fi, rho = opt
            for t in fams[fi][rho]:
                members[t] += delta

        choices: list[tuple[int, int]] = []
        used: dict[tuple[int, int], int] = {}
        for j in range(k):
            best, best_key = None, None
            for opt in options:
                if (j, opt) in banned:
                    continue
                apply(opt, +1)
                key = (objective(), used.get(opt, 0), opt)
                apply(opt, -1)
                if best is None or key < best_key:
                    best, best_key = opt, key
            if best is None:
                return None
            apply(best, +1)
            used[best] = used.get(best, 0) + 1
            choices.append(best)

        improved = True
        while improved:
            improved = False
            for j in range(k):
                cur = choices[j]
                best, best_key = cur, (objective(), used.get(cur, 0) - 1, cur)
                for opt in options:
                    if opt == cur or (j, opt) in banned:
                        continue
                    apply(cur, -1)
                    apply(opt, +1)
                    key = (objective(), used.get(opt, 0), opt)
                    apply(opt, -1)
                    apply(cur, +1)
                    if key < best_key:
                        best, best_key = opt, key
                if best != cur:
                    apply(cur, -1)
                    apply(best, +1)
                    used[cur] -= 1
                    used[best] = used.get(best, 0) + 1
                    choices[j] = best
                    improved = True
        return choices

    def first_infeasible(choices) -> int | None:
        # unit-capacity Kuhn matching over (array, row) slot groups
        rows = [set(fams[fi][rho]) for fi, rho in choices]
        held: dict[tuple[int, int], list[int]] = {}

        def slots(node):
            return [(l, t) for t in sorted(rows[node]) for l in range(1, r)]

        def augment(node, visited) -> bool:
            for s in slots(node):
                if s in visited or node in held.get(s, ()):
                    continue
                visited.add(s)
                if len(held.setdefault(s, [])) < groups:
                    held[s].append(node)
                    return True
                for occupant in held[s]:
                    if augment(occupant, visited):
                        held[s].remove(occupant)
                        held[s].append(node)
                        return True
            return False

        for j in range(k):
            for _ in range(demand):
                if not augment(j, set()):
                    return j
        return None

    banned: set = set()
    for _ in range(4 * k):
        choices = assign(banned)
        if choices is None:
            break
        bad = first_infeasible(choices)
        if bad is None:
            for fi, rho in choices:
                out.append(NodePartition(subsets=fams[fi], designated=rho))
            return tuple(out)
        banned.add((bad, choices[bad]))

    # fallback for the tightest packings: evenly offset contiguous windows
    # cover every row with multiplicity within one of each other
    return _windowed_partition(k, r, alpha_b)


def _windowed_partition(k: int, r: int, alpha_b: int) -> tuple[NodePartition, ...]:
    big = math.ceil(alpha_b / r)
    floor_sz = alpha_b // r
    n_big = alpha_b % r if alpha_b % r else r
    sizes = [big] * n_big + [floor_sz] * (r - n_big)  # designated window first
    out = []
    for j in range(k):
        o = (j * alpha_b) // k
        order = [(o + i) % alpha_b for i in range(alpha_b)]
        classes, pos = [], 0
        for size in sizes:
            classes.append(tuple(sorted(order[pos:pos + size])))
            pos += size
        out.append(NodePartition(subsets=tuple(classes), designated=0))
    return tuple(out)


def _conjugate_order(r: int) -> list[int]:
    # [1, r-1, 2, r-2, ...]: cheap deterministic slot order for relocation.
    order = []
    for l in range(1, r // 2 + 1):
        order.append(l)
        if r - l != l:
            order.append(r - l)
    return order


def _conjugate_chunks(r: int, u: int) -> list[list[int]]:
    """Decompose u scheduled pairs into parity-array chunks closed under
    l -> r-l.

    The repair planner must read both members of every stored pair it
    touches, so the paired reads of one row cost r symbols per array in the
    conjugate closure of the arrays used there.  Chunks that are closed waste
    nothing and may be placed on different rows at no extra cost; for odd r
    and odd u one open singleton is unavoidable.
    """
    chunks: list[list[int]] = []
    rem = u
    if rem % 2 == 1 and r % 2 == 0:
        chunks.append([r // 2])
        rem -= 1
    l = 1
    while rem >= 2 and l <= (r - 1) // 2:
        chunks.append([l, r - l])
        rem -= 2
        l += 1
    if rem == 1:
        chunks.append([l])
    return chunks


@dataclass(frozen=True)
class IndexArrays:
    """The r scheduled index arrays of a base code.

    arrays[0] is the implicit identity array (row t lists pairs (t, 0..k-1)).
    For l >= 1, extras[l][t] is a tuple of length ceil(k/r) whose cells hold
    either None or a scheduled pair (src_row, src_node).
    """

    k: int
    r: int
    alpha_b: int
    extra_cols: int
    extras: tuple  # extras[l][t][col] -> None | (src_row, src_node)
    partition: tuple[NodePartition, ...]

    def array(self, l: int) -> list[list[tuple[int, int]]]:
        """Materialized pair grid of array l (identity columns + extras)."""
        rows = []
        for t in range(self.alpha_b):
            row = [(t, j) for j in range(self.k)]
            if l > 0:
                row += [c for c in self.extras[l][t] if c is not None]
            rows.append(row)
        return rows

    def cells_of_node(self, j: int) -> tuple[tuple[int, int, int], ...]:
        """All (array, row, src_row) placements of node j's scheduled pairs."""
        out = []
        for l in range(1, self.r):
            for t in range(self.alpha_b):
                for cell in self.extras[l][t]:
                    if cell is not None and cell[1] == j:
                        out.append((l, t, cell[0]))
        return tuple(sorted(out))


def _digit(i: int, g: int, r: int, width: int) -> int:
    return (i // r ** (width - 1 - g)) % r


def _with_digit(i: int, g: int, r: int, width: int, value: int) -> int:
    return i + (value - _digit(i, g, r, width)) * r ** (width - 1 - g)


def build_index_arrays(params: CodeParams, partition: tuple[NodePartition, ...]) -> IndexArrays:
    """Place every scheduled pair (i, j), i outside S_j, at a row of S_j."""
    k, r, alpha_b = params.k, params.r, params.alpha_b
    if len(partition) != k:
        raise InvalidParams("partition does not cover every systematic node")
    cols = params.groups
    grid = [[[None] * cols for _ in range(alpha_b)] for _ in range(r)]
    maximal = alpha_b == r ** cols

    if maximal:
        for j in range(k):
            g, rho = j // r, partition[j].designated
            for src in range(alpha_b):
                delta = _digit(src, g, r, cols)
                if delta == rho:
                    continue
                l = (delta - rho) % r
                t = _with_digit(src, g, r, cols, rho)
                if grid[l][t][g] is not None:
                    raise SchedulingInfeasible(f"digit layout collision at array {l} row {t}")
                grid[l][t][g] = (src, j)
        return IndexArrays(k=k, r=r, alpha_b=alpha_b, extra_cols=cols,
                           extras=_freeze(grid), partition=partition)

    arr_order = _conjugate_order(r)
    row_load = [0] * alpha_b
    rows_of = [set(p.rows) for p in partition]

    def compat(src: int, cells) -> int:
        # favour cells whose co-scheduled pairs come from nodes that will be
        # able to reuse src during their own repairs
        return sum(1 for c in cells if c is not None and src in rows_of[c[1]])

    def slots_of(node: int):
        return [(l, t) for t in sorted(rows_of[node]) for l in arr_order]

    def has_pair(node: int, l: int, t: int) -> bool:
        return any(c is not None and c[1] == node for c in grid[l][t])

    def place(node: int, src: int, l: int, t: int):
        free = [h for h, c in enumerate(grid[l][t]) if c is None]
        col = max(free, key=lambda h: (
            sum(1 for t2 in range(alpha_b)
                if grid[l][t2][h] is not None and grid[l][t2][h][0] == src),
            -h))
        grid[l][t][col] = (src, node)
        row_load[t] += 1

    def relocate(node: int, visited: set) -> tuple[int, int] | None:
        # Kuhn-style augmenting search: a slot node may occupy, freeing it by
        # moving an occupant's pair along a chain if necessary.
        for l, t in slots_of(node):
            if (l, t) in visited or has_pair(node, l, t):
                continue
            visited.add((l, t))
            if any(c is None for c in grid[l][t]):
                return l, t
            for h, cell in enumerate(grid[l][t]):
                src_m, m = cell
                dest = relocate(m, visited)
                if dest is not None:
                    grid[l][t][h] = None
                    row_load[t] -= 1
                    place(m, src_m, *dest)
                    return l, t
        return None

    def occupancy(l: int, t: int) -> int:
        return sum(1 for c in grid[l][t] if c is not None)

    def cell_open(node: int, l: int, t: int) -> bool:
        return not has_pair(node, l, t) and any(c is None for c in grid[l][t])

    def hopeless(node: int, l: int, t: int) -> int:
        # co-scheduled neighbours with the same designated rows can never
        # donate a source inside this node's repair row set
        return sum(1 for c in grid[l][t]
                   if c is not None and rows_of[c[1]] == rows_of[node])

    for j in range(k):
        s_rows = sorted(partition[j].rows)
        remaining = [i for i in range(alpha_b) if i not in set(s_rows)]
        # conjugate-closed chunks may land on different rows at no extra
        # paired-read cost, so spread them where cells are emptiest
        for chunk in _conjugate_chunks(r, len(remaining)):
            rows_ok = [t for t in s_rows if all(cell_open(j, l, t) for l in chunk)]
            if not rows_ok:
                continue  # fallback loop below picks up the remainder
            t = min(rows_ok, key=lambda t: (
                sum(hopeless(j, l, t) for l in chunk),
                sum(occupancy(l, t) for l in chunk), row_load[t], t))
            for l in chunk:
                src = max(remaining, key=lambda i: (compat(i, grid[l][t]), -i))
                place(j, src, l, t)
                remaining.remove(src)
        exhausted: set[int] = set()
        while remaining:
            open_rows = [t for t in s_rows if t not in exhausted]
            if not open_rows:
                dest = relocate(j, set())
                if dest is None:
                    break  # overflow handling below
                l, t = dest
                src = max(remaining, key=lambda i: (compat(i, grid[l][t]), -i))
                place(j, src, l, t)
                remaining.remove(src)
                continue
            t = min(open_rows, key=lambda t: (row_load[t], t))
            placed_here = 0
            for l in arr_order:
                if not remaining:
                    break
                if not cell_open(j, l, t):
                    continue  # one pair of node j per (array, row)
                src = max(remaining, key=lambda i: (compat(i, grid[l][t]), -i))
                place(j, src, l, t)
                remaining.remove(src)
                placed_here += 1
            if placed_here == 0:
                exhausted.add(t)
        # last resort for over-constrained corners (few rows, one extra
        # column): chain overflow -- a pair may sit at the row of an
        # already-placed source, whose symbol the repair recovers first
        while remaining:
            allowed = set(s_rows)
            for l in range(1, r):
                for t in range(alpha_b):
                    for c in grid[l][t]:
                        if c is not None and c[1] == j:
                            allowed.add(c[0])
            progress = False
            for src in sorted(remaining):
                spots = [(l, t) for t in sorted(allowed) if t != src
                         for l in arr_order if cell_open(j, l, t)]
                if not spots:
                    continue
                l, t = min(spots, key=lambda s: (occupancy(*s), s[1], s[0]))
                place(j, src, l, t)
                remaining.remove(src)
                progress = True
                break
            if not progress:
                raise SchedulingInfeasible(
                    f"node {j}: {len(remaining)} pairs left with no open cells")

    _rebind_sources(grid, partition, r, alpha_b)
    return IndexArrays(k=k, r=r, alpha_b=alpha_b, extra_cols=cols,
                       extras=_freeze(grid), partition=partition)


def _rebind_sources(grid, partition, r: int, alpha_b: int) -> None:
    """Permute each node's scheduled sources among its own cells so that
    co-scheduled neighbours see sources inside their repair row sets as often
    as possible (their planners then reuse phase-1 reads instead of paying
    extra ones).  Cells never move; only the source binding does.  Donations
    are weighted toward the neighbours that currently suffer the most
    unmatched sources, driving the worst-case extra-read count down."""
    k = len(partition)
    rows_of = [set(p.rows) for p in partition]

    def cells_of(j):
        return [(l, t, h) for l in range(1, r) for t in range(alpha_b)
                for h, c in enumerate(grid[l][t]) if c is not None and c[1] == j]

    def miss_counts(skip: int) -> list[int]:
        out = [0] * k
        for c in range(k):
            for l, t, _h in cells_of(c):
                for cell in grid[l][t]:
                    if cell is None or cell[1] in (c, skip):
                        continue
                    if cell[0] not in rows_of[c]:
                        out[c] += 1
        return out

    from itertools import permutations

    for sweep in range(8):
        changed = False
        node_order = range(k) if sweep % 2 == 0 else range(k - 1, -1, -1)
        for j in node_order:
            cells = cells_of(j)
            if len(cells) < 2:
                continue
            if any(t not in rows_of[j] for _l, t, _h in cells):
                continue  # chain-overflow placements must keep their binding
            base_miss = miss_counts(skip=j)
            recipients = [[c[1] for c in grid[l][t] if c is not None and c[1] != j]
                          for l, t, _h in cells]
            pool = sorted(grid[l][t][h][0] for l, t, h in cells)

            def cost(assign):
                extra: dict[int, int] = {}
                for recs, src in zip(recipients, assign):
                    for c in recs:
                        if src not in rows_of[c]:
                            extra[c] = extra.get(c, 0) + 1
                return sum((base_miss[c] + e) ** 2 - base_miss[c] ** 2
                           for c, e in extra.items())

            if len(cells) <= 6:
                best = min(permutations(pool), key=lambda a: (cost(a), a))
            else:
                order = sorted(range(len(cells)), key=lambda i: (
                    -len(recipients[i]), cells[i]))
                avail = pool.copy()
                chosen: list[int | None] = [None] * len(cells)
                for i in order:
                    gains = {s: sum(2 * base_miss[c] + 1 for c in recipients[i]
                                    if s in rows_of[c]) for s in avail}
                    pick = max(avail, key=lambda s: (gains[s], -s))
                    chosen[i] = pick
                    avail.remove(pick)
                best = tuple(chosen)
            for (l, t, h), src in zip(cells, best):
                if grid[l][t][h][0] != src:
                    grid[l][t][h] = (src, j)
                    changed = True
        if not changed:
            break


def _freeze(grid):
    return tuple(tuple(tuple(row) for row in arr) for arr in grid)


@dataclass(frozen=True)
class CoefficientTensor:
    """Nonzero combination coefficients for every parity symbol of the base
    code.  rows[l][t] lists (src_row, src_node, coeff) triples: the k identity
    terms of row t first, then the scheduled extras of array l in cell order.
    """

    rows: tuple  # rows[l][t] -> tuple[(src_row, src_node, coeff)]

    def coeff_of(self, l: int, t: int, src_row: int, src_node: int) -> int:
        for sr, sn, f in self.rows[l][t]:
            if sr == src_row and sn == src_node:
                return f
        raise KeyError((l, t, src_row, src_node))


def draw_tensor(params: CodeParams, indexes: IndexArrays, seed: int) -> CoefficientTensor:
    stream = _Stream(seed)
    q = params.field.order
    rows = []
    for l in range(params.r):
        per_row = []
        for t in range(params.alpha_b):
            triples = [(t, j, stream.next_nonzero(q)) for j in range(params.k)]
            if l > 0:
                triples += [(c[0], c[1], stream.next_nonzero(q))
                            for c in indexes.extras[l][t] if c is not None]
            per_row.append(tuple(triples))
        rows.append(tuple(per_row))
    return CoefficientTensor(rows=tuple(rows))


@dataclass(frozen=True)
class BaseCode:
    """A verified base code: parameters, schedule and coefficients."""

    params: CodeParams
    indexes: IndexArrays
    tensor: CoefficientTensor
    attempt: int = 0
    effective_seed: int = 0
    mds_mode: str = "verified"
    _gen: np.ndarray | None = dfield(default=None, compare=False, repr=False)

    @property
    def field(self) -> Field:
        return field_for(self.params.field)

    @property
    def parity_generator(self) -> np.ndarray:
        """(r*alpha_b) x (k*alpha_b) matrix mapping node-major flattened data
        to node-major flattened base parities."""
        return self._gen

    def with_tensor(self, tensor: CoefficientTensor) -> "BaseCode":
        return BaseCode(params=self.params, indexes=self.indexes, tensor=tensor,
                        attempt=self.attempt, effective_seed=self.effective_seed,
                        mds_mode="unverified", _gen=base_generator(self.params, tensor))


def base_generator(params: CodeParams, tensor: CoefficientTensor) -> np.ndarray:
    ab, k, r = params.alpha_b, params.k, params.r
    gen = np.zeros((r * ab, k * ab), dtype=np.int32)
    for l in range(r):
        for t in range(ab):
            for sr, sn, f in tensor.rows[l][t]:
                gen[l * ab + t, sn * ab + sr] ^= f
    return gen


def encode_base(code: BaseCode, data: np.ndarray) -> np.ndarray:
    """Encode one alpha_b x k data block to its alpha_b x r base parities."""
    data = np.asarray(data, dtype=np.int32)
    p = code.params
    if data.shape != (p.alpha_b, p.k):
        raise DimensionMismatch(f"data shape {data.shape} != {(p.alpha_b, p.k)}")
    flat = data.T.reshape(-1)  # node-major
    out = code.field.matmul(code.parity_generator, flat)
    return out.reshape(p.r, p.alpha_b).T


def assign_coefficients(params: CodeParams, indexes: IndexArrays,
                        retry_cap: int = 64) -> BaseCode:
    """Search seeded coefficient draws until the construction verifies MDS.

    A candidate is accepted only when both the base code and the full
    composed code (instances, permutation and pairing applied) pass the
    k-subset rank check, so downstream lifting can never fail.
    """
    from .plus import build_plus_code  # deferred: plus builds on this module
    from .verifier import verify_mds

    last = None
    for attempt in range(retry_cap):
        eff = derive_seed(params.seed, attempt)
        tensor = draw_tensor(params, indexes, eff)
        candidate = BaseCode(params=params, indexes=indexes, tensor=tensor,
                             attempt=attempt, effective_seed=eff,
                             _gen=base_generator(params, tensor))
        res = verify_mds(candidate)
        if not res.ok:
            last = res
            continue
        plus = build_plus_code(candidate)
        pres = verify_mds(plus)
        if pres.ok:
            mode = pres.mode
            return BaseCode(params=params, indexes=indexes, tensor=tensor,
                            attempt=attempt, effective_seed=eff, mds_mode=mode,
                            _gen=candidate.parity_generator)
        last = pres
    bound = math.comb(params.n, params.k) * params.r * params.alpha_b
    if params.field.order < bound:
        raise FieldTooSmall(
            f"no MDS tensor found in {retry_cap} attempts; field order "
            f"{params.field.order} is below the sufficiency bound {bound}; "
            f"try a larger field width (last witness: {last and last.failing_subset})")
    raise MdsSearchExhausted(
        f"no MDS tensor found in {retry_cap} attempts despite field order "
        f"{params.field.order} >= {bound} (last witness: {last and last.failing_subset})")
