"""Feedback vertex set and vertex-disjoint cycle packing on clique-grid
instances.

Both solvers run dynamic programs over an edge-annotated nice tree
decomposition obtained by expanding a cell-granular decomposition to
vertex granularity. Feedback vertex set goes through its complement: the
maximum induced forest (states: chosen bag vertices plus their
connectivity partition). Cycle packing tracks how a family of disjoint
cycles meets the bag: a multiset of open path pieces split at bag
vertices, touch-points of already-completed cycles, and a count of
completed cycles.

Large cells settle both problems outright before any decomposition is
built: a clique on k+3 vertices needs k+1 deletions to become acyclic,
and a clique on 3k vertices contains k disjoint triangles.
"""
from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Sequence, Union

from .cliquegrid import CliqueGridInstance, as_instance
from .cycle_solvers import SolveResult
from .decomp import (
    FORGET,
    INTRODUCE,
    JOIN,
    LEAF,
    AnnotatedNiceTD,
    CellNCTD,
    annotated_from_cell_nctd,
    build_cell_nctd,
    verify_cell_nctd,
)
from .geometry import GeometricModel, ModelLike, PointCloud
from .graphs import SimpleGraph
from .kernel import large_clique_cell
from .witness import Witness

InstanceLike = Union[CliqueGridInstance, PointCloud]

# A forest meets each clique cell in at most this many vertices (three
# vertices of one cell always form a triangle).
FOREST_PER_CELL = 2

# Upper bound on the vertices one cell contributes to a packing state's
# support: a cell interacts with at most 24 nearby cells (so 24 * 23 = 552
# ordered pairs of them); at most two cycles of a normalized family cross
# any such pair or triple, each leaving at most two endpoint vertices per
# count, giving 4 * (24 + 552) = 2304.
PACKING_CELL_TOUCH_CAP = 2304

CAP_MODES = ("adaptive", "theory", "off")


def _is_forest(g: SimpleGraph) -> bool:
    parent = list(range(g.n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in g.edges():
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def _post_order(ann: AnnotatedNiceTD) -> list[int]:
    order: list[int] = []
    stack = [ann.root]
    while stack:
        x = stack.pop()
        order.append(x)
        stack.extend(ann.children[x])
    order.reverse()
    return order


# ---------------------------------------------------------------------------
# maximum induced forest


def _canon_blocks(blocks: Iterable[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Partition blocks in canonical form: each sorted, ordered by minimum."""
    return tuple(sorted(tuple(sorted(b)) for b in blocks))


def _merge_partitions(
    u_set: frozenset[int],
    left_blocks: tuple[tuple[int, ...], ...],
    right_blocks: tuple[tuple[int, ...], ...],
) -> tuple[tuple[int, ...], ...] | None:
    """Union-find merge of two connectivity partitions over the same set.

    Returns the merged partition, or None when some pair is connected on
    both sides: the two connections are internally disjoint paths, so the
    combined subgraph has a cycle and the state must be discarded.
    """
    parent = {v: v for v in u_set}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for blocks in (left_blocks, right_blocks):
        for b in blocks:
            for x in b[1:]:
                ra, rb = find(b[0]), find(x)
                if ra == rb:
                    return None
                parent[ra] = rb
    groups: dict[int, list[int]] = defaultdict(list)
    for v in u_set:
        groups[find(v)].append(v)
    return _canon_blocks(groups.values())


def mif_dp(
    inst: CliqueGridInstance,
    nctd: CellNCTD,
    k: int,
    *,
    faithful_caps: bool = True,
    stats: dict | None = None,
) -> tuple[int, Witness]:
    """Size of a maximum induced forest, with the forest as witness.

    A DP over the vertex-granular expansion of ``nctd``. A state is the
    set ``U`` of chosen vertices still in the bag together with the
    partition of ``U`` into connected-component traces of the chosen
    subgraph processed so far; its value is the best number of chosen
    vertices realizing that trace. Joins recombine partitions with a
    union-find and drop any state whose two sides connect the same pair
    twice (that closes a cycle).

    With ``faithful_caps`` (default) states keep at most two chosen
    vertices per cell and at most ``2 * cells-per-bag`` overall. Both
    bounds hold for every induced forest (three in-cell vertices form a
    triangle), so the pruned states could never survive to the root; the
    flag only allows the unpruned cross-check.

    Requires every cell to have fewer than ``k + 3`` vertices; a larger
    cell forces more than ``k`` deletions and is settled by the caller.
    """
    ok, msg = verify_cell_nctd(inst, nctd)
    if not ok:
        raise ValueError(f"invalid cell decomposition: {msg}")
    for cell in inst.nonempty_cells():
        if len(inst.vertices_in(cell)) >= k + 3:
            raise ValueError(
                f"cell {cell} has {len(inst.vertices_in(cell))} vertices; "
                f"every cell must have fewer than k + 3 = {k + 3}"
            )
    if inst.n == 0:
        return 0, Witness.vertex_set(())
    ann = annotated_from_cell_nctd(inst, nctd)
    u_cap = 2 * max(nctd.ell, 1)

    # table entry: (U, blocks) -> (value, chosen-vertex set)
    def put(tbl, key, value, chosen):
        cur = tbl.get(key)
        if cur is None or value > cur[0]:
            tbl[key] = (value, chosen)

    def fold_edges(states, node):
        for u, v in ann.edges_at[node]:
            nxt: dict = {}
            for (u_set, blocks), (value, chosen) in states.items():
                if u in u_set and v in u_set:
                    bu = next(b for b in blocks if u in b)
                    bv = next(b for b in blocks if v in b)
                    if bu == bv:
                        continue  # second connection closes a cycle
                    merged = tuple(sorted(bu + bv))
                    rest = [b for b in blocks if b != bu and b != bv]
                    put(nxt, (u_set, _canon_blocks(rest + [merged])), value, chosen)
                else:
                    put(nxt, (u_set, blocks), value, chosen)
            states = nxt
        return states

    table: dict[int, dict] = {}
    for x in _post_order(ann):
        kind = ann.kinds[x]
        if kind == LEAF:
            states = {(frozenset(), ()): (0, frozenset())}
        elif kind == INTRODUCE:
            (child,) = ann.children[x]
            w = ann.payload[x]
            w_cell = inst.cell_of(w)
            states = {}
            for (u_set, blocks), (value, chosen) in table[child].items():
                put(states, (u_set, blocks), value, chosen)
                if faithful_caps:
                    if len(u_set) >= u_cap:
                        continue
                    if sum(1 for y in u_set if inst.cell_of(y) == w_cell) >= FOREST_PER_CELL:
                        continue
                key = (u_set | {w}, _canon_blocks(blocks + ((w,),)))
                put(states, key, value + 1, chosen | {w})
        elif kind == FORGET:
            (child,) = ann.children[x]
            w = ann.payload[x]
            states = {}
            for (u_set, blocks), (value, chosen) in table[child].items():
                if w in u_set:
                    nb = []
                    for b in blocks:
                        if w in b:
                            rb = tuple(y for y in b if y != w)
                            if rb:
                                nb.append(rb)
                        else:
                            nb.append(b)
                    put(states, (u_set - {w}, _canon_blocks(nb)), value, chosen)
                else:
                    put(states, (u_set, blocks), value, chosen)
        else:  # join
            lc, rc = ann.children[x]
            by_u: dict = defaultdict(list)
            for (u_set, blocks), val in table[rc].items():
                by_u[u_set].append((blocks, val))
            states = {}
            for (u_set, bl), (vl, wl) in table[lc].items():
                for br, (vr, wr) in by_u.get(u_set, ()):
                    merged = _merge_partitions(u_set, bl, br)
                    if merged is None:
                        continue
                    put(states, (u_set, merged), vl + vr - len(u_set), wl | wr)
        states = fold_edges(states, x)
        table[x] = states
        if stats is not None:
            stats["states_peak"] = max(stats.get("states_peak", 0), len(states))
            sup = max((len(u) for u, _ in states), default=0)
            stats["support_peak"] = max(stats.get("support_peak", 0), sup)
        for ch in ann.children[x]:
            del table[ch]

    best_value, best_chosen = max(table[ann.root].values(), key=lambda it: it[0])
    return best_value, Witness.vertex_set(sorted(best_chosen))


def fvs(
    inst: InstanceLike,
    k: int,
    *,
    witness: bool = False,
    model: ModelLike = GeometricModel.DISK,
    faithful_caps: bool = True,
    stats: dict | None = None,
) -> SolveResult:
    """Can deleting at most ``k`` vertices make the graph acyclic?

    Pipeline: settle trivially acyclic inputs, then any cell with at
    least ``k + 3`` vertices forces a NO (a clique on m vertices keeps a
    triangle until m - 2 deletions); otherwise run the maximum induced
    forest DP over a cell decomposition and compare against ``n - k``.
    The witness is the deleted vertex set.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    inst = as_instance(inst, model)
    if _is_forest(inst.graph):
        wit = Witness.vertex_set(()) if witness else None
        return SolveResult(True, wit, "already acyclic")
    if k == 0:
        return SolveResult(False, None, "graph has a cycle and no deletions allowed")
    cell = large_clique_cell(inst, k + 3)
    if cell is not None:
        need = len(inst.vertices_in(cell)) - 2
        return SolveResult(False, None, f"cell {cell} is a clique needing {need} deletions")
    nctd = build_cell_nctd(inst)
    size, forest = mif_dp(inst, nctd, k, faithful_caps=faithful_caps, stats=stats)
    if size >= inst.n - k:
        wit = None
        if witness:
            deleted = sorted(set(range(inst.n)) - set(forest.vertices))
            wit = Witness.vertex_set(deleted)
        return SolveResult(True, wit, f"max induced forest has {size} vertices")
    return SolveResult(False, None, f"max induced forest has {size} < n - k vertices")


# ---------------------------------------------------------------------------
# cycle packing


class _Done(Exception):
    """Raised as soon as k disjoint cycles are completed."""

    def __init__(self, cycles: tuple[tuple[int, ...], ...]):
        self.cycles = cycles


def _piece_components(
    pieces: Sequence[tuple[int, int]]
) -> list[tuple[list[int], list[int]]]:
    """Connected components of the piece multigraph.

    Returns, per component, the sorted vertex list and the piece indexes.
    Stored states always have path-shaped components; transient merges may
    contain closed ones (every vertex of degree two), which callers detect.
    """
    incid: dict[int, list[int]] = defaultdict(list)
    for i, (a, b) in enumerate(pieces):
        incid[a].append(i)
        incid[b].append(i)
    seen_pieces: set[int] = set()
    seen_verts: set[int] = set()
    comps = []
    for start in sorted(incid):
        if start in seen_verts:
            continue
        verts = {start}
        queue = [start]
        idxs = []
        while queue:
            v = queue.pop()
            for i in incid[v]:
                if i in seen_pieces:
                    continue
                seen_pieces.add(i)
                idxs.append(i)
                for w in pieces[i]:
                    if w not in verts:
                        verts.add(w)
                        queue.append(w)
        seen_verts |= verts
        comps.append((sorted(verts), sorted(idxs)))
    return comps


def _walk_chain(
    pieces: Sequence[tuple[int, int]],
    paths: Sequence[tuple[int, ...]],
    idxs: Sequence[int],
    start: int,
) -> tuple[int, ...]:
    """Concatenate the piece paths of one chain starting at ``start``.

    For an open chain ``start`` must be one of its two endpoints; for a
    closed chain the walk returns to ``start`` (which is then dropped).
    """
    incid: dict[int, list[int]] = defaultdict(list)
    for i in idxs:
        a, b = pieces[i]
        incid[a].append(i)
        incid[b].append(i)
    walk = [start]
    used: set[int] = set()
    cur = start
    while True:
        nxt = [i for i in incid[cur] if i not in used]
        if not nxt:
            break
        i = min(nxt)
        used.add(i)
        seg = paths[i] if paths[i][0] == cur else tuple(reversed(paths[i]))
        walk.extend(seg[1:])
        cur = walk[-1]
        if cur == start:
            walk.pop()
            break
    return tuple(walk)


def _shortcut_induced(g: SimpleGraph, cycle: Sequence[int]) -> tuple[int, ...]:
    """Shrink a cycle across chords until it is induced.

    Every pass replaces the cycle by the chord-side arc, so the result is
    a cycle on a subset of the original vertices (disjointness with other
    cycles is preserved).
    """
    cyc = list(cycle)
    changed = True
    while changed and len(cyc) > 3:
        changed = False
        n = len(cyc)
        for i in range(n):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue  # cycle edge, not a chord
                if not g.has_edge(cyc[i], cyc[j]):
                    continue
                inner = cyc[i : j + 1]
                outer = cyc[j:] + cyc[: i + 1]
                cyc = inner if len(inner) <= len(outer) else outer
                changed = True
                break
            if changed:
                break
    return tuple(cyc)


def packing_dp(
    inst: CliqueGridInstance,
    nctd: CellNCTD,
    k: int,
    *,
    witness: bool = False,
    cap_mode: str = "adaptive",
    stats: dict | None = None,
) -> tuple[bool, tuple[tuple[int, ...], ...] | None]:
    """Are there ``k`` vertex-disjoint cycles? DP over the cell decomposition.

    A state holds a multiset of *pieces* — open solution paths split at
    bag vertices, kept as endpoint pairs — plus the touch-points of
    completed cycles still in the bag and a count of completed cycles.
    Each vertex serves at most two sets; touch-point vertices serve none.
    Using an edge either starts a new piece, extends chains, or — when it
    links the two ends of one chain — completes a cycle. The answer is
    driven by whether the empty-bag root state reaches count ``k``; the
    search stops early the moment any state does.

    ``cap_mode`` bounds state support: "theory" caps the support at 2304
    vertices per bag cell; "adaptive" additionally caps each cell's
    contribution at ``3k``; "off" disables both for the pruned-vs-unpruned
    cross-check. Since every cell must have fewer than ``3k`` vertices
    (larger cells are settled by the caller), both caps are provably
    non-binding here; they document the state-space bound.

    Returns ``(answer, cycles)``; with ``witness`` the cycles are
    reconstructed and shortcut across chords to induced cycles.
    """
    if cap_mode not in CAP_MODES:
        raise ValueError(f"cap_mode must be one of {CAP_MODES}")
    ok, msg = verify_cell_nctd(inst, nctd)
    if not ok:
        raise ValueError(f"invalid cell decomposition: {msg}")
    for cell in inst.nonempty_cells():
        if len(inst.vertices_in(cell)) >= 3 * k:
            raise ValueError(
                f"cell {cell} has {len(inst.vertices_in(cell))} vertices; "
                f"every cell must have fewer than 3k = {3 * k}"
            )
    if k <= 0:
        raise ValueError("packing_dp needs k >= 1; k = 0 is trivially yes")
    if inst.n == 0:
        return False, None
    ann = annotated_from_cell_nctd(inst, nctd)
    g = inst.graph

    def cap_ok(pieces, z1, node) -> bool:
        if cap_mode == "off":
            return True
        support = {v for p in pieces for v in p} | z1
        cells: dict = defaultdict(int)
        for v in support:
            cells[inst.cell_of(v)] += 1
        bag_cells = {inst.cell_of(v) for v in ann.bags[node]}
        if len(support) > PACKING_CELL_TOUCH_CAP * max(len(bag_cells), 1):
            return False
        if cap_mode == "adaptive" and any(c > 3 * k for c in cells.values()):
            return False
        return True

    # state: (pieces sorted tuple of (a,b) a<b, z1 frozenset, cnt)
    # payload: (paths tuple aligned with pieces, completed cycles tuple)
    def put(tbl, node, pieces_paths, z1, cnt, cycles):
        pieces_paths = sorted(pieces_paths)
        pieces = tuple(p for p, _ in pieces_paths)
        paths = tuple(pa for _, pa in pieces_paths)
        if cnt >= k:
            raise _Done(cycles)
        if not cap_ok(pieces, z1, node):
            return
        key = (pieces, z1, cnt)
        if key not in tbl:
            tbl[key] = (paths, cycles)

    def degree(v, pieces, z1) -> int:
        if v in z1:
            return 2
        return sum(1 for p in pieces if v in p)

    def close_chain(pieces, paths, idxs, start) -> tuple[tuple[int, ...], set[int]]:
        cycle = _walk_chain(pieces, paths, idxs, start)
        touch = {v for i in idxs for v in pieces[i]}
        return cycle, touch

    def fold_edges(states, node):
        for u, v in ann.edges_at[node]:
            nxt: dict = {}
            for (pieces, z1, cnt), (paths, cycles) in states.items():
                put(nxt, node, list(zip(pieces, paths)), z1, cnt, cycles)
                if u in z1 or v in z1:
                    continue
                du = degree(u, pieces, z1)
                dv = degree(v, pieces, z1)
                if du >= 2 or dv >= 2:
                    continue
                if du and dv:
                    comp = next(c for c in _piece_components(pieces) if u in c[0])
                    if v in comp[0]:
                        # the edge links the two ends of one chain: a cycle
                        verts, idxs = comp
                        chain = _walk_chain(pieces, paths, idxs, u)
                        if chain[-1] != v or len(chain) < 3:
                            continue  # same-chain but not the far end
                        rest = [
                            (pieces[i], paths[i])
                            for i in range(len(pieces))
                            if i not in idxs
                        ]
                        put(
                            nxt, node, rest, z1 | set(verts), cnt + 1,
                            cycles + (chain,),
                        )
                        continue
                pair = (min(u, v), max(u, v))
                put(
                    nxt, node,
                    list(zip(pieces, paths)) + [(pair, (pair[0], pair[1]))],
                    z1, cnt, cycles,
                )
            states = nxt
        return states

    table: dict[int, dict] = {}
    try:
        for x in _post_order(ann):
            kind = ann.kinds[x]
            if kind == LEAF:
                states = {((), frozenset(), 0): ((), ())}
            elif kind == INTRODUCE:
                states = dict(table[ann.children[x][0]])
            elif kind == FORGET:
                (child,) = ann.children[x]
                w = ann.payload[x]
                states = {}
                for (pieces, z1, cnt), (paths, cycles) in table[child].items():
                    if w in z1:
                        put(states, x, list(zip(pieces, paths)), z1 - {w}, cnt, cycles)
                        continue
                    idxs = [i for i, p in enumerate(pieces) if w in p]
                    if len(idxs) == 1:
                        continue  # a dangling path end below the bag never closes
                    if len(idxs) == 2:
                        i1, i2 = idxs
                        p1 = paths[i1] if paths[i1][-1] == w else tuple(reversed(paths[i1]))
                        p2 = paths[i2] if paths[i2][0] == w else tuple(reversed(paths[i2]))
                        a, b = p1[0], p2[-1]
                        rest = [
                            (pieces[i], paths[i])
                            for i in range(len(pieces))
                            if i not in idxs
                        ]
                        if a == b:
                            # both pieces ran between the same endpoints;
                            # their union is already a cycle through w
                            cyc = p1 + p2[1:-1]
                            put(states, x, rest, z1 | {a}, cnt + 1, cycles + (cyc,))
                            continue
                        joined = p1 + p2[1:]
                        if a > b:
                            joined = tuple(reversed(joined))
                        put(
                            states, x,
                            rest + [((min(a, b), max(a, b)), joined)],
                            z1, cnt, cycles,
                        )
                    else:
                        put(states, x, list(zip(pieces, paths)), z1, cnt, cycles)
            else:  # join
                lc, rc = ann.children[x]
                states = {}
                right_items = list(table[rc].items())
                for (pcl, z1l, cl), (pathsl, cycl) in table[lc].items():
                    for (pcr, z1r, cr), (pathsr, cycr) in right_items:
                        compatible = True
                        for v in z1l:
                            if v in z1r or any(v in p for p in pcr):
                                compatible = False
                                break
                        if compatible:
                            for v in z1r:
                                if any(v in p for p in pcl):
                                    compatible = False
                                    break
                        if compatible:
                            deg: dict = defaultdict(int)
                            for p in pcl:
                                deg[p[0]] += 1
                                deg[p[1]] += 1
                            for p in pcr:
                                deg[p[0]] += 1
                                deg[p[1]] += 1
                            if any(d > 2 for d in deg.values()):
                                compatible = False
                        if not compatible:
                            continue
                        pieces = pcl + pcr
                        paths = pathsl + pathsr
                        new_cycles = []
                        touch: set[int] = set()
                        open_pp = []
                        ok_comb = True
                        for verts, idxs in _piece_components(pieces):
                            if all(
                                sum(1 for i in idxs if v in pieces[i]) == 2
                                for v in verts
                            ):
                                cyc = _walk_chain(pieces, paths, idxs, verts[0])
                                if len(cyc) < 3:
                                    ok_comb = False
                                    break
                                new_cycles.append(cyc)
                                touch |= set(verts)
                            else:
                                open_pp.extend((pieces[i], paths[i]) for i in idxs)
                        if not ok_comb:
                            continue
                        put(
                            states, x, open_pp,
                            z1l | z1r | touch,
                            cl + cr + len(new_cycles),
                            cycl + cycr + tuple(new_cycles),
                        )
            states = fold_edges(states, x)
            table[x] = states
            if stats is not None:
                stats["states_peak"] = max(stats.get("states_peak", 0), len(states))
                sup = max(
                    (len({v for p in pieces for v in p} | set(z1))
                     for pieces, z1, _ in states),
                    default=0,
                )
                stats["support_peak"] = max(stats.get("support_peak", 0), sup)
            for ch in ann.children[x]:
                del table[ch]
    except _Done as hit:
        if not witness:
            return True, None
        return True, tuple(_shortcut_induced(g, c) for c in hit.cycles)
    return False, None


def cycle_packing(
    inst: InstanceLike,
    k: int,
    *,
    witness: bool = False,
    model: ModelLike = GeometricModel.DISK,
    cap_mode: str = "adaptive",
    stats: dict | None = None,
) -> SolveResult:
    """Are there ``k`` pairwise vertex-disjoint cycles?

    Pipeline: k = 0 is trivially yes; a cell with at least ``3k``
    vertices is a clique holding ``k`` disjoint triangles; otherwise run
    the packing DP over a cell decomposition.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    inst = as_instance(inst, model)
    if k == 0:
        wit = Witness.cycle_family(()) if witness else None
        return SolveResult(True, wit, "empty family")
    cell = large_clique_cell(inst, 3 * k)
    if cell is not None:
        members = inst.vertices_in(cell)[: 3 * k]
        fam = tuple(tuple(members[3 * i : 3 * i + 3]) for i in range(k))
        wit = Witness.cycle_family(fam) if witness else None
        return SolveResult(True, wit, f"cell {cell} holds {k} disjoint triangles")
    # the same observation summed across cells: cells are disjoint cliques,
    # so every cell contributes floor(size/3) disjoint triangles
    triangles: list[tuple[int, ...]] = []
    for c in inst.nonempty_cells():
        members = inst.vertices_in(c)
        for i in range(len(members) // 3):
            triangles.append(tuple(members[3 * i : 3 * i + 3]))
        if len(triangles) >= k:
            fam = tuple(triangles[:k])
            wit = Witness.cycle_family(fam) if witness else None
            return SolveResult(True, wit, f"{k} disjoint in-cell triangles")
    if inst.n < 3 * k:
        return SolveResult(False, None, "fewer than 3k vertices")
    nctd = build_cell_nctd(inst)
    answer, cycles = packing_dp(
        inst, nctd, k, witness=witness, cap_mode=cap_mode, stats=stats
    )
    if answer:
        wit = Witness.cycle_family(cycles) if witness and cycles is not None else None
        return SolveResult(True, wit, "packing DP")
    return SolveResult(False, None, "packing DP found no family")
