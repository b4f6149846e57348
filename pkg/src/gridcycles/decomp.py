"""Tree and path decompositions: exact treewidth search, nicification,
cell-granular decompositions, verification, and PACE .td round-tripping."""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

from .cliquegrid import Cell, CliqueGridInstance, cell_graph
from .graphs import SimpleGraph

# the recursive nicify/search helpers walk trees whose height can approach
# the node count; headroom beyond CPython's default is cheap insurance
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))


class WidthExceeded(Exception):
    """The graph's treewidth provably exceeds the requested cap."""


class SearchBudgetExceeded(Exception):
    """The exact search ran out of budget before reaching a conclusion."""


# ---------------------------------------------------------------------------
# plain tree decompositions


@dataclass(frozen=True)
class TreeDecomposition:
    """Bags plus tree edges between bag indices."""

    bags: tuple[frozenset[int], ...]
    edges: tuple[tuple[int, int], ...]

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    def __len__(self) -> int:
        return len(self.bags)


def verify_tree_decomposition(g: SimpleGraph, td: TreeDecomposition) -> tuple[bool, str | None]:
    """Check the three decomposition conditions plus tree-ness."""
    nb = len(td.bags)
    if nb == 0:
        return (g.n == 0, "graph has vertices but decomposition is empty" if g.n else None)
    if len(td.edges) != nb - 1:
        return False, f"{nb} bags need {nb - 1} tree edges, found {len(td.edges)}"
    parent = list(range(nb))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    adj: list[list[int]] = [[] for _ in range(nb)]
    for a, b in td.edges:
        if not (0 <= a < nb and 0 <= b < nb):
            return False, f"tree edge ({a},{b}) out of range"
        ra, rb = find(a), find(b)
        if ra == rb:
            return False, "tree edges contain a cycle"
        parent[ra] = rb
        adj[a].append(b)
        adj[b].append(a)
    # vertex coverage and connectivity of occurrences
    holds: dict[int, list[int]] = {}
    for i, bag in enumerate(td.bags):
        for v in bag:
            holds.setdefault(v, []).append(i)
    for v in range(g.n):
        nodes = holds.get(v)
        if not nodes:
            return False, f"vertex {v} appears in no bag"
        member = set(nodes)
        stack, seen = [nodes[0]], {nodes[0]}
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in member and y not in seen:
                    seen.add(y)
                    stack.append(y)
        if len(seen) != len(member):
            return False, f"occurrences of vertex {v} are disconnected"
    for u, v in g.edges():
        if not any(u in bag and v in bag for bag in td.bags):
            return False, f"edge ({u},{v}) is covered by no bag"
    return True, None


# ---------------------------------------------------------------------------
# exact treewidth via elimination orderings


def _adj_sets(g: SimpleGraph) -> list[set[int]]:
    return [set(g.adj(v)) for v in range(g.n)]


def _mmd_lower_bound(g: SimpleGraph) -> int:
    """Maximum-minimum-degree bound: peel min-degree vertices, track the max."""
    adj = _adj_sets(g)
    alive = set(range(g.n))
    lb = 0
    while alive:
        v = min(alive, key=lambda x: (len(adj[x]), x))
        lb = max(lb, len(adj[v]))
        for u in adj[v]:
            adj[u].discard(v)
        alive.discard(v)
    return lb


def _greedy_fillin_order(g: SimpleGraph) -> list[int]:
    """Eliminate the vertex needing fewest fill edges (ties: degree, index)."""
    adj = _adj_sets(g)
    alive = set(range(g.n))
    order = []
    while alive:
        best_v, best_key = -1, None
        for v in alive:
            nbrs = adj[v]
            fill = 0
            nlist = list(nbrs)
            for i, a in enumerate(nlist):
                fill += sum(1 for b in nlist[i + 1 :] if b not in adj[a])
            key = (fill, len(nbrs), v)
            if best_key is None or key < best_key:
                best_v, best_key = v, key
        order.append(best_v)
        nbrs = adj[best_v]
        for a in nbrs:
            adj[a] |= nbrs
            adj[a].discard(a)
            adj[a].discard(best_v)
        alive.discard(best_v)
    return order


def _td_from_elimination(g: SimpleGraph, order: Sequence[int]) -> TreeDecomposition:
    """Standard bag construction along an elimination ordering."""
    if g.n == 0:
        return TreeDecomposition((frozenset(),), ())
    pos = {v: i for i, v in enumerate(order)}
    adj = _adj_sets(g)
    bags: list[frozenset[int]] = []
    for v in order:
        later = {u for u in adj[v] if pos[u] > pos[v]}
        bags.append(frozenset({v} | later))
        for a in later:
            adj[a] |= later
            adj[a].discard(a)
            adj[a].discard(v)
    edges = []
    for i, v in enumerate(order):
        rest = bags[i] - {v}
        if rest:
            j = pos[min(rest, key=lambda u: pos[u])]
            edges.append((i, j))
        elif i + 1 < len(order):
            edges.append((i, i + 1))
    return TreeDecomposition(tuple(bags), tuple(edges))


def _elimination_width(g: SimpleGraph, order: Sequence[int]) -> int:
    pos = {v: i for i, v in enumerate(order)}
    adj = _adj_sets(g)
    width = -1
    for v in order:
        later = {u for u in adj[v] if pos[u] > pos[v]}
        width = max(width, len(later))
        for a in later:
            adj[a] |= later
            adj[a].discard(a)
            adj[a].discard(v)
    return width


def _bnb_order(g: SimpleGraph, cap: int, node_budget: int) -> list[int] | None:
    """Find an elimination order of width <= cap, or prove none exists.

    Returns the order, or None if treewidth > cap. Raises
    SearchBudgetExceeded when the node budget runs dry first. Deterministic:
    the budget counts explored search nodes, not wall time.
    """
    n = g.n
    if n == 0 or n <= cap + 1:
        return list(range(n))
    adj = {v: set(g.adj(v)) for v in range(g.n)}
    dead_ends: set[frozenset[int]] = set()
    spent = [0]

    def rec(remaining: frozenset[int], prefix: list[int]) -> bool:
        spent[0] += 1
        if spent[0] > node_budget:
            raise SearchBudgetExceeded(
                f"treewidth search exceeded {node_budget} nodes at cap {cap}"
            )
        if len(remaining) <= cap + 1:
            prefix.extend(sorted(remaining))
            return True
        if remaining in dead_ends:
            return False
        # forced move: a simplicial vertex of degree <= cap is always safe
        forced = None
        candidates = []
        for v in sorted(remaining):
            nbrs = adj[v]
            if len(nbrs) > cap:
                continue
            nlist = list(nbrs)
            simplicial = all(
                b in adj[a] for i, a in enumerate(nlist) for b in nlist[i + 1 :]
            )
            if simplicial:
                forced = v
                break
            candidates.append(v)
        todo = [forced] if forced is not None else candidates
        for v in todo:
            nbrs = set(adj[v])
            added: list[tuple[int, int]] = []
            for a in nbrs:
                for b in nbrs:
                    if a < b and b not in adj[a]:
                        adj[a].add(b)
                        adj[b].add(a)
                        added.append((a, b))
                adj[a].discard(v)
            prefix.append(v)
            if rec(remaining - {v}, prefix):
                return True
            prefix.pop()
            for a in nbrs:
                adj[a].add(v)
            for a, b in added:
                adj[a].discard(b)
                adj[b].discard(a)
        dead_ends.add(remaining)
        return False

    prefix: list[int] = []
    if rec(frozenset(range(n)), prefix):
        return prefix
    return None


@dataclass(frozen=True)
class TreewidthResult:
    td: TreeDecomposition
    width: int
    exact: bool


def exact_treewidth(
    g: SimpleGraph, cap: int | None = None, *, node_budget: int = 300_000
) -> TreewidthResult:
    """Treewidth by branch and bound over elimination orderings.

    Fast paths: a greedy fill-in ordering already within the cap, or a
    max-min-degree lower bound already above it (raises
    :class:`WidthExceeded`). Otherwise the search runs cap-by-cap. With
    ``cap=None`` the search is best-effort: if the budget runs out, the
    greedy decomposition is returned with ``exact=False`` (it is still a
    valid decomposition, just possibly wider than optimal).
    """
    greedy = _greedy_fillin_order(g)
    ub = _elimination_width(g, greedy)
    lb = _mmd_lower_bound(g)
    if cap is not None:
        if lb > cap:
            raise WidthExceeded(f"lower bound {lb} exceeds cap {cap}")
        if ub <= cap:
            return TreewidthResult(_td_from_elimination(g, greedy), ub, ub == lb)
        order = _bnb_order(g, cap, node_budget)
        if order is None:
            raise WidthExceeded(f"exhaustive search proves treewidth > {cap}")
        width = _elimination_width(g, order)
        return TreewidthResult(_td_from_elimination(g, order), width, False)
    # unbounded: tighten from the lower bound upward
    best_order, best_width = greedy, ub
    for target in range(lb, ub):
        try:
            order = _bnb_order(g, target, node_budget)
        except SearchBudgetExceeded:
            return TreewidthResult(_td_from_elimination(g, best_order), best_width, False)
        if order is not None:
            width = _elimination_width(g, order)
            return TreewidthResult(_td_from_elimination(g, order), width, True)
    return TreewidthResult(_td_from_elimination(g, best_order), best_width, True)


# ---------------------------------------------------------------------------
# nice decompositions (generic over "tokens": graph vertices or cells)

LEAF, INTRODUCE, FORGET, JOIN = "leaf", "introduce", "forget", "join"


@dataclass(frozen=True)
class NiceTreeDecomposition:
    """Rooted nice tree decomposition; the root bag is empty."""

    bags: tuple[frozenset[int], ...]
    children: tuple[tuple[int, ...], ...]
    kinds: tuple[str, ...]
    payload: tuple[int | None, ...]
    root: int

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    def __len__(self) -> int:
        return len(self.bags)


class _NiceBuilder:
    def __init__(self) -> None:
        self.bags: list[frozenset] = []
        self.children: list[tuple[int, ...]] = []
        self.kinds: list[str] = []
        self.payload: list = []

    def add(self, bag: frozenset, kind: str, payload, children: tuple[int, ...]) -> int:
        self.bags.append(bag)
        self.children.append(children)
        self.kinds.append(kind)
        self.payload.append(payload)
        return len(self.bags) - 1

    def chain(self, frm: int, src: frozenset, dst: frozenset, key) -> int:
        """Forget src-dst then introduce dst-src, one token per node."""
        node, bag = frm, src
        for tok in sorted(src - dst, key=key):
            bag = bag - {tok}
            node = self.add(bag, FORGET, tok, (node,))
        for tok in sorted(dst - src, key=key):
            bag = bag | {tok}
            node = self.add(bag, INTRODUCE, tok, (node,))
        return node

    def leaf_chain(self, bag: frozenset, key) -> int:
        node = self.add(frozenset(), LEAF, None, ())
        return self.chain(node, frozenset(), bag, key)


def _nicify(
    bags: Sequence[frozenset], tree_edges: Iterable[tuple[int, int]], key=lambda t: t
):
    """Turn any tree of bags into a nice one; returns builder arrays + root."""
    nb = len(bags)
    builder = _NiceBuilder()
    if nb == 0:
        root = builder.add(frozenset(), LEAF, None, ())
        return builder, root
    adj: list[list[int]] = [[] for _ in range(nb)]
    for a, b in tree_edges:
        adj[a].append(b)
        adj[b].append(a)

    def build(x: int, parent: int) -> int:
        """Nice subtree whose top node has bag bags[x]."""
        kids = [y for y in adj[x] if y != parent]
        if not kids:
            return builder.leaf_chain(bags[x], key)
        tops = []
        for y in kids:
            sub = build(y, x)
            tops.append(builder.chain(sub, bags[y], bags[x], key))
        while len(tops) > 1:
            right = tops.pop()
            left = tops.pop()
            tops.append(builder.add(bags[x], JOIN, None, (left, right)))
        return tops[0]

    top = build(0, -1)
    root = builder.chain(top, bags[0], frozenset(), key)
    return builder, root


def make_nice(td: TreeDecomposition) -> NiceTreeDecomposition:
    """Nice version of a tree decomposition, same width, empty root bag."""
    builder, root = _nicify(td.bags, td.edges)
    return NiceTreeDecomposition(
        bags=tuple(builder.bags),
        children=tuple(builder.children),
        kinds=tuple(builder.kinds),
        payload=tuple(builder.payload),
        root=root,
    )


def verify_nice_decomposition(
    g: SimpleGraph, nice: NiceTreeDecomposition
) -> tuple[bool, str | None]:
    """Nice-specific structure plus the underlying decomposition conditions."""
    n_nodes = len(nice.bags)
    if nice.bags[nice.root]:
        return False, "root bag is not empty"
    for x in range(n_nodes):
        kids = nice.children[x]
        kind = nice.kinds[x]
        bag = nice.bags[x]
        if kind == LEAF:
            if kids or bag:
                return False, f"leaf node {x} has children or a nonempty bag"
        elif kind == FORGET:
            if len(kids) != 1 or nice.payload[x] not in nice.bags[kids[0]]:
                return False, f"forget node {x} malformed"
            if bag != nice.bags[kids[0]] - {nice.payload[x]}:
                return False, f"forget node {x} bag mismatch"
        elif kind == INTRODUCE:
            if len(kids) != 1 or nice.payload[x] not in bag:
                return False, f"introduce node {x} malformed"
            if bag - {nice.payload[x]} != nice.bags[kids[0]]:
                return False, f"introduce node {x} bag mismatch"
        elif kind == JOIN:
            if len(kids) != 2 or any(nice.bags[y] != bag for y in kids):
                return False, f"join node {x} bag mismatch"
        else:
            return False, f"unknown node kind {kind!r}"
    edges = []
    for x in range(n_nodes):
        for y in nice.children[x]:
            edges.append((x, y))
    return verify_tree_decomposition(g, TreeDecomposition(nice.bags, tuple(edges)))


# ---------------------------------------------------------------------------
# cell-granular nice tree decompositions


@dataclass(frozen=True)
class CellNCTD:
    """Nice tree decomposition whose bags are unions of at most ell full cells."""

    cells_of: tuple[frozenset[Cell], ...]
    children: tuple[tuple[int, ...], ...]
    kinds: tuple[str, ...]
    payload: tuple[Cell | None, ...]
    root: int
    ell: int  # declared bound on cells per bag

    def __len__(self) -> int:
        return len(self.cells_of)

    def vertex_bag(self, node: int, inst: CliqueGridInstance) -> frozenset[int]:
        out: set[int] = set()
        for cell in self.cells_of[node]:
            out.update(inst.vertices_in(cell))
        return frozenset(out)


def build_cell_nctd(
    inst: CliqueGridInstance, cap: int | None = None, *, node_budget: int = 300_000
) -> CellNCTD:
    """Cell-granular NCTD from a treewidth decomposition of the cell graph.

    ``cap`` bounds the *cell-graph* treewidth: a width-w decomposition turns
    into bags of at most w+1 full cells. Raises WidthExceeded if the cell
    graph provably needs more.
    """
    cg = cell_graph(inst)
    result = exact_treewidth(cg.graph, cap, node_budget=node_budget)
    builder, root = _nicify(result.td.bags, result.td.edges)
    to_cell = cg.cells
    return CellNCTD(
        cells_of=tuple(frozenset(to_cell[i] for i in bag) for bag in builder.bags),
        children=tuple(builder.children),
        kinds=tuple(builder.kinds),
        payload=tuple(None if p is None else to_cell[p] for p in builder.payload),
        root=root,
        ell=max((len(b) for b in builder.bags), default=0),
    )


def verify_cell_nctd(inst: CliqueGridInstance, nctd: CellNCTD) -> tuple[bool, str | None]:
    """Check cell-level niceness and the vertex-level decomposition conditions."""
    for x in range(len(nctd)):
        kind, kids, cells = nctd.kinds[x], nctd.children[x], nctd.cells_of[x]
        if len(cells) > nctd.ell:
            return False, f"node {x} holds {len(cells)} cells, declared bound {nctd.ell}"
        if kind == LEAF:
            if kids or cells:
                return False, f"leaf node {x} malformed"
        elif kind == FORGET:
            if len(kids) != 1 or nctd.cells_of[kids[0]] - {nctd.payload[x]} != cells:
                return False, f"forget node {x} malformed"
        elif kind == INTRODUCE:
            if len(kids) != 1 or cells - {nctd.payload[x]} != nctd.cells_of[kids[0]]:
                return False, f"introduce node {x} malformed"
        elif kind == JOIN:
            if len(kids) != 2 or any(nctd.cells_of[y] != cells for y in kids):
                return False, f"join node {x} malformed"
        else:
            return False, f"unknown node kind {kind!r}"
    if nctd.cells_of[nctd.root]:
        return False, "root bag is not empty"
    bags = tuple(nctd.vertex_bag(x, inst) for x in range(len(nctd)))
    edges = []
    for x in range(len(nctd)):
        for y in nctd.children[x]:
            edges.append((x, y))
    return verify_tree_decomposition(inst.graph, TreeDecomposition(bags, tuple(edges)))


# ---------------------------------------------------------------------------
# Baker-style nice cell path decompositions


@dataclass(frozen=True)
class BakerNCPD:
    """Cell-granular nice path decomposition with a pinned vertex set Y.

    ``steps`` starts from the empty bag; each step introduces or forgets one
    cell of the restricted instance. Y's cells are introduced first and
    forgotten last, so Y sits in every interior bag. Every other cell
    belongs to one of the column runs ("windows"); per bag at most
    ``window_cell_bound`` non-Y cells appear.
    """

    steps: tuple[tuple[str, Cell], ...]
    y_cells: tuple[Cell, ...]
    window_cell_bound: int
    k: int

    def __len__(self) -> int:
        return len(self.steps)

    def bags_cells(self) -> list[frozenset[Cell]]:
        """Bag contents after each step (index 0 = after first step)."""
        cur: set[Cell] = set()
        out = []
        for kind, cell in self.steps:
            if kind == INTRODUCE:
                cur.add(cell)
            else:
                cur.discard(cell)
            out.append(frozenset(cur))
        return out


def build_baker_ncpd(
    inst: CliqueGridInstance,
    deleted: frozenset[int],
    kept: frozenset[int],
    k: int,
    blocked_columns: frozenset[int] | None = None,
) -> tuple[CliqueGridInstance, tuple[int, ...], BakerNCPD]:
    """NCPD of ``inst`` minus ``deleted``, with ``kept`` (Y) in every bag.

    ``deleted`` and ``kept`` partition the vertices of one column-pair label
    class. ``blocked_columns`` names that class's column pairs *by index*;
    everything outside them splits into runs of columns separated by at
    least two blocked columns, so no edge crosses between runs (edges span
    at most 2 columns). When the caller does not supply the blocked set it
    is inferred from where the deleted/kept vertices live — fine for
    hand-built inputs, but the solver passes it explicitly so that vertex-
    free blocked columns still count as separators. Each run is swept three
    rows at a time, giving bags of at most 3 * (run width) non-Y cells
    (the declared bound is 6 * ceil(sqrt(k))) plus Y's cells.

    Returns (restricted instance, new->old vertex map, decomposition).
    """
    sk = math.isqrt(k - 1) + 1 if k > 0 else 1  # ceil(sqrt(k))
    if blocked_columns is None:
        blocked_columns = frozenset(inst.cell_of(v)[0] for v in (deleted | kept))
    alive = [v for v in range(inst.n) if v not in deleted]
    sub, old = inst.subinstance(alive)
    old_pos = {o: i for i, o in enumerate(old)}
    y_new = frozenset(old_pos[v] for v in kept)
    y_cells = sorted({sub.cell_of(v) for v in y_new})
    run_cells = [c for c in sub.nonempty_cells() if c not in set(y_cells)]
    bad = [c for c in run_cells if c[0] in blocked_columns]
    if bad:
        raise ValueError(f"non-Y cell {bad[0]} sits in a blocked column")
    columns = sorted({c[0] for c in run_cells})
    # runs are column *intervals* between blocked columns: an unblocked gap
    # (empty column) does not split a run, an edge may well cross it
    runs: list[list[int]] = []
    for col in columns:
        if runs and not any(runs[-1][-1] < b < col for b in blocked_columns):
            runs[-1].append(col)
        else:
            runs.append([col])
    steps: list[tuple[str, Cell]] = [(INTRODUCE, c) for c in y_cells]
    by_column: dict[int, list[Cell]] = {}
    for c in run_cells:
        by_column.setdefault(c[0], []).append(c)
    for run in runs:
        cells = sorted(c for col in run for c in by_column[col])
        rows = sorted({c[1] for c in cells})
        by_row: dict[int, list[Cell]] = {}
        for c in cells:
            by_row.setdefault(c[1], []).append(c)
        lo, hi = rows[0], rows[-1]
        for j in range(lo, hi + 1):
            if j - 3 >= lo:
                for c in by_row.get(j - 3, []):
                    steps.append((FORGET, c))
            for c in by_row.get(j, []):
                steps.append((INTRODUCE, c))
        for j in range(max(lo, hi - 2), hi + 1):
            for c in by_row.get(j, []):
                steps.append((FORGET, c))
    steps.extend((FORGET, c) for c in y_cells)
    ncpd = BakerNCPD(
        steps=tuple(steps),
        y_cells=tuple(y_cells),
        window_cell_bound=6 * sk,
        k=k,
    )
    return sub, old, ncpd


def verify_baker_ncpd(
    inst: CliqueGridInstance, ncpd: BakerNCPD
) -> tuple[bool, str | None]:
    """Path-decomposition conditions plus the per-bag cell bound."""
    seen_intro: set[Cell] = set()
    cur: set[Cell] = set()
    y = set(ncpd.y_cells)
    bags: list[frozenset[int]] = []
    nonempty = set(inst.nonempty_cells())
    for kind, cell in ncpd.steps:
        if cell not in nonempty:
            return False, f"step names unknown cell {cell}"
        if kind == INTRODUCE:
            if cell in seen_intro:
                return False, f"cell {cell} introduced twice"
            seen_intro.add(cell)
            cur.add(cell)
        elif kind == FORGET:
            if cell not in cur:
                return False, f"cell {cell} forgotten while absent"
            cur.discard(cell)
        else:
            return False, f"unknown step kind {kind!r}"
        if len(cur - y) > ncpd.window_cell_bound:
            return False, (
                f"bag holds {len(cur - y)} non-Y cells, bound {ncpd.window_cell_bound}"
            )
        bags.append(frozenset(v for c in cur for v in inst.vertices_in(c)))
    if cur:
        return False, "final bag is not empty"
    if seen_intro != nonempty:
        return False, "some nonempty cell is never introduced"
    edges = tuple((i, i + 1) for i in range(len(bags) - 1))
    return verify_tree_decomposition(inst.graph, TreeDecomposition(tuple(bags), edges))


# ---------------------------------------------------------------------------
# edge-annotated nice decompositions (shared machinery for the vertex DPs)


@dataclass(frozen=True)
class AnnotatedNiceTD:
    """Nice tree decomposition where each graph edge is attached to exactly
    one node whose bag contains both endpoints (the topmost such node)."""

    bags: tuple[frozenset[int], ...]
    children: tuple[tuple[int, ...], ...]
    kinds: tuple[str, ...]
    payload: tuple[int | None, ...]
    root: int
    edges_at: tuple[tuple[tuple[int, int], ...], ...]


def annotate_edges(g: SimpleGraph, nice: NiceTreeDecomposition) -> AnnotatedNiceTD:
    depth = [0] * len(nice.bags)
    order = [nice.root]
    for x in order:
        for y in nice.children[x]:
            depth[y] = depth[x] + 1
            order.append(y)
    edges_at: list[list[tuple[int, int]]] = [[] for _ in nice.bags]
    for u, v in g.edges():
        best, best_depth = -1, None
        for x in range(len(nice.bags)):
            bag = nice.bags[x]
            if u in bag and v in bag and (best_depth is None or depth[x] < best_depth):
                best, best_depth = x, depth[x]
        if best < 0:
            raise ValueError(f"edge ({u},{v}) not covered; invalid decomposition")
        edges_at[best].append((u, v))
    return AnnotatedNiceTD(
        bags=nice.bags,
        children=nice.children,
        kinds=nice.kinds,
        payload=nice.payload,
        root=nice.root,
        edges_at=tuple(tuple(sorted(e)) for e in edges_at),
    )


def annotated_from_cell_nctd(inst: CliqueGridInstance, nctd: CellNCTD) -> AnnotatedNiceTD:
    """Expand a cell-granular NCTD to vertex granularity and annotate edges."""
    builder = _NiceBuilder()

    def expand(x: int) -> int:
        kind = nctd.kinds[x]
        if kind == LEAF:
            return builder.add(frozenset(), LEAF, None, ())
        if kind == JOIN:
            left = expand(nctd.children[x][0])
            right = expand(nctd.children[x][1])
            bag = frozenset(nctd.vertex_bag(x, inst))
            return builder.add(bag, JOIN, None, (left, right))
        child = expand(nctd.children[x][0])
        cell = nctd.payload[x]
        members = nctd.vertex_bag(nctd.children[x][0], inst)
        node, bag = child, frozenset(members)
        if kind == INTRODUCE:
            for v in sorted(inst.vertices_in(cell)):
                if v not in bag:
                    bag = bag | {v}
                    node = builder.add(bag, INTRODUCE, v, (node,))
        else:
            for v in sorted(inst.vertices_in(cell)):
                if v in bag:
                    bag = bag - {v}
                    node = builder.add(bag, FORGET, v, (node,))
        return node

    root = expand(nctd.root)
    nice = NiceTreeDecomposition(
        bags=tuple(builder.bags),
        children=tuple(builder.children),
        kinds=tuple(builder.kinds),
        payload=tuple(builder.payload),
        root=root,
    )
    return annotate_edges(inst.graph, nice)


# ---------------------------------------------------------------------------
# PACE-2017 .td files


def write_td(path: Union[str, Path], td: TreeDecomposition, n_vertices: int) -> None:
    """Canonical .td serialization (1-indexed, sorted); bit-exact round trip."""
    lines = [f"s td {len(td.bags)} {td.width + 1} {n_vertices}"]
    for i, bag in enumerate(td.bags, start=1):
        lines.append(("b " + str(i) + " " + " ".join(str(v + 1) for v in sorted(bag))).rstrip())
    for a, b in sorted(tuple(sorted((x + 1, y + 1))) for x, y in td.edges):
        lines.append(f"{a} {b}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_td(path: Union[str, Path]) -> tuple[TreeDecomposition, int]:
    """Parse a .td file; returns the decomposition and declared vertex count."""
    bags: dict[int, frozenset[int]] = {}
    edges: list[tuple[int, int]] = []
    declared = None
    n_vertices = 0
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        fields = line.split()
        if fields[0] == "s":
            if len(fields) != 5 or fields[1] != "td":
                raise ValueError(f"{path}:{lineno}: malformed solution line")
            declared = (int(fields[2]), int(fields[3]))
            n_vertices = int(fields[4])
        elif fields[0] == "b":
            bid = int(fields[1])
            bags[bid] = frozenset(int(x) - 1 for x in fields[2:])
        else:
            if len(fields) != 2:
                raise ValueError(f"{path}:{lineno}: malformed edge line {raw!r}")
            edges.append((int(fields[0]) - 1, int(fields[1]) - 1))
    if declared is None:
        raise ValueError(f"{path}: missing solution line")
    nb = declared[0]
    if sorted(bags) != list(range(1, nb + 1)):
        raise ValueError(f"{path}: bag ids must be 1..{nb}")
    td = TreeDecomposition(tuple(bags[i] for i in range(1, nb + 1)), tuple(edges))
    if td.width + 1 != declared[1]:
        raise ValueError(f"{path}: declared width {declared[1]} != actual {td.width + 1}")
    return td, n_vertices
