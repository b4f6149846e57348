"""Brute-force reference solvers.

Everything here is deliberately independent of the production solvers: no
shared helper does any algorithmic work for both sides. Each oracle carries
an explicit budget and fails loudly (raises :class:`OracleBudgetExceeded`)
instead of silently degrading when an instance is too large.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .graphs import SimpleGraph


class OracleBudgetExceeded(RuntimeError):
    """An oracle hit its vertex/node budget; the answer is unknown."""


@dataclass(frozen=True)
class OracleBudget:
    """Limits for the brute-force solvers.

    max_component: largest connected component a bitmask DP will accept.
    max_nodes: explored-node allowance for the DFS-style searches.
    """

    max_component: int = 20
    max_nodes: int = 10_000_000


DEFAULT_BUDGET = OracleBudget()


class _NodeCounter:
    __slots__ = ("left",)

    def __init__(self, allowance: int) -> None:
        self.left = allowance

    def spend(self, amount: int = 1) -> None:
        self.left -= amount
        if self.left < 0:
            raise OracleBudgetExceeded("oracle search exceeded its node budget")


# ---------------------------------------------------------------------------
# exact k-cycle


def enumerate_exact_cycles(
    g: SimpleGraph, k: int, budget: OracleBudget = DEFAULT_BUDGET
) -> Iterator[tuple[int, ...]]:
    """Yield every cycle on exactly k vertices, once each.

    Canonical form: the tuple starts at the cycle's smallest vertex and its
    second entry is smaller than its last (fixing the direction).
    """
    if k < 3:
        raise ValueError("cycles need at least 3 vertices")
    counter = _NodeCounter(budget.max_nodes)
    path = [0] * k
    for s in range(g.n):
        path[0] = s
        on_path = {s}

        def dfs(depth: int) -> Iterator[tuple[int, ...]]:
            counter.spend()
            last = path[depth - 1]
            if depth == k:
                if g.has_edge(last, s) and path[1] < path[-1]:
                    yield tuple(path)
                return
            for u in g.adj(last):
                if u > s and u not in on_path:
                    path[depth] = u
                    on_path.add(u)
                    yield from dfs(depth + 1)
                    on_path.remove(u)

        yield from dfs(1)


def brute_exact_cycle(g: SimpleGraph, k: int, budget: OracleBudget = DEFAULT_BUDGET) -> bool:
    """True iff g contains a cycle on exactly k vertices."""
    for _ in enumerate_exact_cycles(g, k, budget):
        return True
    return False


def count_triangles_trace(g: SimpleGraph) -> int:
    """Number of triangles via trace(A^3)/6 — used to cross-check k=3."""
    if g.n == 0:
        return 0
    a = np.zeros((g.n, g.n), dtype=np.int64)
    for u, v in g.edges():
        a[u, v] = a[v, u] = 1
    return int(np.trace(a @ a @ a)) // 6


# ---------------------------------------------------------------------------
# longest path / longest cycle (component-wise Held-Karp bitmask DP)


def _component_subgraphs(g: SimpleGraph, budget: OracleBudget) -> Iterator[list[int]]:
    """Adjacency bitmasks per connected component, enforcing the size cap."""
    for comp in g.connected_components():
        if len(comp) > budget.max_component:
            raise OracleBudgetExceeded(
                f"component of {len(comp)} vertices exceeds the bitmask cap "
                f"of {budget.max_component}"
            )
        pos = {v: i for i, v in enumerate(comp)}
        adjm = [0] * len(comp)
        for v in comp:
            for u in g.adj(v):
                if u in pos:
                    adjm[pos[v]] |= 1 << pos[u]
        yield adjm


def brute_longest_path(g: SimpleGraph, budget: OracleBudget = DEFAULT_BUDGET) -> int:
    """Number of vertices on a longest simple path (0 for the empty graph)."""
    best = 0
    counter = _NodeCounter(budget.max_nodes)
    for adjm in _component_subgraphs(g, budget):
        c = len(adjm)
        best = max(best, 1)
        cur: dict[int, int] = {1 << v: 1 << v for v in range(c)}
        length = 1
        while cur:
            best = max(best, length)
            nxt: dict[int, int] = {}
            for mask, ends in cur.items():
                e = ends
                while e:
                    vbit = e & -e
                    e ^= vbit
                    cand = adjm[vbit.bit_length() - 1] & ~mask
                    while cand:
                        ubit = cand & -cand
                        cand ^= ubit
                        counter.spend()
                        key = mask | ubit
                        nxt[key] = nxt.get(key, 0) | ubit
            cur = nxt
            length += 1
    return best


def brute_longest_cycle(g: SimpleGraph, budget: OracleBudget = DEFAULT_BUDGET) -> int:
    """Number of vertices on a longest cycle (0 if the graph is acyclic).

    Paths are anchored at the smallest vertex of their support, so each
    cycle is examined from its minimum vertex only.
    """
    best = 0
    counter = _NodeCounter(budget.max_nodes)
    for adjm in _component_subgraphs(g, budget):
        c = len(adjm)
        cur: dict[int, int] = {}
        for s in range(c):
            cand = adjm[s] >> (s + 1) << (s + 1)
            while cand:
                vbit = cand & -cand
                cand ^= vbit
                cur[(1 << s) | vbit] = cur.get((1 << s) | vbit, 0) | vbit
        length = 2
        while cur:
            nxt: dict[int, int] = {}
            for mask, ends in cur.items():
                sbit = mask & -mask
                s = sbit.bit_length() - 1
                if length >= 3 and ends & adjm[s]:
                    best = max(best, length)
                e = ends
                while e:
                    vbit = e & -e
                    e ^= vbit
                    grow = adjm[vbit.bit_length() - 1] & ~mask
                    grow = grow >> (s + 1) << (s + 1)
                    while grow:
                        ubit = grow & -grow
                        grow ^= ubit
                        counter.spend()
                        key = mask | ubit
                        nxt[key] = nxt.get(key, 0) | ubit
            cur = nxt
            length += 1
    return best


# ---------------------------------------------------------------------------
# feedback vertex set


def _acyclic(g: SimpleGraph, removed: frozenset[int]) -> bool:
    parent = {v: v for v in range(g.n) if v not in removed}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in g.edges():
        if u in removed or v in removed:
            continue
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def brute_min_fvs(g: SimpleGraph, budget: OracleBudget = DEFAULT_BUDGET) -> int:
    """Exact minimum feedback vertex set size, by subset enumeration."""
    counter = _NodeCounter(budget.max_nodes)
    for size in range(g.n + 1):
        for combo in itertools.combinations(range(g.n), size):
            counter.spend()
            if _acyclic(g, frozenset(combo)):
                return size
    return g.n  # unreachable: removing everything is always acyclic


def brute_fvs(g: SimpleGraph, k: int, budget: OracleBudget = DEFAULT_BUDGET) -> bool:
    """True iff some set of at most k vertices meets every cycle."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    counter = _NodeCounter(budget.max_nodes)
    for size in range(min(k, g.n) + 1):
        for combo in itertools.combinations(range(g.n), size):
            counter.spend()
            if _acyclic(g, frozenset(combo)):
                return True
    return False


def fvs_branch_and_bound(g: SimpleGraph, budget: OracleBudget = DEFAULT_BUDGET) -> int:
    """Minimum FVS via branching on the vertices of a shortest-found cycle.

    Independent route used to cross-check :func:`brute_min_fvs`.
    """
    counter = _NodeCounter(budget.max_nodes)

    def find_cycle(removed: frozenset[int]) -> list[int] | None:
        color: dict[int, int] = {}
        parent: dict[int, int | None] = {}
        for root in range(g.n):
            if root in removed or root in color:
                continue
            stack: list[tuple[int, int | None]] = [(root, None)]
            parent[root] = None
            while stack:
                v, par = stack.pop()
                if v in color:
                    continue
                color[v] = 1
                parent[v] = par
                for u in g.adj(v):
                    if u in removed or u == par:
                        continue
                    if u in color:
                        # walk both endpoints up to their meeting point
                        seen = []
                        x: int | None = v
                        anc = set()
                        while x is not None:
                            anc.add(x)
                            x = parent[x]
                        x = u
                        while x not in anc:
                            seen.append(x)
                            x = parent[x]
                        cyc = [x]
                        y: int | None = v
                        while y != x:
                            cyc.append(y)
                            y = parent[y]
                        return cyc + seen
                    stack.append((u, v))
        return None

    best = [g.n]

    def rec(removed: frozenset[int], used: int) -> None:
        counter.spend()
        if used >= best[0]:
            return
        cyc = find_cycle(removed)
        if cyc is None:
            best[0] = used
            return
        for v in cyc:
            rec(removed | {v}, used + 1)

    rec(frozenset(), 0)
    return best[0]


# ---------------------------------------------------------------------------
# cycle packing


def enumerate_chordless_cycles(
    g: SimpleGraph, budget: OracleBudget = DEFAULT_BUDGET
) -> Iterator[tuple[int, ...]]:
    """Yield every chordless (induced) cycle once, canonically oriented."""
    counter = _NodeCounter(budget.max_nodes)
    for s in range(g.n):
        path = [s]
        on_path = {s}

        def dfs() -> Iterator[tuple[int, ...]]:
            counter.spend()
            last = path[-1]
            closing = len(path) >= 3 and g.has_edge(last, s)
            if closing:
                if path[1] < path[-1]:
                    yield tuple(path)
                return  # extending past a vertex adjacent to s leaves a chord
            for u in g.adj(last):
                if u <= s or u in on_path:
                    continue
                # chordless: u may touch the path only at its tip (and at s,
                # where the touch is the future closing edge — the `closing`
                # guard above stops any extension past such a vertex)
                if any(g.has_edge(u, w) for w in path[1:-1]):
                    continue
                path.append(u)
                on_path.add(u)
                yield from dfs()
                path.pop()
                on_path.remove(u)

        yield from dfs()


def enumerate_cycles(
    g: SimpleGraph, budget: OracleBudget = DEFAULT_BUDGET
) -> Iterator[tuple[int, ...]]:
    """Yield every simple cycle once (no chord restriction)."""
    counter = _NodeCounter(budget.max_nodes)
    for s in range(g.n):
        path = [s]
        on_path = {s}

        def dfs() -> Iterator[tuple[int, ...]]:
            counter.spend()
            last = path[-1]
            if len(path) >= 3 and g.has_edge(last, s) and path[1] < path[-1]:
                yield tuple(path)
            for u in g.adj(last):
                if u <= s or u in on_path:
                    continue
                path.append(u)
                on_path.add(u)
                yield from dfs()
                path.pop()
                on_path.remove(u)

        yield from dfs()


def _pack_disjoint(masks: list[int], k: int, counter: _NodeCounter) -> bool:
    masks = sorted(set(masks))

    def rec(idx: int, used: int, have: int) -> bool:
        if have == k:
            return True
        if len(masks) - idx < k - have:
            return False
        for i in range(idx, len(masks)):
            counter.spend()
            if masks[i] & used:
                continue
            if rec(i + 1, used | masks[i], have + 1):
                return True
        return False

    return rec(0, 0, 0)


def brute_cycle_packing(
    g: SimpleGraph, k: int, budget: OracleBudget = DEFAULT_BUDGET, *, induced_only: bool = True
) -> bool:
    """True iff g has k vertex-disjoint cycles.

    Enumerates chordless cycles by default (any cycle contains a chordless
    one on a subset of its vertices, so disjoint packings survive).
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return True
    counter = _NodeCounter(budget.max_nodes)
    source = enumerate_chordless_cycles if induced_only else enumerate_cycles
    masks = []
    for cyc in source(g, budget):
        m = 0
        for v in cyc:
            m |= 1 << v
        masks.append(m)
    return _pack_disjoint(masks, k, counter)


# ---------------------------------------------------------------------------
# treewidth


def brute_treewidth(g: SimpleGraph, budget: OracleBudget = DEFAULT_BUDGET) -> int:
    """Exact treewidth by DP over elimination sets (n <= 12)."""
    n = g.n
    if n > 12:
        raise OracleBudgetExceeded(f"treewidth oracle limited to 12 vertices, got {n}")
    if n == 0:
        return -1  # width of the empty decomposition
    adjm = [0] * n
    for u, v in g.edges():
        adjm[u] |= 1 << v
        adjm[v] |= 1 << u

    def back_degree(eliminated: int, v: int) -> int:
        """Vertices outside `eliminated`+v that v reaches through eliminated."""
        seen = 1 << v
        stack = [v]
        out = 0
        while stack:
            x = stack.pop()
            cand = adjm[x] & ~seen
            out |= cand & ~eliminated
            inner = cand & eliminated
            seen |= cand
            while inner:
                b = inner & -inner
                inner ^= b
                stack.append(b.bit_length() - 1)
        return bin(out).count("1")

    full = (1 << n) - 1
    tw = [n] * (1 << n)
    tw[0] = -1
    for mask in range(1, 1 << n):
        sub = mask
        best = n
        while sub:
            vbit = sub & -sub
            sub ^= vbit
            v = vbit.bit_length() - 1
            prev = mask ^ vbit
            cand = max(tw[prev], back_degree(prev, v))
            if cand < best:
                best = cand
        tw[mask] = best
    return tw[full]
