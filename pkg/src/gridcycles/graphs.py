"""Small immutable undirected graph type shared across the package."""
from __future__ import annotations

from typing import Iterable, Iterator, Sequence


class SimpleGraph:
    """Undirected simple graph on vertices ``0..n-1``.

    Immutable once built. Adjacency is kept as sorted tuples for
    deterministic iteration and as frozensets for O(1) membership tests.
    """

    __slots__ = ("n", "_adj", "_nbr", "_m")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()) -> None:
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            adj[u].add(v)
            adj[v].add(u)
        self.n = n
        self._adj: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in adj)
        self._nbr: tuple[frozenset[int], ...] = tuple(frozenset(s) for s in adj)
        self._m = sum(len(s) for s in adj) // 2

    @property
    def m(self) -> int:
        return self._m

    def adj(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def neighbors(self, v: int) -> frozenset[int]:
        return self._nbr[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._nbr[u]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield each edge once as (u, v) with u < v, in sorted order."""
        for u in range(self.n):
            for v in self._adj[u]:
                if u < v:
                    yield (u, v)

    def vertices(self) -> range:
        return range(self.n)

    def subgraph(self, keep: Sequence[int]) -> tuple["SimpleGraph", tuple[int, ...]]:
        """Induced subgraph on ``keep`` (old indices, deduplicated, sorted).

        Returns the new graph and the tuple mapping new index -> old index.
        """
        old = tuple(sorted(set(keep)))
        pos = {o: i for i, o in enumerate(old)}
        edges = [
            (pos[u], pos[v])
            for u in old
            for v in self._adj[u]
            if u < v and v in pos
        ]
        return SimpleGraph(len(old), edges), old

    def connected_components(self) -> list[list[int]]:
        """Components as sorted vertex lists, ordered by smallest member."""
        seen = [False] * self.n
        comps: list[list[int]] = []
        for s in range(self.n):
            if seen[s]:
                continue
            stack, comp = [s], []
            seen[s] = True
            while stack:
                u = stack.pop()
                comp.append(u)
                for w in self._adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def two_core(self) -> tuple[int, ...]:
        """Vertices of the 2-core (repeatedly shave degree <= 1 vertices)."""
        deg = [self.degree(v) for v in range(self.n)]
        dead = [False] * self.n
        queue = [v for v in range(self.n) if deg[v] <= 1]
        while queue:
            u = queue.pop()
            if dead[u]:
                continue
            dead[u] = True
            for w in self._adj[u]:
                if not dead[w]:
                    deg[w] -= 1
                    if deg[w] <= 1:
                        queue.append(w)
        return tuple(v for v in range(self.n) if not dead[v])

    def biconnected_components(self) -> tuple[tuple[int, ...], ...]:
        """Vertex sets of the biconnected components (blocks), sorted.

        Every edge lies in exactly one block and two blocks share at most
        one vertex, so the vertex set of a block induces exactly that block.
        Isolated vertices yield no block; a bridge yields a 2-vertex block.
        """
        disc = [-1] * self.n
        low = [0] * self.n
        blocks: list[tuple[int, ...]] = []
        counter = 0
        for root in range(self.n):
            if disc[root] != -1:
                continue
            edge_stack: list[tuple[int, int]] = []
            # (vertex, parent, iterator over sorted neighbours)
            stack = [(root, -1, iter(sorted(self._adj[root])))]
            disc[root] = low[root] = counter
            counter += 1
            while stack:
                v, parent, it = stack[-1]
                advanced = False
                for w in it:
                    if disc[w] == -1:
                        edge_stack.append((v, w))
                        disc[w] = low[w] = counter
                        counter += 1
                        stack.append((w, v, iter(sorted(self._adj[w]))))
                        advanced = True
                        break
                    if w != parent and disc[w] < disc[v]:
                        edge_stack.append((v, w))
                        low[v] = min(low[v], disc[w])
                if advanced:
                    continue
                stack.pop()
                if not stack:
                    continue
                u = stack[-1][0]
                low[u] = min(low[u], low[v])
                if low[v] >= disc[u]:
                    verts: set[int] = set()
                    while edge_stack:
                        a, b = edge_stack.pop()
                        verts.update((a, b))
                        if (a, b) == (u, v):
                            break
                    if verts:
                        blocks.append(tuple(sorted(verts)))
        return tuple(sorted(blocks))

    def edge_set(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset(e) for e in self.edges())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimpleGraph):
            return NotImplemented
        return self.n == other.n and self._adj == other._adj

    def __hash__(self) -> int:
        return hash((self.n, self._adj))

    def __repr__(self) -> str:
        return f"SimpleGraph(n={self.n}, m={self._m})"
