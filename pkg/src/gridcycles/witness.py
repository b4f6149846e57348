"""Solution witnesses and their verification against the original graph."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .graphs import SimpleGraph

PROBLEMS = ("exact-cycle", "longest-path", "longest-cycle", "fvs", "cycle-packing")

CYCLE, PATH, VERTEX_SET, CYCLE_FAMILY = "cycle", "path", "vertex-set", "cycle-family"


@dataclass(frozen=True)
class Witness:
    """A certificate for a YES answer.

    kind "cycle"/"path": ``vertices`` is one ordered tuple. kind
    "vertex-set": an unordered solution set. kind "cycle-family": a tuple of
    ordered cycle tuples.
    """

    kind: str
    vertices: tuple

    @staticmethod
    def cycle(vs: Sequence[int]) -> "Witness":
        return Witness(CYCLE, tuple(vs))

    @staticmethod
    def path(vs: Sequence[int]) -> "Witness":
        return Witness(PATH, tuple(vs))

    @staticmethod
    def vertex_set(vs: Sequence[int]) -> "Witness":
        return Witness(VERTEX_SET, tuple(sorted(vs)))

    @staticmethod
    def cycle_family(cycles: Sequence[Sequence[int]]) -> "Witness":
        return Witness(CYCLE_FAMILY, tuple(tuple(c) for c in cycles))

    def relabel(self, mapping: Sequence[int]) -> "Witness":
        """Push the witness through a new-index -> old-index map."""
        if self.kind == CYCLE_FAMILY:
            return Witness(self.kind, tuple(tuple(mapping[v] for v in c) for c in self.vertices))
        return Witness(self.kind, tuple(mapping[v] for v in self.vertices))


def _is_cycle(g: SimpleGraph, vs: tuple) -> bool:
    if len(vs) < 3 or len(set(vs)) != len(vs):
        return False
    return all(g.has_edge(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs)))


def _is_path(g: SimpleGraph, vs: tuple) -> bool:
    if len(vs) == 0 or len(set(vs)) != len(vs):
        return False
    return all(g.has_edge(vs[i], vs[i + 1]) for i in range(len(vs) - 1))


def _acyclic_without(g: SimpleGraph, removed: set) -> bool:
    parent = {v: v for v in range(g.n) if v not in removed}

    def find(x):
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


def verify_witness(g: SimpleGraph, witness: Witness, problem: str, k: int) -> bool:
    """Does the witness certify a YES answer of ``problem`` with parameter k?"""
    if problem == "exact-cycle":
        return witness.kind == CYCLE and len(witness.vertices) == k and _is_cycle(g, witness.vertices)
    if problem == "longest-path":
        return witness.kind == PATH and len(witness.vertices) >= k and _is_path(g, witness.vertices)
    if problem == "longest-cycle":
        return witness.kind == CYCLE and len(witness.vertices) >= k and _is_cycle(g, witness.vertices)
    if problem == "fvs":
        return (
            witness.kind == VERTEX_SET
            and len(set(witness.vertices)) <= k
            and all(0 <= v < g.n for v in witness.vertices)
            and _acyclic_without(g, set(witness.vertices))
        )
    if problem == "cycle-packing":
        if witness.kind != CYCLE_FAMILY or len(witness.vertices) < k:
            return False
        seen: set[int] = set()
        for cyc in witness.vertices:
            if not _is_cycle(g, cyc) or seen & set(cyc):
                return False
            seen.update(cyc)
        return True
    raise ValueError(f"unknown problem {problem!r}")
