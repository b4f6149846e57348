"""Clique-grid instances: a graph plus a grid representation, and the
structural operations on them (backbones, cell graphs, contractions)."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence, Union

from .geometry import (
    GeometricModel,
    ModelLike,
    PointCloud,
    Representation,
    build_geometric_graph,
    compute_representation,
)
from .graphs import SimpleGraph

Cell = tuple[int, int]


@dataclass(frozen=True)
class CliqueGridInstance:
    """A graph together with a representation placing each vertex in a cell.

    The pairing is what every solver in this package works on; after
    contractions there may be no underlying point cloud anymore, so the
    instance is deliberately abstract.
    """

    graph: SimpleGraph
    rep: Representation
    _members: dict[Cell, tuple[int, ...]] = field(
        init=False, repr=False, compare=False, hash=False, default=None  # type: ignore[assignment]
    )

    @property
    def n(self) -> int:
        return self.graph.n

    def cell_of(self, v: int) -> Cell:
        return self.rep.cells[v]

    def cell_members(self) -> dict[Cell, tuple[int, ...]]:
        """Nonempty cells mapped to their (sorted) vertex lists. Cached."""
        if self._members is None:
            members: dict[Cell, list[int]] = {}
            for v, cell in enumerate(self.rep.cells):
                members.setdefault(cell, []).append(v)
            frozen = {c: tuple(vs) for c, vs in sorted(members.items())}
            object.__setattr__(self, "_members", frozen)
        return self._members

    def nonempty_cells(self) -> tuple[Cell, ...]:
        return tuple(self.cell_members())

    def vertices_in(self, cell: Cell) -> tuple[int, ...]:
        return self.cell_members().get(cell, ())

    def max_cell_size(self) -> int:
        members = self.cell_members()
        return max((len(vs) for vs in members.values()), default=0)

    def subinstance(self, keep: Sequence[int]) -> tuple["CliqueGridInstance", tuple[int, ...]]:
        """Induced sub-instance on ``keep``; cells are carried over as-is.

        Returns the instance and the new-index -> old-index map.
        """
        sub, old = self.graph.subgraph(keep)
        cells = tuple(self.rep.cells[o] for o in old)
        return (
            CliqueGridInstance(sub, Representation(cells, self.rep.t, self.rep.tp)),
            old,
        )


def instance_from_points(cloud: PointCloud, model: ModelLike) -> CliqueGridInstance:
    """Build the geometric graph and its representation in one go."""
    return CliqueGridInstance(
        build_geometric_graph(cloud, model), compute_representation(cloud, model)
    )


def as_instance(
    obj: Union[CliqueGridInstance, PointCloud], model: ModelLike = GeometricModel.DISK
) -> CliqueGridInstance:
    """Accept either a ready instance or a raw point cloud (built under ``model``)."""
    if isinstance(obj, CliqueGridInstance):
        return obj
    return instance_from_points(obj, model)


def _chebyshev(c: Cell, d: Cell) -> int:
    return max(abs(c[0] - d[0]), abs(c[1] - d[1]))


# ---------------------------------------------------------------------------
# minimal backbones


def minimal_backbone(inst: CliqueGridInstance) -> tuple[CliqueGridInstance, tuple[int, ...]]:
    """Smallest-by-deletion induced subgraph witnessing all cell adjacencies.

    A vertex set is a backbone if, for every pair of distinct cells joined by
    an edge of the full graph, the induced subgraph keeps at least one edge
    between that pair. Vertices are dropped greedily in ascending index
    order, so the result is deterministic and inclusion-minimal.

    Returns the restricted instance plus the kept old indices.
    """
    g, rep = inst.graph, inst.rep
    # per cross-cell pair: how many surviving edges witness it
    witness: dict[tuple[Cell, Cell], int] = {}
    for u, v in g.edges():
        cu, cv = rep.cells[u], rep.cells[v]
        if cu == cv:
            continue
        key = (cu, cv) if cu < cv else (cv, cu)
        witness[key] = witness.get(key, 0) + 1
    alive = [True] * g.n
    for v in range(g.n):
        cv = rep.cells[v]
        loss: dict[tuple[Cell, Cell], int] = {}
        for u in g.adj(v):
            if not alive[u]:
                continue
            cu = rep.cells[u]
            if cu == cv:
                continue
            key = (cu, cv) if cu < cv else (cv, cu)
            loss[key] = loss.get(key, 0) + 1
        if all(witness[key] > cnt for key, cnt in loss.items()):
            alive[v] = False
            for key, cnt in loss.items():
                witness[key] -= cnt
    kept = [v for v in range(g.n) if alive[v]]
    return inst.subinstance(kept)


def is_backbone(inst: CliqueGridInstance, vertices: Sequence[int]) -> bool:
    """Does the induced subgraph witness every cross-cell adjacency of G?"""
    g, rep = inst.graph, inst.rep
    required = set()
    for u, v in g.edges():
        cu, cv = rep.cells[u], rep.cells[v]
        if cu != cv:
            required.add((cu, cv) if cu < cv else (cv, cu))
    chosen = set(vertices)
    seen = set()
    for u, v in g.edges():
        if u in chosen and v in chosen:
            cu, cv = rep.cells[u], rep.cells[v]
            if cu != cv:
                seen.add((cu, cv) if cu < cv else (cv, cu))
    return required <= seen


# ---------------------------------------------------------------------------
# cell graphs


@dataclass(frozen=True)
class CellGraph:
    """One vertex per nonempty cell; edges join cells with a cross edge."""

    graph: SimpleGraph
    cells: tuple[Cell, ...]  # cell-vertex index -> cell coordinates

    def index_of(self, cell: Cell) -> int:
        return self.cells.index(cell)


def cell_graph(inst: CliqueGridInstance) -> CellGraph:
    cells = inst.nonempty_cells()
    pos = {c: i for i, c in enumerate(cells)}
    edges = set()
    for u, v in inst.graph.edges():
        cu, cv = inst.cell_of(u), inst.cell_of(v)
        if cu != cv:
            a, b = pos[cu], pos[cv]
            edges.add((min(a, b), max(a, b)))
    return CellGraph(SimpleGraph(len(cells), sorted(edges)), cells)


# ---------------------------------------------------------------------------
# contractions


def contractible_pairs(inst: CliqueGridInstance) -> Iterator[tuple[int, int]]:
    """Same-cell vertex pairs (u < v), in lexicographic order."""
    for _, members in inst.cell_members().items():
        for i, u in enumerate(members):
            for v in members[i + 1 :]:
                yield (u, v)


def first_contractible_pair(inst: CliqueGridInstance) -> tuple[int, int] | None:
    best: tuple[int, int] | None = None
    for pair in contractible_pairs(inst):
        if best is None or pair < best:
            best = pair
    return best


def contract_pair(
    inst: CliqueGridInstance, u: int, v: int
) -> tuple[CliqueGridInstance, tuple[int, ...]]:
    """Contract the same-cell (hence adjacent) pair {u, v}.

    The merged vertex keeps the smaller index and the shared cell. Returns
    the new instance and the old-index -> new-index map.
    """
    if u == v:
        raise ValueError("cannot contract a vertex with itself")
    lo, hi = min(u, v), max(u, v)
    if inst.cell_of(lo) != inst.cell_of(hi):
        raise ValueError(f"vertices {u} and {v} are not in the same cell")
    g = inst.graph
    remap = tuple(w if w < hi else (lo if w == hi else w - 1) for w in range(g.n))
    edges = set()
    for a, b in g.edges():
        na, nb = remap[a], remap[b]
        if na != nb:
            edges.add((min(na, nb), max(na, nb)))
    cells = tuple(inst.rep.cells[w] for w in range(g.n) if w != hi)
    new = CliqueGridInstance(
        SimpleGraph(g.n - 1, sorted(edges)),
        Representation(cells, inst.rep.t, inst.rep.tp),
    )
    return new, remap


# ---------------------------------------------------------------------------
# text format for representations


def write_representation(path: Union[str, Path], inst: CliqueGridInstance) -> None:
    """Write ``cells t t'`` header plus one 1-indexed ``vertex i j`` per line."""
    lines = [f"cells {inst.rep.t} {inst.rep.tp}"]
    lines.extend(f"vertex {a} {b}" for a, b in inst.rep.cells)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_representation(path: Union[str, Path]) -> Representation:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    body = [ln.strip() for ln in text if ln.strip() and not ln.startswith("#")]
    if not body or not body[0].startswith("cells "):
        raise ValueError(f"{path}: missing 'cells t t'' header")
    _, t, tp = body[0].split()
    cells = []
    for ln in body[1:]:
        fields = ln.split()
        if len(fields) != 3 or fields[0] != "vertex":
            raise ValueError(f"{path}: malformed line {ln!r}")
        cells.append((int(fields[1]), int(fields[2])))
    return Representation(tuple(cells), int(t), int(tp))
