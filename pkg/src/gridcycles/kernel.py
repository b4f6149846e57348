"""Turing kernelization: shortcuts plus a family of bounded windows whose
disjunction is equivalent to the original question."""
from __future__ import annotations

from dataclasses import dataclass

from .cliquegrid import Cell, CliqueGridInstance
from .geometry import Representation
from .graphs import SimpleGraph

PATTERN = "pattern"  # occurrence of a connected pattern on <= k vertices
LONGEST_CYCLE = "longest-cycle"


@dataclass(frozen=True)
class KernelWindow:
    """A 2k x 2k block of cells, re-indexed to its own little grid."""

    origin: Cell
    instance: CliqueGridInstance
    old_vertices: tuple[int, ...]  # window index -> original index


@dataclass(frozen=True)
class KernelOutput:
    """Either a shortcut YES or a disjunction of windows.

    ``shortcut`` is None when windows carry the answer; otherwise it names
    the reason ("clique-cell": some cell already holds k vertices;
    "stretched": a cycle spans 2k cells in one axis, so it has >= 2k >= k
    vertices — longest-cycle only).
    """

    k: int
    problem: str
    shortcut: str | None
    shortcut_detail: tuple | None
    windows: tuple[KernelWindow, ...]

    @property
    def is_yes_shortcut(self) -> bool:
        return self.shortcut is not None


def large_clique_cell(inst: CliqueGridInstance, threshold: int) -> Cell | None:
    """First cell (in sorted order) holding at least ``threshold`` vertices."""
    for cell, members in inst.cell_members().items():
        if len(members) >= threshold:
            return cell
    return None


def _two_internally_disjoint_paths(g: SimpleGraph, s: int, t: int) -> bool:
    """Menger via unit-capacity flow on a vertex-split digraph.

    Internal vertices become in->out arcs of capacity 1; BFS augmentation
    scans arcs in ascending node order, so the outcome is deterministic.
    """
    # node ids: 2v = v_in, 2v+1 = v_out; s and t are not split
    src, snk = 2 * s + 1, 2 * t
    cap: dict[tuple[int, int], int] = {}

    def add(a: int, b: int, c: int) -> None:
        cap[(a, b)] = cap.get((a, b), 0) + c
        cap.setdefault((b, a), 0)

    for v in range(g.n):
        if v != s and v != t:
            add(2 * v, 2 * v + 1, 1)
    for u, v in g.edges():
        add(2 * u + 1, 2 * v, 1)
        add(2 * v + 1, 2 * u, 1)
    out: dict[int, list[int]] = {}
    for (a, b) in cap:
        out.setdefault(a, []).append(b)
    for a in out:
        out[a].sort()

    flow = 0
    while flow < 2:
        parent: dict[int, tuple[int, int]] = {}
        queue = [src]
        seen = {src}
        found = False
        while queue and not found:
            a = queue.pop(0)
            for b in out.get(a, ()):
                if b not in seen and cap[(a, b)] > 0:
                    seen.add(b)
                    parent[b] = (a, b)
                    if b == snk:
                        found = True
                        break
                    queue.append(b)
        if not found:
            return False
        b = snk
        while b != src:
            a, b2 = parent[b]
            cap[(a, b2)] -= 1
            cap[(b2, a)] += 1
            b = a
        flow += 1
    return True


def detect_stretched(inst: CliqueGridInstance, k: int) -> tuple[int, int] | None:
    """A vertex pair 2k cells apart in one axis lying on a common cycle.

    Two vertices lie on a common cycle iff they are joined by two
    internally vertex-disjoint paths. Returns the first such pair in
    ascending order, or None.
    """
    rep = inst.rep
    if rep.t < 2 * k + 1 and rep.tp < 2 * k + 1:
        return None  # no pair can be 2k cells apart
    for u in range(inst.n):
        au, bu = rep.cells[u]
        for v in range(u + 1, inst.n):
            av, bv = rep.cells[v]
            if abs(au - av) >= 2 * k or abs(bu - bv) >= 2 * k:
                if _two_internally_disjoint_paths(inst.graph, u, v):
                    return (u, v)
    return None


def _window(inst: CliqueGridInstance, p: int, q: int, k: int) -> KernelWindow | None:
    rep = inst.rep
    hi_a = min(p + 2 * k, rep.t + 1)
    hi_b = min(q + 2 * k, rep.tp + 1)
    keep = [
        v
        for v in range(inst.n)
        if p <= rep.cells[v][0] < hi_a and q <= rep.cells[v][1] < hi_b
    ]
    if not keep:
        return None
    sub, old = inst.subinstance(keep)
    cells = tuple((a - p + 1, b - q + 1) for a, b in sub.rep.cells)
    shifted = CliqueGridInstance(
        sub.graph, Representation(cells, hi_a - p, hi_b - q)
    )
    return KernelWindow(origin=(p, q), instance=shifted, old_vertices=old)


def turing_kernel(inst: CliqueGridInstance, k: int, problem: str = PATTERN) -> KernelOutput:
    """Shortcut, or windows of at most 2k x 2k cells covering every placement.

    The disjunction contract: the original instance is YES iff the shortcut
    fires or some window is YES. For connected patterns on at most k
    vertices this holds because an occurrence spans fewer than 2k cells per
    axis (each edge moves at most 2 cells). For longest cycle the stretched
    check first disposes of cycles that do span 2k cells.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if problem not in (PATTERN, LONGEST_CYCLE):
        raise ValueError(f"unknown kernel problem {problem!r}")
    cell = large_clique_cell(inst, k)
    if cell is not None:
        return KernelOutput(k, problem, "clique-cell", (cell,), ())
    if problem == LONGEST_CYCLE:
        pair = detect_stretched(inst, k)
        if pair is not None:
            return KernelOutput(k, problem, "stretched", pair, ())
    windows: list[KernelWindow] = []
    seen: set[frozenset[int]] = set()
    for p in range(1, inst.rep.t + 1):
        for q in range(1, inst.rep.tp + 1):
            win = _window(inst, p, q, k)
            if win is None:
                continue
            key = frozenset(win.old_vertices)
            if key in seen:
                continue
            seen.add(key)
            windows.append(win)
    return KernelOutput(k, problem, None, None, tuple(windows))
