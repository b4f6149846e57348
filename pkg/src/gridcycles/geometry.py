"""Point clouds, geometric graphs, and their grid representations.

Two geometric models are supported: in the *disk* model two points are
adjacent iff their Euclidean distance is at most 2 (unit radius disks
intersect), in the *square* model iff they differ by at most 1 in both
coordinates (axis-parallel unit squares intersect). Boundary contact counts
as intersection in both models.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .graphs import SimpleGraph


class GeometricModel(str, Enum):
    DISK = "disk"
    SQUARE = "square"


ModelLike = Union[GeometricModel, str]


def _as_model(model: ModelLike) -> GeometricModel:
    return GeometricModel(model)


@dataclass(frozen=True)
class PointCloud:
    """A finite set of labelled points in the plane (vertex i = points[i])."""

    points: tuple[tuple[float, float], ...]

    def __len__(self) -> int:
        return len(self.points)

    @staticmethod
    def of(pairs: Iterable[tuple[float, float]]) -> "PointCloud":
        return PointCloud(tuple((float(x), float(y)) for x, y in pairs))


@dataclass(frozen=True)
class Representation:
    """Cell assignment ``f(v) = (a, b)`` with 1-indexed cells on a t x t' grid."""

    cells: tuple[tuple[int, int], ...]
    t: int
    tp: int

    def cell_of(self, v: int) -> tuple[int, int]:
        return self.cells[v]

    def __len__(self) -> int:
        return len(self.cells)


def read_point_file(path: Union[str, Path]) -> PointCloud:
    """Parse a UTF-8 point file: one ``x y`` pair per line, ``#`` comments."""
    pts: list[tuple[float, float]] = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'x y', got {raw!r}")
        try:
            x, y = float(fields[0]), float(fields[1])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: bad coordinate in {raw!r}") from exc
        pts.append((x, y))
    return PointCloud(tuple(pts))


def write_point_file(path: Union[str, Path], cloud: PointCloud, comment: str | None = None) -> None:
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.extend(f"{x!r} {y!r}" for x, y in cloud.points)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _pair_mask(cloud: PointCloud, model: GeometricModel) -> np.ndarray:
    pts = np.asarray(cloud.points, dtype=float).reshape(len(cloud), 2)
    dx = pts[:, 0][:, None] - pts[:, 0][None, :]
    dy = pts[:, 1][:, None] - pts[:, 1][None, :]
    if model is GeometricModel.DISK:
        mask = dx * dx + dy * dy <= 4.0
    else:
        mask = (np.abs(dx) <= 1.0) & (np.abs(dy) <= 1.0)
    np.fill_diagonal(mask, False)
    return mask


def build_geometric_graph(cloud: PointCloud, model: ModelLike) -> SimpleGraph:
    """Intersection graph of the cloud under the given model."""
    model = _as_model(model)
    n = len(cloud)
    if n == 0:
        return SimpleGraph(0)
    mask = _pair_mask(cloud, model)
    iu, iv = np.nonzero(np.triu(mask, 1))
    return SimpleGraph(n, zip(iu.tolist(), iv.tolist()))


def _axis_cells(coords: np.ndarray, pitch: float) -> tuple[np.ndarray, int]:
    """1-indexed cell indices along one axis plus the grid extent."""
    lo = float(coords.min())
    hi = float(coords.max())
    idx = np.floor((coords - lo) / pitch + 1.0).astype(int)
    that = (hi - lo) / pitch
    if that == math.ceil(that):
        extent = int(that) + 1
    else:
        extent = math.ceil(that)
    return idx, extent


def compute_representation(cloud: PointCloud, model: ModelLike) -> Representation:
    """Grid representation of the cloud's geometric graph.

    Cells have side sqrt(2) in the disk model (so the diagonal is 2 and each
    cell induces a clique) and side 1 in the square model. The grid extent is
    bumped by one when the spread divides the pitch exactly, so the extreme
    point still lands inside the grid.
    """
    model = _as_model(model)
    if len(cloud) == 0:
        raise ValueError("cannot build a representation of an empty cloud")
    pitch = math.sqrt(2.0) if model is GeometricModel.DISK else 1.0
    pts = np.asarray(cloud.points, dtype=float).reshape(len(cloud), 2)
    a, t = _axis_cells(pts[:, 0], pitch)
    b, tp = _axis_cells(pts[:, 1], pitch)
    if not (1 <= a.min() and a.max() <= t and 1 <= b.min() and b.max() <= tp):
        raise AssertionError("cell indices escaped the computed grid")
    cells = tuple(zip(a.tolist(), b.tolist()))
    return Representation(cells=cells, t=t, tp=tp)


def verify_representation(g: SimpleGraph, rep: Representation) -> tuple[bool, str | None]:
    """Exhaustively check both representation conditions over all pairs.

    Condition 1: every cell induces a clique. Condition 2: every edge spans
    at most 2 cells in each axis. Returns (ok, reason-if-not).
    """
    n = g.n
    if len(rep) != n:
        return False, f"representation covers {len(rep)} vertices, graph has {n}"
    if n == 0:
        return True, None
    ab = np.asarray(rep.cells, dtype=int).reshape(n, 2)
    a, b = ab[:, 0], ab[:, 1]
    if a.min() < 1 or a.max() > rep.t or b.min() < 1 or b.max() > rep.tp:
        return False, "cell index outside the declared grid"
    adj = np.zeros((n, n), dtype=bool)
    for u, v in g.edges():
        adj[u, v] = adj[v, u] = True
    same_cell = (a[:, None] == a[None, :]) & (b[:, None] == b[None, :])
    np.fill_diagonal(same_cell, False)
    missing = same_cell & ~adj
    if missing.any():
        u, v = map(int, np.argwhere(missing)[0])
        return False, f"vertices {u} and {v} share cell {rep.cell_of(u)} but are not adjacent"
    da = np.abs(a[:, None] - a[None, :])
    db = np.abs(b[:, None] - b[None, :])
    far = adj & ((da > 2) | (db > 2))
    if far.any():
        u, v = map(int, np.argwhere(far)[0])
        return False, (
            f"edge ({u},{v}) spans cells {rep.cell_of(u)} and {rep.cell_of(v)}"
        )
    return True, None


def write_gr(path: Union[str, Path], g: SimpleGraph, comment: str | None = None) -> None:
    """Write a graph in PACE-2017 .gr format (1-indexed vertices)."""
    lines = []
    if comment:
        lines.extend(f"c {c}" for c in comment.splitlines())
    lines.append(f"p tw {g.n} {g.m}")
    lines.extend(f"{u + 1} {v + 1}" for u, v in g.edges())
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_gr(path: Union[str, Path]) -> SimpleGraph:
    """Read a PACE-2017 .gr file."""
    n = -1
    declared_m = 0
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        fields = line.split()
        if fields[0] == "p":
            if len(fields) != 4 or fields[1] != "tw":
                raise ValueError(f"{path}:{lineno}: malformed problem line {raw!r}")
            n, declared_m = int(fields[2]), int(fields[3])
        else:
            if n < 0:
                raise ValueError(f"{path}:{lineno}: edge before problem line")
            if len(fields) != 2:
                raise ValueError(f"{path}:{lineno}: malformed edge line {raw!r}")
            u, v = int(fields[0]) - 1, int(fields[1]) - 1
            edges.append((u, v))
    if n < 0:
        raise ValueError(f"{path}: missing problem line")
    if len(edges) != declared_m:
        raise ValueError(f"{path}: declared {declared_m} edges, found {len(edges)}")
    return SimpleGraph(n, edges)
