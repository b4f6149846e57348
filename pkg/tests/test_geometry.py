"""Geometric graph construction and representation properties."""
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridcycles.geometry import (
    GeometricModel,
    PointCloud,
    build_geometric_graph,
    compute_representation,
    read_gr,
    read_point_file,
    verify_representation,
    write_gr,
    write_point_file,
)
from gridcycles.graphs import SimpleGraph

coords = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)
clouds = st.lists(st.tuples(coords, coords), min_size=1, max_size=40).map(PointCloud.of)
models = st.sampled_from([GeometricModel.DISK, GeometricModel.SQUARE])


def test_disk_adjacency_boundary_inclusive():
    g = build_geometric_graph(PointCloud.of([(0, 0), (2, 0)]), "disk")
    assert g.has_edge(0, 1)
    g = build_geometric_graph(PointCloud.of([(0, 0), (2.0000001, 0)]), "disk")
    assert not g.has_edge(0, 1)
    # distance exactly 2 along a diagonal
    d = 2 / math.sqrt(2)
    g = build_geometric_graph(PointCloud.of([(0, 0), (d, d)]), "disk")
    assert g.has_edge(0, 1)


def test_square_adjacency_boundary_inclusive():
    g = build_geometric_graph(PointCloud.of([(0, 0), (1, 1)]), "square")
    assert g.has_edge(0, 1)
    g = build_geometric_graph(PointCloud.of([(0, 0), (1.0000001, 1)]), "square")
    assert not g.has_edge(0, 1)
    # square model is an L-infinity ball: x-distance alone can block
    g = build_geometric_graph(PointCloud.of([(0, 0), (1.5, 0.2)]), "square")
    assert not g.has_edge(0, 1)


def test_models_differ_on_the_corner_gap():
    # distance sqrt(2) < 2 but Chebyshev distance > 1
    cloud = PointCloud.of([(0, 0), (1.01, 1.01)])
    assert build_geometric_graph(cloud, "disk").has_edge(0, 1)
    assert not build_geometric_graph(cloud, "square").has_edge(0, 1)


def test_representation_degenerate_single_point():
    rep = compute_representation(PointCloud.of([(3.7, -2.5)]), "disk")
    assert rep.t == 1 and rep.tp == 1
    assert rep.cells == ((1, 1),)


def test_representation_exact_pitch_spread_bumps_extent():
    # x-spread exactly one pitch: the extreme point needs a second cell
    pitch = math.sqrt(2)
    rep = compute_representation(PointCloud.of([(0, 0), (pitch, 0)]), "disk")
    assert rep.t == 2
    assert rep.cells[0][0] == 1 and rep.cells[1][0] == 2
    rep = compute_representation(PointCloud.of([(0, 0), (1.0, 0)]), "square")
    assert rep.t == 2


def test_representation_cells_are_1_indexed_and_in_range():
    rnd = random.Random(0)
    cloud = PointCloud.of([(rnd.uniform(0, 30), rnd.uniform(0, 30)) for _ in range(60)])
    for model in ("disk", "square"):
        rep = compute_representation(cloud, model)
        for a, b in rep.cells:
            assert 1 <= a <= rep.t and 1 <= b <= rep.tp


@settings(max_examples=120, deadline=None)
@given(clouds, models)
def test_representation_is_always_valid(cloud, model):
    g = build_geometric_graph(cloud, model)
    rep = compute_representation(cloud, model)
    ok, msg = verify_representation(g, rep)
    assert ok, msg


@settings(max_examples=60, deadline=None)
@given(clouds)
def test_clique_cells_by_construction(cloud):
    # same cell implies distance <= 2 (disk): cells have diagonal exactly 2
    rep = compute_representation(cloud, "disk")
    for i in range(len(cloud)):
        for j in range(i + 1, len(cloud)):
            if rep.cells[i] == rep.cells[j]:
                (x1, y1), (x2, y2) = cloud.points[i], cloud.points[j]
                assert (x1 - x2) ** 2 + (y1 - y2) ** 2 <= 4.0 + 1e-9


def test_verify_rejects_broken_representations():
    cloud = PointCloud.of([(0, 0), (0.5, 0), (10, 10)])
    g = build_geometric_graph(cloud, "disk")
    rep = compute_representation(cloud, "disk")
    # claim the far point shares a cell with vertex 0: clique condition breaks
    from gridcycles.geometry import Representation

    broken = Representation((rep.cells[0], rep.cells[1], rep.cells[0]), rep.t, rep.tp)
    ok, msg = verify_representation(g, broken)
    assert not ok and "not adjacent" in msg
    # claim adjacent vertices are far apart in the grid: locality breaks
    wide = Representation(((1, 1), (5, 5), (9, 9)), 9, 9)
    ok, msg = verify_representation(g, wide)
    assert not ok


def test_point_file_round_trip(tmp_path):
    cloud = PointCloud.of([(0.1, -2.5), (3e-7, 12.125), (7, 0)])
    p = tmp_path / "pts.txt"
    write_point_file(p, cloud, comment="three points")
    back = read_point_file(p)
    assert back == cloud


def test_point_file_rejects_garbage(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("1.0 2.0\n3.0\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_point_file(p)


def test_gr_round_trip(tmp_path):
    g = SimpleGraph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])
    p = tmp_path / "g.gr"
    write_gr(p, g)
    assert read_gr(p) == g
    assert p.read_text().splitlines()[0] == "p tw 5 5"
