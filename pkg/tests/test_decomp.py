"""Treewidth search, nicification, cell decompositions, .td files."""
import itertools
import math
import random

import pytest

from gridcycles.cliquegrid import instance_from_points
from gridcycles.decomp import (
    SearchBudgetExceeded,
    TreeDecomposition,
    WidthExceeded,
    annotate_edges,
    annotated_from_cell_nctd,
    build_baker_ncpd,
    build_cell_nctd,
    exact_treewidth,
    make_nice,
    read_td,
    verify_baker_ncpd,
    verify_cell_nctd,
    verify_nice_decomposition,
    verify_tree_decomposition,
    write_td,
)
from gridcycles.geometry import PointCloud
from gridcycles.graphs import SimpleGraph
from gridcycles.oracle import brute_treewidth


def random_graph(rnd, n, p):
    return SimpleGraph(
        n, [(i, j) for i in range(n) for j in range(i + 1, n) if rnd.random() < p]
    )


def grid_graph(rows, cols):
    idx = lambda r, c: r * cols + c
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((idx(r, c), idx(r, c + 1)))
            if r + 1 < rows:
                edges.append((idx(r, c), idx(r + 1, c)))
    return SimpleGraph(rows * cols, edges)


def random_instance(seed, n=24, box=10.0):
    rnd = random.Random(seed)
    pts = PointCloud.of([(rnd.uniform(0, box), rnd.uniform(0, box)) for _ in range(n)])
    return instance_from_points(pts, "disk")


# ---------------------------------------------------------------------------
# exact treewidth


def test_treewidth_known_values():
    assert exact_treewidth(SimpleGraph(5, [(i, i + 1) for i in range(4)])).width == 1
    assert exact_treewidth(SimpleGraph(5, [(0, 1), (0, 2), (1, 3), (1, 4)])).width == 1
    assert exact_treewidth(grid_graph(3, 3)).width == 3
    k5 = SimpleGraph(5, [(i, j) for i in range(5) for j in range(i + 1, 5)])
    assert exact_treewidth(k5).width == 4
    assert exact_treewidth(SimpleGraph(6, [(i, (i + 1) % 6) for i in range(6)])).width == 2


def test_treewidth_matches_oracle_on_random_graphs():
    rnd = random.Random(5)
    for _ in range(60):
        g = random_graph(rnd, rnd.randint(1, 9), 0.4)
        res = exact_treewidth(g)
        assert res.exact
        ok, msg = verify_tree_decomposition(g, res.td)
        assert ok, msg
        assert res.width == brute_treewidth(g)


def test_width_exceeded_via_lower_bound_and_via_search():
    k5 = SimpleGraph(5, [(i, j) for i in range(5) for j in range(i + 1, 5)])
    with pytest.raises(WidthExceeded):
        exact_treewidth(k5, cap=3)  # MMD bound kills it instantly
    with pytest.raises(WidthExceeded):
        exact_treewidth(grid_graph(3, 3), cap=2)  # needs the exhaustive search


def test_search_budget_signal_is_distinct():
    g = grid_graph(4, 4)
    with pytest.raises(SearchBudgetExceeded):
        exact_treewidth(g, cap=3, node_budget=1)


def test_best_effort_mode_returns_valid_decomposition_under_tiny_budget():
    g = grid_graph(4, 4)
    res = exact_treewidth(g, node_budget=1)
    ok, msg = verify_tree_decomposition(g, res.td)
    assert ok, msg
    assert not res.exact or res.width == 4


def test_capped_success_returns_decomposition_within_cap():
    g = grid_graph(3, 3)
    res = exact_treewidth(g, cap=3)
    assert res.width <= 3
    ok, _ = verify_tree_decomposition(g, res.td)
    assert ok


# ---------------------------------------------------------------------------
# nicification


def test_make_nice_preserves_width_and_validates():
    rnd = random.Random(17)
    for _ in range(40):
        g = random_graph(rnd, rnd.randint(1, 10), 0.35)
        res = exact_treewidth(g)
        nice = make_nice(res.td)
        ok, msg = verify_nice_decomposition(g, nice)
        assert ok, msg
        assert nice.width == res.width


def test_verify_nice_rejects_nonempty_root():
    g = SimpleGraph(2, [(0, 1)])
    nice = make_nice(exact_treewidth(g).td)
    hacked = nice.__class__(
        bags=tuple(frozenset({0}) if i == nice.root else b for i, b in enumerate(nice.bags)),
        children=nice.children,
        kinds=nice.kinds,
        payload=nice.payload,
        root=nice.root,
    )
    ok, msg = verify_nice_decomposition(g, hacked)
    assert not ok


def test_edge_annotation_covers_each_edge_once():
    rnd = random.Random(23)
    for _ in range(30):
        g = random_graph(rnd, rnd.randint(2, 10), 0.5)
        ann = annotate_edges(g, make_nice(exact_treewidth(g).td))
        scheduled = sorted(e for es in ann.edges_at for e in es)
        assert scheduled == sorted(g.edges())
        for x, es in enumerate(ann.edges_at):
            for u, v in es:
                assert u in ann.bags[x] and v in ann.bags[x]


# ---------------------------------------------------------------------------
# cell-granular decompositions


def test_cell_nctd_is_valid_and_cell_bounded():
    for seed in range(12):
        inst = random_instance(seed)
        nctd = build_cell_nctd(inst)
        ok, msg = verify_cell_nctd(inst, nctd)
        assert ok, msg


def test_annotated_from_cell_nctd_schedules_all_edges():
    inst = random_instance(3, n=30)
    nctd = build_cell_nctd(inst)
    ann = annotated_from_cell_nctd(inst, nctd)
    scheduled = sorted(e for es in ann.edges_at for e in es)
    assert scheduled == sorted(inst.graph.edges())


def _label_class(inst, k, lab):
    """Column pairs with label ``lab`` (pair i gets label i mod ceil(sqrt(k)))."""
    sk = math.isqrt(k - 1) + 1
    t = inst.rep.t
    cols = set()
    for i in range(1, (t + 1) // 2 + 1):
        if i % sk == lab:
            cols.update(c for c in (2 * i - 1, 2 * i) if c <= t)
    cls = frozenset(v for v in range(inst.n) if inst.cell_of(v)[0] in cols)
    return cols, cls


def test_baker_ncpd_valid_over_labels_and_choices_of_y():
    rnd = random.Random(31)
    for seed in range(10):
        inst = random_instance(seed, n=26, box=14.0)
        k = rnd.choice([4, 6, 9])
        sk = math.isqrt(k - 1) + 1
        for lab in range(sk):
            cols, cls = _label_class(inst, k, lab)
            members = sorted(cls)
            y = frozenset(rnd.sample(members, min(sk, len(members))))
            sub, old, ncpd = build_baker_ncpd(inst, cls - y, y, k, frozenset(cols))
            ok, msg = verify_baker_ncpd(sub, ncpd)
            assert ok, msg
            assert len(ncpd.y_cells) <= sk  # y vertices occupy at most sk cells


def test_baker_ncpd_respects_window_cell_bound_in_bags():
    inst = random_instance(2, n=40, box=20.0)
    k = 4
    cols, cls = _label_class(inst, k, 0)
    sub, old, ncpd = build_baker_ncpd(inst, cls, frozenset(), k, frozenset(cols))
    y = set(ncpd.y_cells)
    for bag in ncpd.bags_cells():
        assert len(bag - y) <= ncpd.window_cell_bound


def test_baker_ncpd_single_empty_column_does_not_split_a_run():
    # cells in columns 1 and 3, nothing in 2, nothing blocked: the column-2
    # gap hosts an edge (span 2), so both columns must share a bag
    pts = PointCloud.of([(0, 0), (1.4, 0.1), (2.83, 0.05)])
    inst = instance_from_points(pts, "disk")
    assert inst.graph.has_edge(1, 2)
    assert inst.cell_of(1)[0] == 1 and inst.cell_of(2)[0] == 3
    sub, old, ncpd = build_baker_ncpd(inst, frozenset(), frozenset(), 4, frozenset())
    ok, msg = verify_baker_ncpd(sub, ncpd)
    assert ok, msg


# ---------------------------------------------------------------------------
# .td files


def test_td_round_trip_is_bit_exact(tmp_path):
    rnd = random.Random(29)
    for i in range(10):
        g = random_graph(rnd, rnd.randint(1, 10), 0.4)
        td = exact_treewidth(g).td
        p1, p2 = tmp_path / f"a{i}.td", tmp_path / f"b{i}.td"
        write_td(p1, td, g.n)
        back, n_back = read_td(p1)
        assert n_back == g.n
        write_td(p2, back, n_back)
        assert p1.read_bytes() == p2.read_bytes()
        ok, msg = verify_tree_decomposition(g, back)
        assert ok, msg


def test_td_header_shape(tmp_path):
    g = SimpleGraph(3, [(0, 1), (1, 2)])
    td = exact_treewidth(g).td
    p = tmp_path / "x.td"
    write_td(p, td, g.n)
    header = p.read_text().splitlines()[0].split()
    assert header[:2] == ["s", "td"]
    assert int(header[2]) == len(td.bags)
    assert int(header[3]) == td.width + 1
    assert int(header[4]) == 3


def test_td_reader_rejects_width_lies(tmp_path):
    p = tmp_path / "bad.td"
    p.write_text("s td 1 5 2\nb 1 1 2\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_td(p)


def test_verify_rejects_broken_decompositions():
    g = SimpleGraph(3, [(0, 1), (1, 2)])
    # edge (1,2) not covered
    td = TreeDecomposition((frozenset({0, 1}), frozenset({2})), ((0, 1),))
    ok, msg = verify_tree_decomposition(g, td)
    assert not ok and "(1,2)" in msg
    # disconnected occurrences of vertex 0
    td = TreeDecomposition(
        (frozenset({0, 1}), frozenset({1, 2}), frozenset({0, 2})), ((0, 1), (1, 2))
    )
    ok, msg = verify_tree_decomposition(g, td)
    assert not ok and "disconnected" in msg
    # wrong edge count / parallel tree edges
    td = TreeDecomposition(
        (frozenset({0, 1}), frozenset({1, 2})), ((0, 1), (1, 0))
    )
    ok, msg = verify_tree_decomposition(g, td)
    assert not ok
