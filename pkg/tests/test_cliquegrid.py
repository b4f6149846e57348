"""Backbones, cell graphs, and contractions."""
import random

import pytest

from gridcycles.cliquegrid import (
    cell_graph,
    contract_pair,
    contractible_pairs,
    first_contractible_pair,
    instance_from_points,
    is_backbone,
    minimal_backbone,
    read_representation,
    write_representation,
)
from gridcycles.decomp import exact_treewidth
from gridcycles.geometry import PointCloud


def random_instance(seed, n=None, box=None, model="disk"):
    rnd = random.Random(seed)
    n = n or rnd.randint(4, 40)
    box = box or rnd.uniform(3, 18)
    pts = PointCloud.of([(rnd.uniform(0, box), rnd.uniform(0, box)) for _ in range(n)])
    return instance_from_points(pts, model)


def cellgraph_signature(cg):
    """Shape of a cell graph independent of vertex numbering."""
    edges = frozenset(
        frozenset((cg.cells[u], cg.cells[v])) for u, v in cg.graph.edges()
    )
    return frozenset(cg.cells), edges


# ---------------------------------------------------------------------------
# backbones


def test_backbone_keeps_all_cross_cell_adjacencies():
    for seed in range(25):
        inst = random_instance(seed)
        sub, kept = minimal_backbone(inst)
        assert is_backbone(inst, kept)
        assert cellgraph_signature(cell_graph(sub))[1] == cellgraph_signature(cell_graph(inst))[1]


def test_backbone_is_deletion_minimal():
    for seed in range(15):
        inst = random_instance(seed, n=25)
        _, kept = minimal_backbone(inst)
        for v in kept:
            reduced = [u for u in kept if u != v]
            assert not is_backbone(inst, reduced), f"vertex {v} was removable"


def test_backbone_cell_and_degree_bounds():
    for seed in range(25):
        inst = random_instance(seed, n=60, box=7.0)  # dense: big cells
        sub, kept = minimal_backbone(inst)
        assert sub.max_cell_size() <= 24
        for v in range(sub.n):
            assert sub.graph.degree(v) <= 599


def test_backbone_of_single_isolated_clique_is_empty():
    # one cell, no cross-cell edges: nothing needs witnessing
    pts = PointCloud.of([(0, 0), (0.1, 0.1), (0.2, 0.0)])
    inst = instance_from_points(pts, "disk")
    sub, kept = minimal_backbone(inst)
    assert kept == ()


def test_backbone_treewidth_dominates_cell_graph():
    for seed in range(10):
        inst = random_instance(seed, n=18)
        sub, _ = minimal_backbone(inst)
        cg = cell_graph(inst)
        tw_cell = exact_treewidth(cg.graph).width
        tw_backbone = exact_treewidth(sub.graph).width
        if sub.n:
            assert tw_cell <= tw_backbone


# ---------------------------------------------------------------------------
# cell graphs and contraction


def test_cell_graph_shape_on_a_simple_line():
    # three clusters in a row, neighbours touch
    pts = PointCloud.of([(0, 0), (0.2, 0), (1.9, 0), (3.8, 0)])
    inst = instance_from_points(pts, "disk")
    cg = cell_graph(inst)
    assert cg.graph.n == len(inst.nonempty_cells())
    # contracting the co-located pair leaves the cell graph untouched
    contracted, remap = contract_pair(inst, 0, 1)
    assert cellgraph_signature(cell_graph(contracted)) == cellgraph_signature(cg)


def test_cell_graph_invariant_under_any_contraction():
    for seed in range(20):
        inst = random_instance(seed, box=6.0)
        sig = cellgraph_signature(cell_graph(inst))
        pair = first_contractible_pair(inst)
        while pair is not None:
            inst, _ = contract_pair(inst, *pair)
            assert cellgraph_signature(cell_graph(inst)) == sig
            pair = first_contractible_pair(inst)
        # fully contracted: one vertex per cell, graph == cell graph shape
        assert inst.n == len(inst.nonempty_cells())


def test_contract_pair_mapping_and_adjacency():
    pts = PointCloud.of([(0, 0), (0.3, 0), (1.8, 0), (0.1, 1.9)])
    inst = instance_from_points(pts, "disk")
    assert inst.cell_of(0) == inst.cell_of(1)
    new, remap = contract_pair(inst, 0, 1)
    assert new.n == inst.n - 1
    assert remap[0] == 0 and remap[1] == 0  # merged keeps the smaller index
    assert remap[2] == 1 and remap[3] == 2
    # merged vertex inherits the union of neighbourhoods
    merged_nbrs = set(new.graph.adj(0))
    expect = (set(inst.graph.adj(0)) | set(inst.graph.adj(1))) - {0, 1}
    assert merged_nbrs == {remap[u] for u in expect}


def test_contract_pair_rejects_cross_cell_pairs():
    pts = PointCloud.of([(0, 0), (1.9, 0)])
    inst = instance_from_points(pts, "disk")
    if inst.cell_of(0) != inst.cell_of(1):
        with pytest.raises(ValueError):
            contract_pair(inst, 0, 1)


def test_contractible_pairs_are_lexicographic_and_same_cell():
    inst = random_instance(99, n=30, box=5.0)
    pairs = list(contractible_pairs(inst))
    for u, v in pairs:
        assert u < v and inst.cell_of(u) == inst.cell_of(v)
    first = first_contractible_pair(inst)
    if pairs:
        assert first == min(pairs)


# ---------------------------------------------------------------------------
# representation text format


def test_representation_file_round_trip(tmp_path):
    inst = random_instance(7, n=12)
    p = tmp_path / "rep.txt"
    write_representation(p, inst)
    back = read_representation(p)
    assert back == inst.rep
    first = p.read_text().splitlines()[0]
    assert first == f"cells {inst.rep.t} {inst.rep.tp}"
