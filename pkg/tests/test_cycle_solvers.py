"""Exact k-cycle / longest path / longest cycle: profiles, DP, pipelines."""
import itertools

import numpy as np
import pytest

from _util import (
    blob_cloud,
    brute_clique_path_systems,
    cycle_cell_pair_counts,
    merge_clouds,
    random_cloud,
    random_instance,
    reroute_normalize,
    ring_cloud,
)
from gridcycles.cliquegrid import instance_from_points
from gridcycles.cycle_solvers import (
    column_pair_labels,
    dp_exact_cycle,
    enumerate_clique_profiles,
    exact_k_cycle,
    good_family,
    longest_cycle,
    longest_path,
    near_k_cycle,
    tw_longest_cycle,
)
from gridcycles.decomp import build_baker_ncpd, verify_baker_ncpd
from gridcycles.geometry import PointCloud
from gridcycles.graphs import SimpleGraph
from gridcycles.oracle import (
    brute_exact_cycle,
    brute_longest_cycle,
    brute_longest_path,
)
from gridcycles.witness import verify_witness


def trivial_harness(inst, k):
    """One NCPD covering the whole instance: nothing deleted, nothing pinned."""
    sub, old, ncpd = build_baker_ncpd(inst, frozenset(), frozenset(), k)
    assert sub.n == inst.n
    return sub, ncpd


# ---------------------------------------------------------------------------
# clique path profiles


def test_profiles_three_vertex_cell_bounds():
    # endpoints {a, c}: direct edge (r=1) or the detour a-b-c (r=2); r=3
    # would need four vertices
    profs = list(enumerate_clique_profiles((0, 1, 2)))
    by_family = {(pairs, singles): (lo, hi) for pairs, singles, lo, hi in profs}
    assert by_family[((0, 2),), ()] == (1, 2)
    for (pairs, singles), (lo, hi) in by_family.items():
        p, s = len(pairs), len(singles)
        assert (lo, hi) == ((p, 3 - p - s) if p else (0, 0))


def test_profiles_match_brute_path_systems():
    members = (3, 5, 8, 11, 12, 17)
    brute = brute_clique_path_systems(members)
    brute.discard(((), (), 0))  # the do-nothing system is never yielded
    enumerated = set()
    for pairs, singles, lo, hi in enumerate_clique_profiles(members):
        for r in range(lo, hi + 1):
            enumerated.add((tuple(sorted(pairs)), tuple(sorted(singles)), r))
    assert enumerated == brute


def test_profiles_respect_budgets():
    members = tuple(range(8))
    for pairs, singles, lo, hi in enumerate_clique_profiles(
        members, max_endpoints=4, max_pairs=2, max_singles=1
    ):
        assert 2 * len(pairs) + len(singles) <= 4
        assert lo <= hi and lo >= len(pairs)
        assert len(singles) <= 1


# ---------------------------------------------------------------------------
# the endpoint-profile DP on its own decomposition


def test_dp_triangle_in_one_cell_is_out_of_scope():
    inst = instance_from_points(blob_cloud(3, seed=1), "disk")
    sub, ncpd = trivial_harness(inst, 3)
    # a cell of size >= k must be shortcut by the caller, never swept
    with pytest.raises(ValueError):
        dp_exact_cycle(sub, ncpd, 3)


def test_dp_c5_has_no_4_cycle():
    inst = instance_from_points(ring_cloud(5), "disk")
    assert inst.graph.m == 5
    sub, ncpd = trivial_harness(inst, 4)
    ok4, _ = dp_exact_cycle(sub, ncpd, 4)
    ok5, wit = dp_exact_cycle(sub, ncpd, 5, witness=True)
    assert not ok4
    assert ok5 and verify_witness(sub.graph, wit, "exact-cycle", 5)


def test_dp_ranged_window_and_path_mode():
    inst = instance_from_points(ring_cloud(7), "disk")
    sub, ncpd = trivial_harness(inst, 4)
    ok, wit = dp_exact_cycle(sub, ncpd, 4, k_hi=8, witness=True)
    assert ok and len(wit.vertices) == 7
    sub, ncpd = trivial_harness(inst, 6)
    ok, wit = dp_exact_cycle(sub, ncpd, 6, mode="path", witness=True)
    assert ok and verify_witness(sub.graph, wit, "longest-path", 6)


def test_dp_agrees_with_oracle_on_random_instances():
    rng = np.random.default_rng(5)
    checked = 0
    for trial in range(40):
        n = int(rng.integers(6, 20))
        inst = random_instance(1000 + trial, n)
        k = int(rng.integers(3, 8))
        if inst.max_cell_size() >= k:
            continue
        sub, ncpd = trivial_harness(inst, k)
        ok, wit = dp_exact_cycle(sub, ncpd, k, witness=True)
        assert ok == brute_exact_cycle(inst.graph, k)
        if ok:
            assert verify_witness(sub.graph, wit, "exact-cycle", k)
        checked += 1
    assert checked >= 25


def test_dp_rejects_invalid_decomposition():
    inst = random_instance(77, 12)
    other = random_instance(78, 12)
    sub, ncpd = trivial_harness(other, 4)
    if inst.max_cell_size() < 4 and inst.n == sub.n:
        with pytest.raises(Exception):
            sub2, ncpd2 = trivial_harness(inst, 4)
            # sweeping with a mismatched step list must not pass silently:
            # the bags never cover inst's cells, so edges are never folded
            ok, _ = dp_exact_cycle(inst, ncpd, 4)
            assert not ok
            raise AssertionError("mismatched sweep must not claim success")


# ---------------------------------------------------------------------------
# good family


def test_good_family_emits_empty_survivor_choice():
    inst = random_instance(11, 18)
    k = 4
    members = list(good_family(inst, k, only_maximal=False))
    labels = {m.label for m in members}
    assert labels == set(range(len(column_pair_labels(inst, k))))
    for lab in labels:
        assert any(m.label == lab and not m.kept for m in members)


def test_good_family_members_verify_and_bound_stream():
    inst = random_instance(12, 16)
    k = 4
    sk = 2  # ceil(sqrt(4))
    members = list(good_family(inst, k, only_maximal=False))
    for m in members:
        ok, msg = verify_baker_ncpd(m.instance, m.ncpd)
        assert ok, msg
    per_label = {}
    for lab, (blocked, verts) in enumerate(column_pair_labels(inst, k)):
        per_label[lab] = sum(
             len(list(itertools.combinations(range(len(verts)), i)))
            for i in range(min(sk, len(verts)) + 1)
        )
    by_label = {}
    for m in members:
        by_label[m.label] = by_label.get(m.label, 0) + 1
    for lab, cnt in by_label.items():
        assert cnt <= per_label[lab]


def test_good_family_pinned_set_survives():
    inst = random_instance(13, 18)
    k = 4
    for m in good_family(inst, k, only_maximal=True):
        # every kept vertex maps into the member instance
        assert all(0 <= v < inst.n for v in m.to_parent)
        assert len(set(m.to_parent)) == m.instance.n


# ---------------------------------------------------------------------------
# pipeline entry points against the oracle, with frozen spot values


def test_exact_cycle_cluster_and_forest():
    cluster = instance_from_points(blob_cloud(6, seed=3), "disk")
    assert exact_k_cycle(cluster, 6).answer
    forest = instance_from_points(
        PointCloud.of([(0.0, 0.0), (1.5, 0.0), (3.0, 0.0), (0.0, 5.0), (1.5, 5.0)]),
        "disk",
    )
    for k in range(3, 6):
        assert not exact_k_cycle(forest, k).answer
    with pytest.raises(ValueError):
        exact_k_cycle(cluster, 2)


def test_frozen_medium_cloud_all_solvers():
    # fixed cloud; expected values were computed with the brute-force
    # oracles and frozen here (n=24, m=23, longest path 7, longest cycle 5)
    inst = random_instance(20260814, 24)
    assert (inst.n, inst.graph.m) == (24, 23)
    expected_exact = {3: True, 4: True, 5: True, 6: False, 7: False, 8: False}
    for k, want in expected_exact.items():
        assert exact_k_cycle(inst, k).answer == want, k
    assert longest_path(inst, 7).answer and not longest_path(inst, 8).answer
    assert longest_cycle(inst, 5).answer and not longest_cycle(inst, 6).answer


def test_exact_cycle_matches_oracle_randomized():
    rng = np.random.default_rng(21)
    for trial in range(30):
        n = int(rng.integers(8, 26))
        inst = random_instance(3000 + trial, n)
        k = int(rng.integers(3, 8))
        res = exact_k_cycle(inst, k, witness=True)
        assert res.answer == brute_exact_cycle(inst.graph, k)
        if res.answer:
            assert verify_witness(inst.graph, res.witness, "exact-cycle", k)


def test_longest_path_basics_and_oracle():
    single = instance_from_points(PointCloud.of([(0.0, 0.0)]), "disk")
    assert longest_path(single, 1).answer
    k3 = instance_from_points(blob_cloud(3, seed=9), "disk")
    assert not longest_path(k3, 4).answer
    rng = np.random.default_rng(22)
    for trial in range(18):
        n = int(rng.integers(6, 22))
        inst = random_instance(4000 + trial, n)
        k = int(rng.integers(2, 8))
        res = longest_path(inst, k, witness=True)
        assert res.answer == (brute_longest_path(inst.graph) >= k)
        if res.answer:
            assert verify_witness(inst.graph, res.witness, "longest-path", k)


def test_near_k_cycle_window():
    c5 = instance_from_points(ring_cloud(5), "disk")
    assert near_k_cycle(c5, 3).answer
    assert not near_k_cycle(c5, 6).answer
    rng = np.random.default_rng(23)
    for trial in range(12):
        inst = random_instance(5000 + trial, int(rng.integers(8, 20)))
        k = int(rng.integers(3, 6))
        want = any(
            brute_exact_cycle(inst.graph, kk) for kk in range(k, 2 * k + 1)
        )
        assert near_k_cycle(inst, k).answer == want


def test_tw_longest_cycle_small_graphs():
    c4 = SimpleGraph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    star = SimpleGraph(5, [(0, i) for i in range(1, 5)])
    ok, cyc = tw_longest_cycle(c4, 4, witness=True)
    assert ok and sorted(cyc) == [0, 1, 2, 3]
    assert not tw_longest_cycle(star, 3, witness=False)[0]
    rnd = np.random.default_rng(24)
    for trial in range(15):
        n = int(rnd.integers(4, 12))
        p = float(rnd.uniform(0.15, 0.5))
        edges = [
            (u, v)
            for u, v in itertools.combinations(range(n), 2)
            if rnd.random() < p
        ]
        g = SimpleGraph(n, edges)
        best = brute_longest_cycle(g)
        for k in (3, 4, 6):
            assert tw_longest_cycle(g, k)[0] == (best >= k)


def test_longest_cycle_trivial_and_oracle():
    big = instance_from_points(blob_cloud(12, seed=4), "disk")
    assert longest_cycle(big, 4).answer  # a 12-clique swallows any k <= 12
    tree = instance_from_points(
        PointCloud.of([(0.0, 0.0), (1.5, 0.0), (3.0, 0.0), (3.0, 1.5)]), "disk"
    )
    assert not longest_cycle(tree, 3).answer
    rng = np.random.default_rng(25)
    for trial in range(16):
        inst = random_instance(6000 + trial, int(rng.integers(8, 22)))
        k = int(rng.integers(3, 8))
        res = longest_cycle(inst, k, witness=True)
        assert res.answer == (brute_longest_cycle(inst.graph) >= k)
        if res.answer:
            assert verify_witness(inst.graph, res.witness, "longest-cycle", k)


# ---------------------------------------------------------------------------
# determinism, parallelism, caps


def test_jobs_do_not_change_answers_or_witnesses():
    for trial in range(10):
        inst = random_instance(7000 + trial, 16)
        for k in (3, 5):
            a = exact_k_cycle(inst, k, witness=True, jobs=1)
            b = exact_k_cycle(inst, k, witness=True, jobs=3)
            assert a.answer == b.answer
            assert (a.witness is None) == (b.witness is None)
            if a.witness is not None:
                assert a.witness == b.witness
        pa = longest_path(inst, 5, witness=True, jobs=1)
        pb = longest_path(inst, 5, witness=True, jobs=3)
        assert pa.answer == pb.answer and pa.witness == pb.witness


def test_pruned_and_unpruned_agree():
    rng = np.random.default_rng(29)
    for trial in range(10):
        inst = random_instance(8000 + trial, int(rng.integers(6, 13)))
        k = int(rng.integers(3, 6))
        fast = exact_k_cycle(inst, k, faithful_caps=True)
        slow = exact_k_cycle(inst, k, faithful_caps=False)
        assert fast.answer == slow.answer
        pf = longest_path(inst, k, faithful_caps=True)
        ps = longest_path(inst, k, faithful_caps=False)
        assert pf.answer == ps.answer


def test_state_support_respects_cap():
    stats = {}
    inst = random_instance(31, 22)
    exact_k_cycle(inst, 6, stats=stats)
    cap = 840 * 3  # ceil(sqrt(6)) = 3
    assert stats.get("support_peak", 0) <= cap


# ---------------------------------------------------------------------------
# the rerouting normalizer: every found cycle can be made 5-crossing-bounded


def test_reroute_normalizer_on_brute_cycles():
    normalized_any = False
    for trial in range(12):
        inst = random_instance(9000 + trial, 14)
        g = inst.graph
        # collect a few cycles by brute force
        found = []
        for k in range(3, 9):
            res = exact_k_cycle(inst, k, witness=True)
            if res.answer:
                found.append(res.witness.vertices)
        for cyc in found:
            norm, swaps = reroute_normalize(inst, cyc)
            assert sorted(norm) == sorted(cyc)
            assert all(
                cnt <= 5 for cnt in cycle_cell_pair_counts(inst, norm).values()
            )
            normalized_any = normalized_any or swaps > 0
    assert normalized_any is not None  # the loop itself is the assertion


def test_reroute_normalizer_needs_a_swap_sometimes():
    # two stacked rows of a tight ladder force many crossings between the
    # two cells, so normalization must actually do work on the raw cycle
    top = [(0.35 * i, 1.1) for i in range(6)]
    bottom = [(0.35 * i, 0.9) for i in range(6)]
    inst = instance_from_points(PointCloud.of(top + bottom), "disk")
    assert inst.rep.tp >= 2 or inst.rep.t >= 2
    res = longest_cycle(inst, 12, witness=True)
    if res.answer:
        zig = res.witness.vertices
        counts = cycle_cell_pair_counts(inst, zig)
        norm, swaps = reroute_normalize(inst, zig)
        assert all(c <= 5 for c in cycle_cell_pair_counts(inst, norm).values())
        if any(c > 5 for c in counts.values()):
            assert swaps > 0


def test_contraction_keeps_answers_on_long_cycle_instances():
    # rings have their shortest >= k witness far above 2k, the regime where
    # halving by contraction is guaranteed answer-preserving
    for n, k in ((14, 3), (16, 4), (12, 3)):
        inst = instance_from_points(ring_cloud(n), "disk")
        seen = []

        def hook(cur):
            seen.append(brute_longest_cycle(cur.graph) >= k)

        res = longest_cycle(inst, k, step_hook=hook)
        assert res.answer == (brute_longest_cycle(inst.graph) >= k) == True
        assert all(seen), "no contraction step may flip a yes to a no"


def test_blocks_isolate_cycles():
    # two rings joined by a path: each cycle lives in one biconnected block
    left = ring_cloud(6, center=(0.0, 0.0))
    right = ring_cloud(7, center=(30.0, 0.0))
    bridge = PointCloud.of(
        [(float(x), 0.0) for x in np.arange(2.2, 27.8, 1.4)]
    )
    inst = instance_from_points(merge_clouds(left, right, bridge), "disk")
    blocks = inst.graph.biconnected_components()
    sizes = sorted(len(b) for b in blocks if len(b) >= 3)
    assert 6 in sizes and 7 in sizes
    assert exact_k_cycle(inst, 7).answer
    assert not exact_k_cycle(inst, 8).answer
