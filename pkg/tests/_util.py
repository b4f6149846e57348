"""Shared helpers for the test suite: cloud generators, brute path-system
enumeration inside a clique cell, and the two cycle normalizers used to
check the structural bounds (crossing-edge rerouting for single cycles,
simple-family replacement for packings)."""
from __future__ import annotations

import itertools

import numpy as np

from gridcycles.cliquegrid import CliqueGridInstance, instance_from_points
from gridcycles.geometry import PointCloud
from gridcycles.graphs import SimpleGraph

# ---------------------------------------------------------------------------
# instance generators


def random_cloud(seed, n, box=None) -> PointCloud:
    """Uniform points; default box keeps average degree moderate and the
    connected components small enough for the brute-force oracles."""
    rng = np.random.default_rng(seed)
    if box is None:
        box = max(2.5, n / 2.2)
    pts = rng.uniform(0.0, box, size=(n, 2))
    return PointCloud.of([tuple(map(float, p)) for p in pts])


def random_instance(seed, n, box=None, model="disk") -> CliqueGridInstance:
    return instance_from_points(random_cloud(seed, n, box), model)


def ring_cloud(n, radius=None, center=(0.0, 0.0)) -> PointCloud:
    """n points on a circle forming an induced n-cycle under the disk model
    (adjacent chord just under 2, second-neighbour chord above 2)."""
    if n < 5:
        raise ValueError("rings below 5 points stop being induced cycles")
    lo = 1.0 / np.sin(2 * np.pi / n)  # second-neighbour chord = 2
    hi = 1.0 / np.sin(np.pi / n)  # adjacent chord = 2
    radius = radius if radius is not None else (0.02 * lo + 0.98 * hi)
    assert lo < radius < hi
    cx, cy = center
    pts = [
        (cx + radius * np.cos(2 * np.pi * i / n), cy + radius * np.sin(2 * np.pi * i / n))
        for i in range(n)
    ]
    return PointCloud.of([(float(x), float(y)) for x, y in pts])


def blob_cloud(n, center=(0.0, 0.0), spread=0.4, seed=0) -> PointCloud:
    rng = np.random.default_rng(seed)
    cx, cy = center
    pts = rng.uniform(-spread, spread, size=(n, 2)) + (cx, cy)
    return PointCloud.of([tuple(map(float, p)) for p in pts])


def merge_clouds(*clouds) -> PointCloud:
    pts = []
    for c in clouds:
        pts.extend(c.points)
    return PointCloud.of(pts)


# ---------------------------------------------------------------------------
# brute-force path systems inside one clique cell


def brute_clique_path_systems(members):
    """Every vertex-disjoint system of simple paths inside a clique.

    Yields ``(pairs, singles, r)``: canonical endpoint pairs of the paths
    with >= 1 edge, the isolated chosen vertices, and the total edge count.
    Used to cross-check the profile enumerator, so it must be exhaustive.
    """
    members = tuple(members)
    seen = set()

    def rec(remaining, pairs, singles, r):
        key = (tuple(sorted(pairs)), tuple(sorted(singles)), r)
        if key not in seen:
            seen.add(key)
            yield key
        for path_len in range(1, len(remaining) + 1):
            for combo in itertools.combinations(sorted(remaining), path_len):
                if path_len == 1:
                    v = combo[0]
                    yield from rec(remaining - {v}, pairs, singles + [v], r)
                else:
                    # in a clique every ordering of the chosen vertices is a
                    # path; only the endpoint set matters downstream
                    for a, b in itertools.combinations(combo, 2):
                        yield from rec(
                            remaining - set(combo),
                            pairs + [(a, b)],
                            singles,
                            r + path_len - 1,
                        )

    out = set()
    for key in rec(set(members), [], [], 0):
        out.add(key)
    return out


# ---------------------------------------------------------------------------
# crossing-edge rerouting for one cycle (test-side normalizer)


def cycle_cell_pair_counts(inst, cycle):
    """Unordered cell pair -> number of cycle edges between the two cells."""
    counts = {}
    n = len(cycle)
    for i in range(n):
        u, v = cycle[i], cycle[(i + 1) % n]
        cu, cv = inst.cell_of(u), inst.cell_of(v)
        if cu == cv:
            continue
        key = (cu, cv) if cu < cv else (cv, cu)
        counts[key] = counts.get(key, 0) + 1
    return counts


def _is_cycle_in(g: SimpleGraph, cyc) -> bool:
    return len(set(cyc)) == len(cyc) >= 3 and all(
        g.has_edge(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc))
    )


def reroute_once(inst, cycle):
    """One crossing-reducing swap, or None when every pair is within 5.

    For a pair of cells joined by >= 6 cycle edges, at least 3 edges point
    the same way along the cycle's orientation; same-way edges are
    vertex-disjoint (one successor per vertex), and swapping two of them
    for one intra-cell edge on each side keeps a cycle on the same vertex
    set while dropping the crossing count by exactly 2.
    """
    counts = cycle_cell_pair_counts(inst, cycle)
    n = len(cycle)
    for pair, cnt in sorted(counts.items()):
        if cnt <= 5:
            continue
        a_cell, b_cell = pair
        forward, backward = [], []
        for i in range(n):
            cu = inst.cell_of(cycle[i])
            cv = inst.cell_of(cycle[(i + 1) % n])
            if (cu, cv) == (a_cell, b_cell):
                forward.append(i)
            elif (cu, cv) == (b_cell, a_cell):
                backward.append(i)
        side = forward if len(forward) >= 3 else backward
        assert len(side) >= 3, "pigeonhole: >= 6 edges give >= 3 same-way"
        # 2-opt splice: drop edges (c[i], c[i+1]) and (c[j], c[j+1]), add the
        # intra-cell edges (c[i], c[j]) and (c[i+1], c[j+1])
        i, j = side[0], side[1]
        new = (
            list(cycle[: i + 1])
            + list(reversed(cycle[i + 1 : j + 1]))
            + list(cycle[j + 1 :])
        )
        return tuple(new)
    return None


def reroute_normalize(inst, cycle):
    """Apply swaps until every cell pair carries at most 5 cycle edges.

    Returns (normalized cycle, number of swaps). Asserts the invariants the
    construction promises: each swap keeps the vertex set and length, keeps
    it a cycle, and strictly decreases the total crossing count.
    """
    g = inst.graph
    assert _is_cycle_in(g, cycle)
    cur = tuple(cycle)
    total = sum(cycle_cell_pair_counts(inst, cur).values())
    swaps = 0
    while True:
        nxt = reroute_once(inst, cur)
        if nxt is None:
            return cur, swaps
        assert _is_cycle_in(g, nxt), "swap must keep a genuine cycle"
        assert sorted(nxt) == sorted(cur), "swap must keep the vertex set"
        new_total = sum(cycle_cell_pair_counts(inst, nxt).values())
        assert new_total < total, "every swap must cut crossings"
        cur, total = nxt, new_total
        swaps += 1


# ---------------------------------------------------------------------------
# simple-family replacement for cycle packings (test-side normalizer)


def _induce_cycle(g: SimpleGraph, cycle):
    """Chordless cycle inside the vertex set of ``cycle``."""
    cyc = list(cycle)
    changed = True
    while changed:
        changed = False
        n = len(cyc)
        for i in range(n):
            for off in range(2, n - 1):
                j = (i + off) % n
                if g.has_edge(cyc[i], cyc[j]):
                    lo, hi = min(i, j), max(i, j)
                    inner = cyc[lo : hi + 1]
                    outer = cyc[hi:] + cyc[: lo + 1]
                    cyc = inner if len(inner) <= len(outer) else outer
                    changed = len(cyc) < n
                    if changed:
                        break
            if changed:
                break
    return tuple(cyc)


def _cycle_edges(cycle):
    n = len(cycle)
    return [tuple(sorted((cycle[i], cycle[(i + 1) % n]))) for i in range(n)]


def _crossed_pairs(inst, cycle):
    """Unordered cell pairs this cycle crosses: two distinct cycle edges
    between the same two cells always witness the definition (two distinct
    edges cannot share both endpoints, so one side has distinct vertices)."""
    per_pair = {}
    for u, v in _cycle_edges(cycle):
        cu, cv = inst.cell_of(u), inst.cell_of(v)
        if cu == cv:
            continue
        key = (cu, cv) if cu < cv else (cv, cu)
        per_pair[key] = per_pair.get(key, 0) + 1
    return {pair for pair, cnt in per_pair.items() if cnt >= 2}


def _crossed_triples(inst, cycle):
    """Unordered cell triples crossed: an edge into one cell and an edge out
    of it toward a different third cell."""
    by_cell = {}
    for u, v in _cycle_edges(cycle):
        cu, cv = inst.cell_of(u), inst.cell_of(v)
        if cu == cv:
            continue
        by_cell.setdefault(cu, set()).add(cv)
        by_cell.setdefault(cv, set()).add(cu)
    out = set()
    for mid, others in by_cell.items():
        for a, b in itertools.combinations(sorted(others), 2):
            out.add(tuple(sorted((a, mid, b))))
    return out


def cross_edge_set(inst, cycles):
    out = set()
    for c in cycles:
        for u, v in _cycle_edges(c):
            if inst.cell_of(u) != inst.cell_of(v):
                out.add((u, v))
    return out


def _cell_vertices_of(inst, cycles, cell):
    verts = []
    for c in cycles:
        for v in c:
            if inst.cell_of(v) == cell:
                verts.append(v)
    return verts


def is_simple_family(inst, cycles) -> bool:
    pair_hits = {}
    triple_hits = {}
    for c in cycles:
        for p in _crossed_pairs(inst, c):
            pair_hits[p] = pair_hits.get(p, 0) + 1
        for t in _crossed_triples(inst, c):
            triple_hits[t] = triple_hits.get(t, 0) + 1
    return all(v <= 2 for v in pair_hits.values()) and all(
        v <= 2 for v in triple_hits.values()
    )


def packing_normalize(inst, cycles):
    """Rewrite a disjoint-cycle family into a *simple* one of the same size.

    Any cell pair or cell triple crossed by three of the cycles lets two or
    three of them be replaced by in-cell triangles on the vertices they
    already own, strictly decreasing the global crossing-edge count; the
    loop therefore terminates. Asserts every promise along the way and
    returns (family, rounds).
    """
    g = inst.graph
    fam = [_induce_cycle(g, c) for c in cycles]
    k = len(fam)
    rounds = 0
    total = len(cross_edge_set(inst, fam))
    while True:
        pair_hits: dict = {}
        triple_hits: dict = {}
        for idx, c in enumerate(fam):
            for p in _crossed_pairs(inst, c):
                pair_hits.setdefault(p, []).append(idx)
            for t in _crossed_triples(inst, c):
                triple_hits.setdefault(t, []).append(idx)
        bad_pair = next(
            (p for p in sorted(pair_hits) if len(pair_hits[p]) >= 3), None
        )
        bad_triple = next(
            (t for t in sorted(triple_hits) if len(triple_hits[t]) >= 3), None
        )
        if bad_pair is not None:
            a_cell, b_cell = bad_pair
            idxs = pair_hits[bad_pair][:3]
            replaced, triangles = _replace_for_pair(
                inst, fam, idxs, a_cell, b_cell
            )
        elif bad_triple is not None:
            idxs = triple_hits[bad_triple][:3]
            cells = bad_triple
            union = [v for i in idxs for v in fam[i]]
            triangles = []
            for cell in cells:
                own = [v for v in union if inst.cell_of(v) == cell]
                assert len(own) >= 3, "triple crossing guarantees 3 per cell"
                triangles.append(tuple(own[:3]))
            replaced = idxs
        else:
            break
        fam = [c for i, c in enumerate(fam) if i not in set(replaced)] + triangles
        assert len(fam) == k, "replacement keeps the family size"
        flat = [v for c in fam for v in c]
        assert len(flat) == len(set(flat)), "replacement keeps disjointness"
        for c in fam:
            assert _is_cycle_in(g, c)
        new_total = len(cross_edge_set(inst, fam))
        assert new_total < total, "every round must cut crossing edges"
        total = new_total
        rounds += 1
    assert is_simple_family(inst, fam)
    return fam, rounds


def _replace_for_pair(inst, fam, idxs, a_cell, b_cell):
    """The three pair-crossing cases: two cycles rich on both sides, or all
    three thin on one side (3 vertices) and fat on the other (>= 6)."""
    a_of = {i: [v for v in fam[i] if inst.cell_of(v) == a_cell] for i in idxs}
    b_of = {i: [v for v in fam[i] if inst.cell_of(v) == b_cell] for i in idxs}
    for s, t in itertools.combinations(idxs, 2):
        av = a_of[s] + a_of[t]
        bv = b_of[s] + b_of[t]
        if len(av) >= 3 and len(bv) >= 3:
            return [s, t], [tuple(av[:3]), tuple(bv[:3])]
    av = [v for i in idxs for v in a_of[i]]
    bv = [v for i in idxs for v in b_of[i]]
    if len(av) == 3 and len(bv) >= 6:
        return list(idxs), [tuple(av), tuple(bv[:3]), tuple(bv[3:6])]
    if len(bv) == 3 and len(av) >= 6:
        return list(idxs), [tuple(bv), tuple(av[:3]), tuple(av[3:6])]
    raise AssertionError(
        "three crossing cycles must land in one of the replacement cases"
    )
