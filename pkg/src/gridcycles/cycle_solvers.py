"""Cycle and path finding on clique-grid instances in subexponential time.

The engine is a dynamic program over a cell-granular nice path
decomposition. A state remembers, for the processed prefix of the sweep,
only the *endpoint profile* of how a target cycle (or path) meets it: a
family of vertex-disjoint tracked components, each reduced to its live
endpoints, plus the number of edges used so far. Because every cell is a
clique, whatever one cell contributes in a single step is a vertex-disjoint
system of clique paths, which is itself fully described by an endpoint
profile and an edge count.
"""
from __future__ import annotations

import itertools
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

from .cliquegrid import (
    Cell,
    CliqueGridInstance,
    as_instance,
    cell_graph,
    contract_pair,
    first_contractible_pair,
)
from .decomp import (
    FORGET,
    INTRODUCE,
    JOIN,
    LEAF,
    AnnotatedNiceTD,
    BakerNCPD,
    annotate_edges,
    build_baker_ncpd,
    exact_treewidth,
    make_nice,
)
from .graphs import SimpleGraph
from .kernel import PATTERN, turing_kernel
from .witness import Witness, verify_witness

CYCLE_MODE = "cycle"
PATH_MODE = "path"

# Per-cell interaction constants: a cell sees at most 24 other cells with at
# most 5 solution edges to each, so at most 120 solution edges leave a cell.
PROFILE_ENDPOINT_CAP = 120
EPRIME_CAP = 120
STATE_ENDPOINT_FACTOR = 840  # 5 * 24 per cell, times cells per bag


def _ceil_sqrt(k: int) -> int:
    return math.isqrt(k - 1) + 1 if k > 1 else 1


@dataclass(frozen=True)
class SolveResult:
    answer: bool
    witness: Witness | None = None
    detail: str = ""

    def __bool__(self) -> bool:  # pragma: no cover - convenience
        return self.answer


# ---------------------------------------------------------------------------
# clique path profiles


def enumerate_clique_profiles(
    cell: Sequence[int],
    *,
    max_endpoints: int | None = PROFILE_ENDPOINT_CAP,
    max_pairs: int | None = None,
    max_singles: int | None = None,
) -> Iterator[tuple[tuple[tuple[int, int], ...], tuple[int, ...], int, int]]:
    """Endpoint profiles of vertex-disjoint path systems inside one clique.

    Yields ``(pairs, singles, r_min, r_max)``: ``pairs`` are the endpoint
    pairs of non-trivial paths, ``singles`` are one-vertex paths, and any
    total edge count in ``[r_min, r_max]`` is achievable by threading unused
    cell vertices through the non-trivial paths. The empty profile is not
    yielded (it is the do-nothing choice).
    """
    verts = sorted(cell)
    c = len(verts)

    def rec(idx: int, pairs: list, singles: list):
        if idx == len(verts):
            if pairs or singles:
                used = 2 * len(pairs) + len(singles)
                if max_endpoints is None or used <= max_endpoints:
                    p = len(pairs)
                    r_min, r_max = (p, p + (c - used)) if p else (0, 0)
                    yield tuple(pairs), tuple(singles), r_min, r_max
            return
        v = verts[idx]
        if any(v in pr for pr in pairs):
            # already claimed as a later partner of an earlier vertex
            yield from rec(idx + 1, pairs, singles)
            return
        # v unused
        yield from rec(idx + 1, pairs, singles)
        # v a one-vertex path
        if max_singles is None or len(singles) < max_singles:
            singles.append(v)
            yield from rec(idx + 1, pairs, singles)
            singles.pop()
        # v paired with a later vertex
        if max_pairs is None or len(pairs) < max_pairs:
            for j in range(idx + 1, len(verts)):
                w = verts[j]
                if any(w in pr for pr in pairs) or w in singles:
                    continue
                pairs.append((v, w))
                yield from rec(idx + 1, pairs, singles)
                pairs.pop()

    yield from rec(0, [], [])


def materialize_profile(
    pairs: Sequence[tuple[int, int]],
    singles: Sequence[int],
    r: int,
    cell: Sequence[int],
) -> tuple[tuple[int, ...], ...]:
    """Concrete clique paths realizing a profile with exactly ``r`` edges.

    Extra internal vertices (beyond one edge per pair) are the smallest
    unused cell vertices, all threaded through the first pair, which keeps
    the construction deterministic.
    """
    used = {v for pr in pairs for v in pr} | set(singles)
    extra = r - len(pairs)
    if extra < 0:
        raise ValueError("edge count below one per endpoint pair")
    spare = [v for v in sorted(cell) if v not in used][:extra]
    if len(spare) < extra:
        raise ValueError("not enough free cell vertices for edge count")
    paths = []
    for i, (a, b) in enumerate(pairs):
        paths.append((a, *spare, b) if i == 0 else (a, b))
    paths.extend((s,) for s in singles)
    return tuple(paths)


# ---------------------------------------------------------------------------
# abstract composition of tracked components

# A tracked component is (live_ends: frozenset[int], sealed: int) with
# len(live) + sealed <= 2. A single tracked vertex is (={v}, 0). Sealing
# happens only in path mode, when a true path endpoint leaves the sweep.

Component = tuple[frozenset, int]


def _walk_abstract(nodes, edges):
    """Decompose a degree-<=2 multigraph into walks.

    ``edges`` is a list of (a, b, payload). Returns (components, ok) where
    each component is (node_walk, edge_index_walk, closed) and ok is False
    if some node exceeds degree 2.
    """
    inc: dict = {v: [] for v in nodes}
    for i, (a, b, _) in enumerate(edges):
        inc[a].append(i)
        inc[b].append(i)
    if any(len(l) > 2 for l in inc.values()):
        return [], False
    seen_e = [False] * len(edges)
    seen_n = set()
    comps = []
    # open walks first: start from degree<=1 nodes, in sorted order
    starts = sorted(v for v in nodes if len(inc[v]) <= 1)
    for start in starts:
        if start in seen_n:
            continue
        walk_n, walk_e = [start], []
        seen_n.add(start)
        cur = start
        while True:
            nxt_edge = None
            for ei in inc[cur]:
                if not seen_e[ei]:
                    nxt_edge = ei
                    break
            if nxt_edge is None:
                break
            seen_e[nxt_edge] = True
            a, b, _ = edges[nxt_edge]
            cur = b if a == cur else a
            walk_n.append(cur)
            walk_e.append(nxt_edge)
            seen_n.add(cur)
        comps.append((walk_n, walk_e, False))
    # remaining nodes sit on closed walks
    for start in sorted(v for v in nodes if v not in seen_n):
        if start in seen_n:
            continue
        walk_n, walk_e = [start], []
        seen_n.add(start)
        cur = start
        while True:
            nxt_edge = None
            for ei in inc[cur]:
                if not seen_e[ei]:
                    nxt_edge = ei
                    break
            if nxt_edge is None:
                break
            seen_e[nxt_edge] = True
            a, b, _ = edges[nxt_edge]
            cur = b if a == cur else a
            seen_n.add(cur)
            walk_e.append(nxt_edge)
            if cur == start:
                break
            walk_n.append(cur)
        comps.append((walk_n, walk_e, True))
    return comps, True


def _oriented(seq: tuple[int, ...], start: int) -> tuple[int, ...]:
    if seq[0] == start:
        return seq
    if seq[-1] == start:
        return tuple(reversed(seq))
    raise AssertionError("sequence does not end at junction")


def _compose(
    comps: frozenset,
    pairs: Sequence[tuple[int, int]],
    singles: Sequence[int],
    eprime: Sequence[tuple[int, int]],
    *,
    seqs: dict | None = None,
    cell_paths: Sequence[tuple[int, ...]] | None = None,
):
    """Compose tracked components with one cell's contribution.

    Returns ``("cycle", total_new_edges_payload, seq)`` when the whole
    picture closes into a single cycle, ``("paths", new_comps, new_seqs)``
    when it stays a disjoint family of paths, or ``None`` when the
    combination is inconsistent (degree > 2, or a premature cycle).

    ``seqs``/``cell_paths`` carry concrete vertex sequences during witness
    replay; in the forward pass they are None and only the shape matters.
    Sealed component ends are modelled as negative marker nodes that can
    never gain another edge.
    """
    nodes = set()
    edges = []  # (a, b, payload) payload: ("comp", comp) | ("cell", i) | ("edge",)
    isolated_payload: dict = {}
    marker = -1
    comp_list = sorted(comps, key=lambda c: (sorted(c[0]), c[1]))
    for comp in comp_list:
        live, sealed = comp
        if sealed == 2:
            return None  # a finished path composes with nothing
        if len(live) == 2:
            a, b = sorted(live)
            nodes.update((a, b))
            edges.append((a, b, ("comp", comp)))
        elif len(live) == 1:
            (a,) = live
            nodes.add(a)
            if sealed == 1:
                nodes.add(marker)
                edges.append((a, marker, ("comp", comp)))
                marker -= 1
            else:
                isolated_payload[a] = ("comp", comp)
        else:
            return None
    for i, (a, b) in enumerate(pairs):
        nodes.update((a, b))
        edges.append((a, b, ("cell", i)))
    base = len(pairs)
    for j, s in enumerate(singles):
        nodes.add(s)
        isolated_payload[s] = ("cell", base + j)
    for a, u in eprime:
        edges.append((a, u, ("edge", None)))

    walks, ok = _walk_abstract(nodes, edges)
    if not ok:
        return None
    closed = [w for w in walks if w[2]]
    if closed:
        # only a single cycle covering everything is meaningful
        if len(closed) != 1 or len(walks) != 1:
            return None
        walk_n, walk_e, _ = closed[0]
        if any(n < 0 for n in walk_n):
            return None
        seq = None
        if seqs is not None:
            seq = _assemble(walk_n, walk_e, edges, seqs, cell_paths, closed=True)
        return ("cycle", None, seq)
    new_comps = []
    new_seqs = {} if seqs is not None else None
    for walk_n, walk_e, _ in walks:
        real = [n for n in walk_n if n >= 0]
        ends = []
        sealed = 0
        if len(walk_n) == 1:
            ends = [walk_n[0]]
        else:
            for end in (walk_n[0], walk_n[-1]):
                if end < 0:
                    sealed += 1
                else:
                    ends.append(end)
        comp = (frozenset(ends), sealed)
        new_comps.append(comp)
        if seqs is not None:
            if len(walk_n) == 1:
                pl = isolated_payload.get(walk_n[0])
                if pl is None:
                    seq = (walk_n[0],)
                elif pl[0] == "comp":
                    seq = seqs[pl[1]]
                else:
                    seq = cell_paths[pl[1]]
            else:
                seq = _assemble(walk_n, walk_e, edges, seqs, cell_paths, closed=False)
            # convention: a half-sealed component keeps its live end last
            if sealed == 1 and ends and seq[-1] != ends[0]:
                seq = tuple(reversed(seq))
            new_seqs[comp] = seq
    return ("paths", frozenset(new_comps), new_seqs)


def _assemble(walk_n, walk_e, edges, seqs, cell_paths, *, closed):
    """Expand an abstract walk into a concrete vertex sequence."""
    out: list[int] = []
    cur = walk_n[0]
    if cur >= 0 and not walk_e:
        return (cur,)
    for step, ei in enumerate(walk_e):
        a, b, payload = edges[ei]
        nxt = b if a == cur else a
        kind, ref = payload
        if kind == "comp":
            seq = seqs[ref]
            if cur < 0 or nxt < 0:
                # half-sealed: stored with the live end last
                exp = seq if nxt >= 0 else tuple(reversed(seq))
            else:
                exp = _oriented(seq, cur)
        elif kind == "cell":
            exp = _oriented(cell_paths[ref], cur)
        else:
            exp = (cur, nxt)
        exp = tuple(v for v in exp)
        if out and exp and out[-1] == exp[0]:
            out.extend(exp[1:])
        else:
            out.extend(exp)
        cur = nxt
    if closed and out and out[0] == out[-1]:
        out.pop()
    return tuple(out)


# ---------------------------------------------------------------------------
# the sweep DP


def _seal(comps: frozenset, gone: set, mode: str):
    """Apply a forget step to one state; None means the thread dies."""
    if mode == CYCLE_MODE:
        for live, _sealed in comps:
            if live & gone:
                return None
        return comps
    budget = 2 - sum(sealed for _, sealed in comps)
    out = []
    for live, sealed in comps:
        hit = live & gone
        if not hit:
            out.append((live, sealed))
            continue
        if len(live) == 1 and sealed == 0:
            return None  # an isolated tracked vertex can no longer connect
        need = len(hit)
        if need > budget:
            return None
        budget -= need
        out.append((live - hit, sealed + need))
    return frozenset(out)


def dp_exact_cycle(
    inst: CliqueGridInstance,
    ncpd: BakerNCPD,
    k: int,
    *,
    k_hi: int | None = None,
    mode: str = CYCLE_MODE,
    endpoint_cap: int | None = "auto",
    eprime_cap: int | None = EPRIME_CAP,
    profile_cap: int | None = PROFILE_ENDPOINT_CAP,
    future_prune: bool = True,
    witness: bool = False,
    stats: dict | None = None,
) -> tuple[bool, Witness | None]:
    """Find a cycle on exactly ``k`` vertices (or, in path mode, a path on
    exactly ``k`` vertices) by sweeping a cell-granular path decomposition.

    In cycle mode ``k_hi`` widens the goal to any length in ``[k, k_hi]``
    in a single sweep; one run then answers the whole length window.

    The caps default to the per-cell interaction bounds; pass ``None`` to
    disable one (useful for cross-checking the pruned search). ``stats``,
    when given, accumulates ``states_peak`` (most simultaneous states) and
    ``support_peak`` (most live endpoints in any one state).
    """
    if mode == CYCLE_MODE and k < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    if mode == PATH_MODE and k < 1:
        raise ValueError("a path needs at least 1 vertex")
    if k_hi is not None and mode != CYCLE_MODE:
        raise ValueError("a length window only makes sense for cycles")
    K = k if k_hi is None else k_hi
    if K < k:
        raise ValueError("empty length window")
    if endpoint_cap == "auto":
        endpoint_cap = STATE_ENDPOINT_FACTOR * _ceil_sqrt(K)
    if mode == CYCLE_MODE and inst.max_cell_size() >= k:
        # a cycle confined to one clique cell would never need a cross edge
        # and this sweep only ever closes through one; callers must shortcut
        # that case (any k cell vertices already answer yes)
        raise ValueError("cycle search requires every cell smaller than k")
    g = inst.graph
    target = k if mode == CYCLE_MODE else k - 1
    # edge budget for pruning: the longest acceptable cycle, or the path
    step_budget = K if mode == CYCLE_MODE else k
    prof_budget = K if mode == CYCLE_MODE else target

    # last step index at which a vertex can still receive a fresh edge
    intro_step = {}
    forget_step = {}
    for idx, (kind, cell) in enumerate(ncpd.steps):
        if kind == INTRODUCE:
            for v in inst.vertices_in(cell):
                intro_step[v] = idx
        else:
            for v in inst.vertices_in(cell):
                forget_step[v] = idx
    last_feed = {}
    for v in range(inst.n):
        feeds = [intro_step[w] for w in g.neighbors(v) if w in intro_step]
        last_feed[v] = max(feeds, default=-1)

    start = (frozenset(), 0)
    states: dict = {start: None}

    def note_stats():
        if stats is None:
            return
        stats["states_peak"] = max(stats.get("states_peak", 0), len(states))
        sup = max((sum(len(c[0]) for c in key[0]) for key in states), default=0)
        stats["support_peak"] = max(stats.get("support_peak", 0), sup)

    def finish(record):
        if not witness:
            return True, None
        return True, _replay(inst, ncpd, record, mode)

    def collapse(cur_states, step_idx):
        """Keep one state per future-isomorphism class.

        After step ``step_idx`` a live end's only remaining roles are taking
        cross edges to vertices introduced later and being sealed when its
        cell is forgotten, so states that agree on k', component shapes, and
        the multiset of ends' (forget time, future neighbours) fingerprints
        evolve identically. Future sets only shrink, so equivalence never
        un-merges and keeping the first representative is sound.
        """
        fut: dict[int, tuple] = {}

        def fp(u):
            got = fut.get(u)
            if got is None:
                got = (
                    forget_step[u],
                    tuple(
                        sorted(
                            w
                            for w in g.neighbors(u)
                            if intro_step.get(w, -1) > step_idx
                        )
                    ),
                )
                fut[u] = got
            return got

        kept: dict = {}
        seen: set = set()
        for key, rec in cur_states.items():
            comps, k1 = key
            abs_key = (
                k1,
                tuple(
                    sorted(
                        (tuple(sorted(fp(u) for u in live)), sealed)
                        for live, sealed in comps
                    )
                ),
            )
            if abs_key in seen:
                continue
            seen.add(abs_key)
            kept[key] = rec
        return kept

    for step_idx, (kind, cell) in enumerate(ncpd.steps):
        cv = inst.vertices_in(cell)
        if kind == INTRODUCE:
            if not cv:
                continue
            # backward neighbours: already-introduced vertices adjacent to a,
            # the only legal far side of a cross edge taken at this step
            nbr_back = {
                a: frozenset(
                    w
                    for w in g.neighbors(a)
                    if w in intro_step and intro_step[w] < step_idx
                )
                for a in cv
            }
            dead = (
                {a for a in cv if not nbr_back[a] and last_feed[a] <= step_idx}
                if future_prune and mode == CYCLE_MODE
                else set()
            )
            # cell vertices with identical neighbourhoods outside the cell
            # are interchangeable (swapping them is an automorphism), so one
            # path system per twin-class shape suffices
            cls: dict[int, int] = {}
            cls_index: dict[frozenset, int] = {}
            cell_set = set(cv)
            for a in cv:
                fp = frozenset(g.neighbors(a) - cell_set)
                cls[a] = cls_index.setdefault(fp, len(cls_index))
            profiles = []
            seen_shapes = set()
            for pairs, singles, r_min, r_max in enumerate_clique_profiles(
                cv,
                max_endpoints=profile_cap,
                max_pairs=prof_budget,
                max_singles=prof_budget + 2,
            ):
                prof_ends = [a for pr in pairs for a in pr] + list(singles)
                # an endpoint with no edge into the past or future never
                # reaches degree 2, so no cycle uses this path system
                if dead and any(a in dead for a in prof_ends):
                    continue
                shape = (
                    tuple(sorted(tuple(sorted((cls[a], cls[b]))) for a, b in pairs)),
                    tuple(sorted(cls[s] for s in singles)),
                )
                if shape in seen_shapes:
                    continue
                seen_shapes.add(shape)
                q = len(pairs) + len(singles)
                profiles.append((r_min + q, pairs, singles, r_min, r_max, q, prof_ends))
            # ascending minimal vertex cost, so budget overruns break early
            profiles.sort(key=lambda p: (p[0], p[1], p[2]))

            added: dict = {}
            for key in list(states):
                comps, k1 = key
                m = len(comps)
                if mode == CYCLE_MODE:
                    # every live end must still absorb one cross edge (an
                    # isolated tracked vertex two), and cross edges pay into
                    # the same budget as everything else
                    need = sum(2 - sealed for _, sealed in comps)
                    if k1 + need > K:
                        continue
                else:
                    need = 0
                    if k1 + m > k:
                        continue
                live_set = {u for c in comps for u in c[0]}
                comp_room: dict[int, int] = {}
                for c in comps:
                    live, sealed = c
                    for u in live:
                        comp_room[u] = 2 - (len(live) - 1) - sealed
                for cost, pairs, singles, r_min, r_max, q, prof_ends in profiles:
                    # a cross edge lowers the component count by at most one,
                    # so edges spent and components merged cancel exactly and
                    # k1 + r + m + q <= budget is necessary however E' is chosen
                    if k1 + m + cost > step_budget:
                        break
                    r_hi = min(r_max, step_budget - k1 - m - q)
                    cands = sorted(
                        (a, u)
                        for a in prof_ends
                        for u in (nbr_back[a] & live_set)
                        if comp_room[u] > 0
                    )
                    cap = dict(comp_room)
                    for a, b in pairs:
                        cap[a] = cap[b] = 1
                    for s in singles:
                        cap[s] = 2
                    prof_comps = frozenset(
                        [(frozenset(pr), 0) for pr in pairs]
                        + [(frozenset((s,)), 0) for s in singles]
                    )
                    # cross-free extension: the path system rides along
                    union_comps = comps | prof_comps
                    union_ok = not (
                        future_prune
                        and mode == CYCLE_MODE
                        and any(
                            last_feed[u] <= step_idx
                            for c in union_comps
                            for u in c[0]
                        )
                    ) and not (
                        endpoint_cap is not None
                        and sum(len(c[0]) for c in union_comps) > endpoint_cap
                    )
                    r_u_hi = r_hi
                    if mode == CYCLE_MODE:
                        r_u_hi = min(r_hi, K - k1 - need - 2 * q)
                    for r in range(r_min, r_u_hi + 1):
                        record = ("intro", states[key], key, cell, pairs, singles, r, ())
                        if mode == PATH_MODE and m + q == 1 and k1 + r == target:
                            return finish(record)
                        if union_ok:
                            union_key = (union_comps, k1 + r)
                            if union_key not in states and union_key not in added:
                                added[union_key] = record
                    if not cands:
                        continue
                    e_room = prof_budget - k1 - r_min
                    if eprime_cap is not None:
                        e_room = min(e_room, eprime_cap)
                    if e_room < 1:
                        continue
                    for eprime in _eprime_choices(cands, cap, e_room):
                        out = _compose(comps, pairs, singles, eprime)
                        if out is None:
                            continue
                        e = len(eprime)
                        if out[0] == "cycle":
                            if mode == CYCLE_MODE:
                                r_lo = max(r_min, k - k1 - e)
                                if r_lo <= min(r_max, K - k1 - e):
                                    return finish((
                                        "intro", states[key], key, cell,
                                        pairs, singles, r_lo, tuple(eprime),
                                    ))
                            continue
                        new_comps = out[1]
                        n_comp = len(new_comps)
                        ends_over = endpoint_cap is not None and (
                            sum(len(c[0]) for c in new_comps) > endpoint_cap
                        )
                        if ends_over:
                            continue
                        if future_prune and mode == CYCLE_MODE and any(
                            last_feed[u] <= step_idx
                            for c in new_comps
                            for u in c[0]
                        ):
                            continue
                        if mode == PATH_MODE and n_comp == 1:
                            r_need = target - k1 - e
                            if r_min <= r_need <= r_max:
                                return finish((
                                    "intro", states[key], key, cell,
                                    pairs, singles, r_need, tuple(eprime),
                                ))
                        if mode == CYCLE_MODE:
                            need_new = sum(2 - s for _, s in new_comps)
                            new_r_hi = min(r_max, K - k1 - e - need_new)
                        else:
                            new_r_hi = min(r_max, k - k1 - e - n_comp)
                        for r in range(r_min, new_r_hi + 1):
                            new_key = (new_comps, k1 + r + e)
                            if new_key not in states and new_key not in added:
                                added[new_key] = (
                                    "intro", states[key], key, cell,
                                    pairs, singles, r, tuple(eprime),
                                )
            states.update(added)
            states = collapse(states, step_idx)
            note_stats()
        else:  # forget
            gone = set(cv)
            if not gone:
                continue
            nxt: dict = {}
            for key in states:
                comps, k1 = key
                sealed_comps = _seal(comps, gone, mode)
                if sealed_comps is None:
                    continue
                if mode == PATH_MODE:
                    done = [c for c in sealed_comps if not c[0] and c[1] == 2]
                    if done:
                        if len(sealed_comps) == 1 and k1 == target:
                            return finish(("forget", states[key], key, cell))
                        continue  # a finished path plus leftovers goes nowhere
                if future_prune and mode == CYCLE_MODE and any(
                    last_feed[u] <= step_idx for c in sealed_comps for u in c[0]
                ):
                    continue
                new_key = (sealed_comps, k1)
                if new_key not in nxt:
                    if new_key == key:
                        nxt[new_key] = states[key]
                    else:
                        nxt[new_key] = ("forget", states[key], key, cell)
            states = collapse(nxt, step_idx)
            note_stats()
    return False, None


def _eprime_choices(cands, cap, max_size):
    """Nonempty subsets of candidate cross edges within per-node degree room."""
    if max_size <= 0 or not cands:
        return
    n = len(cands)

    def rec(idx, chosen, room):
        for i in range(idx, n):
            a, u = cands[i]
            if room[a] > 0 and room[u] > 0:
                room[a] -= 1
                room[u] -= 1
                chosen.append((a, u))
                yield tuple(chosen)
                if len(chosen) < max_size:
                    yield from rec(i + 1, chosen, room)
                chosen.pop()
                room[a] += 1
                room[u] += 1

    yield from rec(0, [], dict(cap))


def _replay(inst, ncpd, record, mode):
    """Rebuild the concrete witness from the chain of DP records."""
    chain = []
    node = record
    while node is not None:
        chain.append(node)
        node = node[1]
    chain.reverse()
    seqs: dict = {}
    final = None
    for rec in chain:
        if rec[0] == "intro":
            _, _, _key, cell, pairs, singles, r, eprime = rec
            cell_paths = materialize_profile(pairs, singles, r, inst.vertices_in(cell))
            comps, _k1 = _key
            out = _compose(
                comps, pairs, singles, eprime, seqs=seqs, cell_paths=cell_paths
            )
            if out is None:
                raise AssertionError("witness replay diverged")
            if out[0] == "cycle":
                final = out[2]
            else:
                seqs = out[2]
        else:
            _, _, _key, cell = rec
            gone = set(inst.vertices_in(cell))
            comps, _k1 = _key
            sealed = _seal(comps, gone, mode)
            new_seqs = {}
            for live, sl in comps:
                seq = seqs[(live, sl)]
                hit = live & gone
                new_live, new_sl = live - hit, sl + len(hit)
                if len(hit) == 1 and len(live) == 2:
                    (keeper,) = new_live
                    if seq[-1] != keeper:
                        seq = tuple(reversed(seq))
                new_seqs[(new_live, new_sl)] = seq
            seqs = new_seqs
            if sealed is not None and len(sealed) == 1:
                (only,) = sealed
                if not only[0] and only[1] == 2:
                    final = seqs[only]
    if final is None:
        # path mode can finish on a live state: the single surviving path
        (final,) = seqs.values()
    if mode == CYCLE_MODE:
        return Witness.cycle(final)
    return Witness.path(final)


# ---------------------------------------------------------------------------
# the member family: one bounded-pathwidth instance per column guess


@dataclass(frozen=True)
class FamilyMember:
    label: int
    deleted: frozenset
    kept: frozenset
    instance: CliqueGridInstance
    to_parent: tuple[int, ...]
    ncpd: BakerNCPD


def column_pair_labels(inst: CliqueGridInstance, k: int) -> list[tuple[frozenset, tuple[int, ...]]]:
    """Columns grouped in consecutive pairs (1,2),(3,4),... and labelled
    round-robin with ceil(sqrt(k)) labels. Returns, per label, the blocked
    column set and the vertices living there."""
    sk = _ceil_sqrt(k)
    cols: list[set[int]] = [set() for _ in range(sk)]
    for i in range(1, (inst.rep.t + 1) // 2 + 1):
        cols[i % sk].update((2 * i - 1, 2 * i))
    out = []
    for lab in range(sk):
        verts = tuple(v for v in range(inst.n) if inst.cell_of(v)[0] in cols[lab])
        out.append((frozenset(cols[lab]), verts))
    return out


def good_family(
    inst: CliqueGridInstance, k: int, *, only_maximal: bool = True
) -> Iterator[FamilyMember]:
    """Stream the instances whose disjunction answers exact k-cycle.

    For each column label, every choice of at most ceil(sqrt(k)) survivors Y
    inside the labelled columns gives a member: delete the rest of those
    columns, keep Y pinned in every bag of a narrow path decomposition.
    ``only_maximal`` keeps only the inclusion-maximal Y per label, which is
    enough for a yes/no answer because members grow monotonically with Y.
    """
    sk = _ceil_sqrt(k)
    seen: set[frozenset] = set()
    for lab, (blocked, cls) in enumerate(column_pair_labels(inst, k)):
        cls_sorted = sorted(cls)
        limit = min(sk, len(cls_sorted))
        sizes = [limit] if only_maximal else range(limit + 1)
        for size in sizes:
            for combo in itertools.combinations(cls_sorted, size):
                kept = frozenset(combo)
                deleted = frozenset(cls_sorted) - kept
                if deleted in seen:
                    continue
                seen.add(deleted)
                member, old, ncpd = build_baker_ncpd(
                    inst, deleted, kept, k, blocked_columns=blocked
                )
                kept_new = frozenset(old.index(v) for v in kept)
                yield FamilyMember(lab, deleted, kept_new, member, old, ncpd)


# ---------------------------------------------------------------------------
# problem-level pipelines


def _caps(faithful_caps: bool) -> dict:
    if faithful_caps:
        return {}
    return {
        "endpoint_cap": None,
        "eprime_cap": None,
        "profile_cap": None,
        "future_prune": False,
    }


def _solve_members(
    inst, k, mode, *, witness, jobs, faithful_caps, only_maximal, k_hi=None,
    stats=None,
):
    """OR the DP over every kernel window and family member; the first YES in
    canonical order wins, so the outcome is independent of ``jobs``.

    In cycle mode ``k_hi`` accepts any cycle length in ``[k, k_hi]``; the
    windows and families are then sized for ``k_hi`` while blocks smaller
    than ``k`` still drop out.
    """
    K = k if k_hi is None else k_hi
    if mode == CYCLE_MODE:
        # a cell holding c >= k vertices is a clique, so its first
        # min(c, K) vertices already close an acceptable cycle
        for cell in inst.nonempty_cells():
            cv = inst.vertices_in(cell)
            if len(cv) >= k:
                length = min(len(cv), K)
                wit = Witness.cycle(cv[:length]) if witness else None
                return SolveResult(True, wit, "clique-cell")
    kern = turing_kernel(inst, K, PATTERN)
    if kern.shortcut == "clique-cell":
        (cell,) = kern.shortcut_detail
        wit = None
        if witness:
            verts = inst.vertices_in(cell)[:k]
            wit = Witness.cycle(verts) if mode == CYCLE_MODE else Witness.path(verts)
        return SolveResult(True, wit, "clique-cell")

    caps = _caps(faithful_caps)
    # cheap windows first: any window's YES answers the whole instance, and
    # small windows cost orders of magnitude less than the widest one
    windows = sorted(kern.windows, key=lambda w: (w.instance.n, w.origin))

    stats_lock = threading.Lock()

    def run(member):
        local: dict | None = {} if stats is not None else None
        ok, wit = dp_exact_cycle(
            member.instance, member.ncpd, k,
            k_hi=k_hi, mode=mode, witness=witness, stats=local, **caps,
        )
        if local:
            with stats_lock:
                for name, val in local.items():
                    stats[name] = max(stats.get(name, 0), val)
        return ok, wit, member

    def cheap_first(members):
        # the member with nothing deleted is the whole part with no blocked
        # columns -- complete on its own but by far the costliest, so every
        # restricted member gets a chance to answer yes before it runs
        tail = []
        for member in members:
            if member.deleted:
                yield member
            else:
                tail.append(member)
        yield from tail

    for window in windows:
        sub = window.instance
        if sub.n < k:
            continue
        if mode == CYCLE_MODE:
            # a cycle lives inside one biconnected component, and a block's
            # vertex set induces exactly that block
            blocks = sorted(
                (b for b in sub.graph.biconnected_components() if len(b) >= k),
                key=lambda b: (len(b), b),
            )
            parts = [sub.subinstance(b) for b in blocks]
        else:
            parts = [(sub, tuple(range(sub.n)))]
        for part, part_old in parts:
            members = cheap_first(good_family(part, K, only_maximal=only_maximal))
            if jobs > 1:
                with ThreadPoolExecutor(max_workers=jobs) as pool:
                    results = pool.map(run, members)
                    hit = next((res for res in results if res[0]), None)
            else:
                hit = next((res for res in map(run, members) if res[0]), None)
            if hit is None:
                continue
            _ok, wit, member = hit
            if wit is not None:
                wit = (
                    wit.relabel(member.to_parent)
                    .relabel(part_old)
                    .relabel(window.old_vertices)
                )
            detail = f"window {window.origin} label {member.label}"
            return SolveResult(True, wit, detail)
    return SolveResult(False, None, "exhausted %d windows" % len(windows))


def exact_k_cycle(
    inst: CliqueGridInstance,
    k: int,
    *,
    witness: bool = False,
    jobs: int = 1,
    faithful_caps: bool = True,
    only_maximal: bool = True,
    stats: dict | None = None,
) -> SolveResult:
    """Does the instance contain a cycle on exactly ``k`` vertices?

    ``inst`` may also be a raw :class:`PointCloud` (built as a unit disk
    graph unless an instance is handed in directly).
    """
    if k < 3:
        raise ValueError("cycles have at least 3 vertices")
    inst = as_instance(inst)
    core_verts = inst.graph.two_core()
    if len(core_verts) < k:
        return SolveResult(False, None, "2-core smaller than k")
    core, core_old = inst.subinstance(core_verts)
    res = _solve_members(
        core, k, CYCLE_MODE,
        witness=witness, jobs=jobs,
        faithful_caps=faithful_caps, only_maximal=only_maximal, stats=stats,
    )
    if res.answer and res.witness is not None:
        res = SolveResult(True, res.witness.relabel(core_old), res.detail)
    return res


def longest_path(
    inst: CliqueGridInstance,
    k: int,
    *,
    witness: bool = False,
    jobs: int = 1,
    faithful_caps: bool = True,
    only_maximal: bool = True,
    stats: dict | None = None,
) -> SolveResult:
    """Does the instance contain a (simple) path on at least ``k`` vertices?

    A longer path contains a k-vertex subpath, so searching for exactly k
    vertices is equivalent. ``inst`` may also be a raw point cloud.
    """
    if k < 1:
        raise ValueError("k must be positive")
    inst = as_instance(inst)
    if k == 1:
        wit = Witness.path((0,)) if witness and inst.n else None
        return SolveResult(inst.n > 0, wit, "single vertex")
    return _solve_members(
        inst, k, PATH_MODE,
        witness=witness, jobs=jobs,
        faithful_caps=faithful_caps, only_maximal=only_maximal, stats=stats,
    )


def _cycle_probe(
    g: SimpleGraph, lo: int, hi: int, node_budget: int = 60_000
) -> tuple[int, ...] | None:
    """Bounded backtracking search for a cycle with length in ``[lo, hi]``.

    Anchors on the smallest cycle vertex and explores neighbours in
    ascending order, so any hit is deterministic. Returns the cycle, or
    None once the node budget runs out (inconclusive, never a no).
    """
    budget = node_budget
    for a in range(g.n):
        path = [a]
        on_path = {a}

        def dfs():
            nonlocal budget
            budget -= 1
            if budget <= 0:
                return None
            u = path[-1]
            close = len(path) >= lo and a in g.neighbors(u)
            if close and len(path) >= 3:
                return tuple(path)
            if len(path) == hi:
                return None
            for w in sorted(g.neighbors(u)):
                if w <= a or w in on_path:
                    continue
                path.append(w)
                on_path.add(w)
                got = dfs()
                if got is not None:
                    return got
                path.pop()
                on_path.remove(w)
            return None

        got = dfs()
        if got is not None:
            return got
        if budget <= 0:
            return None
    return None


def near_k_cycle(
    inst: CliqueGridInstance,
    k: int,
    *,
    witness: bool = False,
    jobs: int = 1,
    faithful_caps: bool = True,
    stats: dict | None = None,
) -> SolveResult:
    """Is there a cycle on between ``k`` and ``2k`` vertices?"""
    k_lo = max(k, 3)
    core_verts = inst.graph.two_core()
    if len(core_verts) < k_lo:
        return SolveResult(False, None, "2-core smaller than k")
    core, core_old = inst.subinstance(core_verts)
    k_hi = min(2 * k, core.n)
    if k_hi < k_lo:
        return SolveResult(False, None, "2-core smaller than k")
    probe = _cycle_probe(core.graph, k_lo, k_hi)
    if probe is not None:
        wit = Witness.cycle(probe).relabel(core_old) if witness else None
        return SolveResult(True, wit, f"probe found {len(probe)}")
    res = _solve_members(
        core, k_lo, CYCLE_MODE,
        witness=witness, jobs=jobs, faithful_caps=faithful_caps,
        only_maximal=True, k_hi=k_hi, stats=stats,
    )
    if res.answer and res.witness is not None:
        res = SolveResult(True, res.witness.relabel(core_old), res.detail)
    return res


# ---------------------------------------------------------------------------
# long cycles via the cell graph and contraction


class _Closed(Exception):
    """Raised inside the long-cycle DP the moment a qualifying cycle closes;
    carries the record needed to replay a concrete witness."""

    def __init__(self, rec):
        self.rec = rec


def tw_longest_cycle(
    g: SimpleGraph, k: int, *, witness: bool = False, node_budget: int = 300_000
) -> tuple[bool, tuple[int, ...] | None]:
    """Does ``g`` contain a cycle on at least ``k`` vertices?

    A single-cycle DP over a nice tree decomposition (built here); meant for
    small auxiliary graphs such as cell graphs. States track how the cycle
    meets the bag: endpoint pairs of open fragments, interior bag vertices,
    and a vertex count saturating above ``k`` plus the largest bag (the
    slack keeps join counts conservative without losing yes-instances).
    """
    if k < 3:
        raise ValueError("cycles have at least 3 vertices")
    if g.n < k:
        return False, None
    tw = exact_treewidth(g, node_budget=node_budget)
    nice = make_nice(tw.td)
    ann = annotate_edges(g, nice)
    cap = k + max(len(b) for b in ann.bags)

    # states: (frags frozenset of (a,b) with a<=b, intern frozenset, count)
    # record: ("leaf",) | ("intro", prev, w, used) | ("edge", prev, (u,v))
    #         | ("forget", prev) | ("join", recL, recR)
    def fold_edges(states, node):
        for u, v in ann.edges_at[node]:
            nxt = dict(states)
            for (frags, intern, cnt), rec in states.items():
                if u in intern or v in intern:
                    continue
                fu = next((f for f in frags if u in f), None)
                fv = next((f for f in frags if v in f), None)
                if fu is None or fv is None:
                    continue
                if fu == fv:
                    # closing edge: only the lone fragment may close, and
                    # only once it is long enough
                    if len(frags) == 1 and cnt >= k:
                        raise _Closed(("edge", rec, (u, v)))
                    continue
                ou = fu[0] if fu[1] == u else fu[1]
                ov = fv[0] if fv[1] == v else fv[1]
                new_intern = set(intern)
                if fu != (u, u):
                    new_intern.add(u)
                if fv != (v, v):
                    new_intern.add(v)
                nf = (frags - {fu, fv}) | {(min(ou, ov), max(ou, ov))}
                key = (nf, frozenset(new_intern), cnt)
                if key not in nxt:
                    nxt[key] = ("edge", rec, (u, v))
            states = nxt
        return states

    order = []
    stack = [ann.root]
    while stack:
        x = stack.pop()
        order.append(x)
        stack.extend(ann.children[x])
    order.reverse()  # children before parents

    table: dict[int, dict] = {}
    try:
        for x in order:
            kind = ann.kinds[x]
            if kind == LEAF:
                states = {(frozenset(), frozenset(), 0): ("leaf",)}
            elif kind == INTRODUCE:
                (child,) = ann.children[x]
                w = ann.payload[x]
                states = {}
                for key, rec in table[child].items():
                    frags, intern, cnt = key
                    if key not in states:
                        states[key] = ("intro", rec, w, False)
                    nk = (frags | {(w, w)}, intern, min(cnt + 1, cap))
                    if nk not in states:
                        states[nk] = ("intro", rec, w, True)
            elif kind == FORGET:
                (child,) = ann.children[x]
                w = ann.payload[x]
                states = {}
                for key, rec in table[child].items():
                    frags, intern, cnt = key
                    if any(w in f for f in frags):
                        continue  # an open end leaving the bag can never close
                    nk = (frags, intern - {w}, cnt)
                    if nk not in states:
                        states[nk] = ("forget", rec)
            else:  # join
                lc, rc = ann.children[x]
                states = {}
                right = sorted(table[rc].items(), key=lambda it: _tw_key(it[0]))
                for (fL, iL, cL), recL in sorted(
                    table[lc].items(), key=lambda it: _tw_key(it[0])
                ):
                    uL = frozenset(v for f in fL for v in f) | iL
                    for (fR, iR, cR), recR in right:
                        uR = frozenset(v for f in fR for v in f) | iR
                        if uL != uR:
                            continue
                        merged = _join_fragments(fL, iL, fR, iR)
                        if merged is None:
                            continue
                        closed, nf, ni = merged
                        cnt = cL + cR - len(uL)
                        if closed:
                            if cnt >= k:
                                raise _Closed(("join", recL, recR))
                            continue
                        key = (nf, ni, min(cnt, cap))
                        if key not in states:
                            states[key] = ("join", recL, recR)
            states = fold_edges(states, x)
            table[x] = states
            for ch in ann.children[x]:
                del table[ch]
    except _Closed as hit:
        if not witness:
            return True, None
        return True, _replay_tw(hit.rec, ann)
    return False, None


def _tw_key(state):
    frags, intern, cnt = state
    return (cnt, sorted(frags), sorted(intern))


def _tw_degrees(fL, iL, fR, iR):
    """Per-vertex degree of the combined structure, or None on a clash.

    Within one side an interior vertex has degree 2, the endpoint of a
    non-trivial fragment degree 1, a singleton fragment degree 0.
    """
    nodes = set()
    for side_f, side_i in ((fL, iL), (fR, iR)):
        for f in side_f:
            nodes.update(f)
        nodes.update(side_i)
    deg = {}
    for v in nodes:
        d = 0
        for side_f, side_i in ((fL, iL), (fR, iR)):
            if v in side_i:
                d += 2
            else:
                d += sum(1 for f in side_f if v in f and f[0] != f[1])
        if d > 2:
            return None, None
        deg[v] = d
    return nodes, deg


def _join_fragments(fL, iL, fR, iR):
    """Compose two fragment systems over the same bag vertex set.

    Returns (closed, frags, intern) or None when degrees clash, or a cycle
    forms that does not absorb the entire tracked structure.
    """
    nodes, deg = _tw_degrees(fL, iL, fR, iR)
    if nodes is None:
        return None
    edges = []
    for side in (fL, fR):
        for f in side:
            if f[0] != f[1]:
                edges.append((f[0], f[1], None))
    walks, ok = _walk_abstract(nodes, edges)
    if not ok:
        return None
    closed_walks = [w for w in walks if w[2]]
    if closed_walks:
        if len(closed_walks) != 1:
            return None
        for walk_n, _we, closed in walks:
            if closed:
                continue
            # vertices interior to a fragment path show up isolated with
            # degree 2; they ride along inside the cycle. Anything else
            # still open makes the closure invalid.
            if len(walk_n) == 1 and deg[walk_n[0]] == 2:
                continue
            return None
        return True, frozenset(), frozenset()
    frags = []
    intern = set(v for v in nodes if deg[v] == 2)
    for walk_n, _we, _closed in walks:
        if len(walk_n) == 1:
            if deg[walk_n[0]] == 0:
                frags.append((walk_n[0], walk_n[0]))
        else:
            a, b = walk_n[0], walk_n[-1]
            frags.append((min(a, b), max(a, b)))
    return False, frozenset(frags), frozenset(intern)


def _replay_tw(record, ann):
    """Concrete cycle from the single-cycle DP's record chain."""

    def mat(rec) -> dict:
        kind = rec[0]
        if kind == "leaf":
            return {}
        if kind == "intro":
            _, prev, w, used = rec
            seqs = mat(prev)
            if used:
                seqs = dict(seqs)
                seqs[(w, w)] = (w,)
            return seqs
        if kind == "forget":
            return mat(rec[1])
        if kind == "edge":
            _, prev, (u, v) = rec
            seqs = mat(prev)
            fu = next(f for f in seqs if u in f)
            fv = next((f for f in seqs if v in f and f != fu), None)
            su = seqs[fu]
            if fv is None:  # closing edge
                seq = _oriented(su, u) if len(su) > 1 else su
                return {"cycle": seq}
            sv = seqs[fv]
            seq = tuple(reversed(_oriented(su, u))) + _oriented(sv, v)
            ou = fu[0] if fu[1] == u else fu[1]
            ov = fv[0] if fv[1] == v else fv[1]
            out = {f: s for f, s in seqs.items() if f not in (fu, fv)}
            out[(min(ou, ov), max(ou, ov))] = seq
            return out
        # join
        _, recL, recR = rec
        sL, sR = mat(recL), mat(recR)
        nodes = set()
        edges = []
        for side in (sL, sR):
            for f, seq in side.items():
                nodes.update(f)
                if f[0] != f[1]:
                    edges.append((f[0], f[1], ("half", seq)))
        walks, _ok = _walk_abstract(nodes, edges)
        out = {}
        for walk_n, walk_e, closed in walks:
            if len(walk_n) == 1 and not walk_e:
                v = walk_n[0]
                # a vertex isolated here is a singleton only when both sides
                # say so; otherwise one side holds it interior to a path
                if (v, v) in sL and (v, v) in sR:
                    out[(v, v)] = (v,)
                continue
            seq: list[int] = []
            cur = walk_n[0]
            for ei in walk_e:
                a, b, (_h, pseq) = edges[ei]
                nxt = b if a == cur else a
                exp = _oriented(pseq, cur)
                if seq and seq[-1] == exp[0]:
                    seq.extend(exp[1:])
                else:
                    seq.extend(exp)
                cur = nxt
            if closed and seq and seq[0] == seq[-1]:
                seq.pop()
            if closed:
                out["cycle"] = tuple(seq)
            else:
                a, b = seq[0], seq[-1]
                out[(min(a, b), max(a, b))] = tuple(seq)
        return out

    seqs = mat(record)
    return tuple(seqs["cycle"])


def _lift_group_cycle(
    g: SimpleGraph, group_cycle: Sequence[int], members: Sequence[Sequence[int]]
) -> tuple[int, ...]:
    """Expand a cycle over vertex groups into a concrete cycle of ``g``.

    Consecutive groups are linked by their lexicographically first crossing
    edge; inside a group, entry and exit vertices are adjacent because each
    group lives inside one cell (a clique).
    """
    m = len(group_cycle)
    links = []
    for i in range(m):
        a, b = group_cycle[i], group_cycle[(i + 1) % m]
        pick = min(
            (u, v) for u in members[a] for v in members[b] if g.has_edge(u, v)
        )
        links.append(pick)
    out: list[int] = []
    for i in range(m):
        entry = links[i - 1][1]
        exit_ = links[i][0]
        out.append(entry)
        if exit_ != entry:
            out.append(exit_)
    return tuple(out)


def longest_cycle(
    inst: CliqueGridInstance,
    k: int,
    *,
    witness: bool = False,
    jobs: int = 1,
    faithful_caps: bool = True,
    step_hook=None,
    stats: dict | None = None,
) -> SolveResult:
    """Does the instance contain a cycle on at least ``k`` vertices?

    Strategy: a cycle of the cell graph lifts into the graph, which settles
    very long cycles; otherwise contract same-cell pairs one at a time — a
    no-instance stays no, and any cycle on >= 2k vertices survives halving —
    asking for a k..2k-cycle before each contraction. ``step_hook`` is
    called with each intermediate instance. ``inst`` may also be a raw
    point cloud.
    """
    if k < 3:
        raise ValueError("cycles have at least 3 vertices")
    inst = as_instance(inst)
    core_verts = inst.graph.two_core()
    if len(core_verts) < 3:
        return SolveResult(False, None, "2-core is empty")
    core, core_old = inst.subinstance(core_verts)

    cg = cell_graph(core)
    ok, cell_cyc = tw_longest_cycle(cg.graph, k, witness=True)
    if ok:
        wit = None
        if witness:
            cells = [cg.cells[i] for i in cell_cyc]
            groups = [core.vertices_in(c) for c in cells]
            lifted = _lift_group_cycle(core.graph, range(len(groups)), groups)
            wit = Witness.cycle(lifted).relabel(core_old)
        return SolveResult(True, wit, "cell-graph cycle")

    cur = core
    blobs: list[tuple[int, ...]] = [(v,) for v in range(cur.n)]
    rounds = 0
    while True:
        if step_hook is not None:
            step_hook(cur)
        res = near_k_cycle(
            cur, k, witness=witness, jobs=jobs, faithful_caps=faithful_caps,
            stats=stats,
        )
        if res.answer:
            wit = None
            if witness:
                cyc = res.witness.vertices
                lifted = _lift_group_cycle(core.graph, cyc, blobs)
                wit = Witness.cycle(lifted).relabel(core_old)
            return SolveResult(True, wit, f"after {rounds} contractions")
        pair = first_contractible_pair(cur)
        if pair is None:
            return SolveResult(False, None, f"fully contracted after {rounds} rounds")
        u, v = pair
        cur, remap = contract_pair(cur, u, v)
        merged: list[tuple[int, ...]] = [() for _ in range(cur.n)]
        for old_v, new_v in enumerate(remap):
            merged[new_v] = merged[new_v] + blobs[old_v]
        blobs = merged
        rounds += 1
