"""Command-line front end: generate, solve, kernelize, decompose, bench.

Output is line-oriented ``key=value`` pairs on stdout (plus an optional
structured JSON file via ``--json``). Exit codes: 0 = YES / success,
1 = NO, 2 = error, 3 = oracle disagreement under ``--check``.

All randomness flows from one 64-bit ``--seed`` through numpy's PCG64
generator, so identical inputs and seed give byte-identical outputs.
Answers and witnesses never depend on ``--jobs``. Vertex ids printed by
the CLI are 1-indexed, matching the ``.gr``/``.td`` file formats; the
Python API underneath is 0-indexed.

Every flag has an environment-variable mirror named ``GRIDCYCLES_<FLAG>``
(``GRIDCYCLES_K``, ``GRIDCYCLES_MODEL``, ``GRIDCYCLES_CHECK``, ...); an
explicit flag wins over its mirror.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .cliquegrid import (
    CliqueGridInstance,
    cell_graph,
    instance_from_points,
    is_backbone,
    minimal_backbone,
    write_representation,
)
from .cycle_solvers import exact_k_cycle, longest_cycle, longest_path
from .decomp import (
    build_cell_nctd,
    exact_treewidth,
    read_td,
    verify_cell_nctd,
    verify_tree_decomposition,
    write_td,
)
from .geometry import (
    GeometricModel,
    PointCloud,
    read_point_file,
    write_gr,
    write_point_file,
)
from .hitting_packing import cycle_packing, fvs
from .kernel import LONGEST_CYCLE, PATTERN, turing_kernel
from .oracle import (
    OracleBudgetExceeded,
    brute_cycle_packing,
    brute_exact_cycle,
    brute_fvs,
    brute_longest_cycle,
    brute_longest_path,
)
from .witness import verify_witness

PROBLEMS = ("exact-cycle", "longest-path", "longest-cycle", "fvs", "cycle-packing")
MODELS = ("disk", "square")
DECOMPOSE_KINDS = ("tree", "nctd", "cell-graph", "backbone")
KERNEL_PROBLEMS = {"exact-cycle": PATTERN, "longest-cycle": LONGEST_CYCLE}

EXIT_YES = 0
EXIT_NO = 1
EXIT_ERROR = 2
EXIT_DISAGREE = 3

_ENV_PREFIX = "GRIDCYCLES_"


def _env(name: str) -> str | None:
    value = os.environ.get(_ENV_PREFIX + name)
    return value if value not in (None, "") else None


def _env_int(name: str, fallback: int | None) -> int | None:
    raw = _env(name)
    return fallback if raw is None else int(raw)


def _env_str(name: str, fallback: str | None) -> str | None:
    raw = _env(name)
    return fallback if raw is None else raw


def _env_bool(name: str, fallback: bool) -> bool:
    raw = _env(name)
    if raw is None:
        return fallback
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise SystemExit(f"{_ENV_PREFIX}{name}: cannot parse {raw!r} as a boolean")


class Report:
    """Collects key=value lines for stdout and a mirror dict for --json."""

    def __init__(self) -> None:
        self.data: dict = {}

    def emit(self, key: str, value, *, raw=None) -> None:
        print(f"{key}={value}")
        self.data[key] = value if raw is None else raw

    def write_json(self, path: str | None) -> None:
        if path:
            Path(path).write_text(
                json.dumps(self.data, indent=2, default=str) + "\n", encoding="utf-8"
            )


def _rng(seed: int) -> np.random.Generator:
    """The one named generator behind every random choice the CLI makes."""
    return np.random.Generator(np.random.PCG64(seed))


def _gen_cloud(n: int, region: tuple[float, float, float, float], seed: int) -> PointCloud:
    x0, y0, x1, y1 = region
    if n == 0:
        return PointCloud(())
    pts = _rng(seed).uniform((x0, y0), (x1, y1), size=(n, 2))
    return PointCloud(tuple((float(x), float(y)) for x, y in pts))


def _parse_region(text: str) -> tuple[float, float, float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"--region wants 'x0,y0,x1,y1', got {text!r}")
    x0, y0, x1, y1 = (float(p) for p in parts)
    if x1 < x0 or y1 < y0:
        raise ValueError(f"--region box is inverted: {text!r}")
    return x0, y0, x1, y1


def _load_instance(path: str, model: str) -> tuple[PointCloud, CliqueGridInstance]:
    cloud = read_point_file(path)
    return cloud, instance_from_points(cloud, GeometricModel(model))


def _witness_text(wit) -> str:
    """1-indexed rendering: cycles/paths keep order, sets are sorted."""
    if wit.kind == "cycle-family":
        return ";".join(",".join(str(v + 1) for v in c) for c in wit.vertices)
    vs = wit.vertices
    if wit.kind == "vertex-set":
        vs = tuple(sorted(vs))
    return ",".join(str(v + 1) for v in vs)


def _witness_raw(wit):
    if wit.kind == "cycle-family":
        return [[v + 1 for v in c] for c in wit.vertices]
    vs = wit.vertices
    if wit.kind == "vertex-set":
        vs = tuple(sorted(vs))
    return [v + 1 for v in vs]


# ---------------------------------------------------------------------------
# solve


def _dispatch_solve(problem, inst, k, *, witness, jobs, faithful_caps, stats):
    if problem == "exact-cycle":
        return exact_k_cycle(
            inst, k, witness=witness, jobs=jobs, faithful_caps=faithful_caps, stats=stats
        )
    if problem == "longest-path":
        return longest_path(
            inst, k, witness=witness, jobs=jobs, faithful_caps=faithful_caps, stats=stats
        )
    if problem == "longest-cycle":
        return longest_cycle(
            inst, k, witness=witness, jobs=jobs, faithful_caps=faithful_caps, stats=stats
        )
    if problem == "fvs":
        return fvs(inst, k, witness=witness, faithful_caps=faithful_caps, stats=stats)
    if problem == "cycle-packing":
        cap_mode = "adaptive" if faithful_caps else "off"
        return cycle_packing(inst, k, witness=witness, cap_mode=cap_mode, stats=stats)
    raise ValueError(f"unknown problem {problem!r}")


def _oracle_answer(problem: str, g, k: int) -> bool:
    if problem == "exact-cycle":
        return brute_exact_cycle(g, k)
    if problem == "longest-path":
        return brute_longest_path(g) >= k
    if problem == "longest-cycle":
        return brute_longest_cycle(g) >= k
    if problem == "fvs":
        return brute_fvs(g, k)
    return brute_cycle_packing(g, k)


def cmd_solve(args) -> int:
    rep = Report()
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    cloud, inst = _load_instance(args.points, args.model)
    rep.emit("command", "solve")
    rep.emit("problem", args.problem)
    rep.emit("k", args.k)
    rep.emit("model", args.model)
    rep.emit("points", args.points)
    rep.emit("n", inst.n)
    rep.emit("m", inst.graph.m)
    stats: dict = {}
    t0 = time.perf_counter()
    res = _dispatch_solve(
        args.problem, inst, args.k,
        witness=args.witness, jobs=jobs, faithful_caps=args.faithful_caps,
        stats=stats,
    )
    elapsed = time.perf_counter() - t0
    rep.emit("answer", "yes" if res.answer else "no", raw=bool(res.answer))
    rep.emit("detail", res.detail)
    if res.witness is not None:
        if not verify_witness(inst.graph, res.witness, args.problem, args.k):
            rep.emit("error", "witness failed verification")
            rep.write_json(args.json)
            return EXIT_ERROR
        rep.emit("witness_kind", res.witness.kind)
        rep.emit("witness", _witness_text(res.witness), raw=_witness_raw(res.witness))
    rep.emit("states_peak", stats.get("states_peak", 0))
    rep.emit("support_peak", stats.get("support_peak", 0))
    rep.emit("time_s", f"{elapsed:.3f}", raw=elapsed)
    code = EXIT_YES if res.answer else EXIT_NO
    if args.check:
        try:
            expect = _oracle_answer(args.problem, inst.graph, args.k)
        except OracleBudgetExceeded as exc:
            rep.emit("error", f"oracle budget exceeded: {exc}")
            rep.write_json(args.json)
            return EXIT_ERROR
        agree = expect == res.answer
        rep.emit("check", "agreement" if agree else "disagreement")
        if not agree:
            rep.emit("oracle_answer", "yes" if expect else "no", raw=bool(expect))
            code = EXIT_DISAGREE
    rep.write_json(args.json)
    return code


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    rep = Report()
    region = _parse_region(args.region)
    if args.n == 0:
        Path(args.out).write_text("", encoding="utf-8")
    else:
        cloud = _gen_cloud(args.n, region, args.seed)
        comment = (
            f"gridcycles gen n={args.n} seed={args.seed} "
            f"region={args.region} model={args.model} rng=PCG64"
        )
        write_point_file(args.out, cloud, comment=comment)
    rep.emit("command", "gen")
    rep.emit("n", args.n)
    rep.emit("seed", args.seed)
    rep.emit("region", args.region)
    rep.emit("model", args.model)
    rep.emit("out", args.out)
    rep.write_json(args.json)
    return EXIT_YES


# ---------------------------------------------------------------------------
# kernelize


def cmd_kernelize(args) -> int:
    rep = Report()
    if args.problem not in KERNEL_PROBLEMS:
        raise ValueError(
            f"kernelize handles {sorted(KERNEL_PROBLEMS)}, not {args.problem!r}"
        )
    cloud, inst = _load_instance(args.points, args.model)
    out = turing_kernel(inst, args.k, KERNEL_PROBLEMS[args.problem])
    k = args.k
    rep.emit("command", "kernelize")
    rep.emit("problem", args.problem)
    rep.emit("k", k)
    rep.emit("model", args.model)
    rep.emit("n", inst.n)
    rep.emit("m", inst.graph.m)
    if out.is_yes_shortcut:
        rep.emit("shortcut", out.shortcut)
        detail = out.shortcut_detail
        if len(detail) == 1:
            detail = detail[0]
        rep.emit("shortcut_detail", detail)
        rep.emit("answer", "yes", raw=True)
        rep.emit("windows", 0)
        rep.write_json(args.json)
        return EXIT_YES
    rep.emit("shortcut", "none", raw=None)
    # every placement of a witness fits in one 2k x 2k cell window, and with
    # the shortcut not fired every cell holds < k vertices
    bound = (2 * k) ** 2 * max(k - 1, 0)
    rep.emit("windows", len(out.windows))
    rep.emit("bound_per_window", bound)
    windows_data = []
    audit_ok = True
    total = 0
    for i, win in enumerate(out.windows):
        n_w = win.instance.n
        cells_w = len(win.instance.nonempty_cells())
        within = n_w <= bound
        audit_ok = audit_ok and within
        total += n_w
        gr_path = f"{args.out}-w{i}.gr"
        rep_path = f"{args.out}-w{i}.rep"
        write_gr(
            gr_path, win.instance.graph,
            comment=f"kernel window {i} origin={win.origin} k={k}",
        )
        write_representation(rep_path, win.instance)
        print(
            f"window{i}.origin={win.origin} window{i}.n={n_w} "
            f"window{i}.cells={cells_w} window{i}.within_bound="
            f"{'yes' if within else 'no'} window{i}.gr={gr_path}"
        )
        windows_data.append(
            {
                "origin": list(win.origin),
                "n": n_w,
                "cells": cells_w,
                "within_bound": within,
                "gr": gr_path,
                "rep": rep_path,
            }
        )
    rep.data["window_files"] = windows_data
    rep.emit("total_window_vertices", total)
    rep.emit("audit", "ok" if audit_ok else "exceeded")
    rep.write_json(args.json)
    return EXIT_YES if audit_ok else EXIT_ERROR


# ---------------------------------------------------------------------------
# decompose


def _roundtrip_td(path: str, n: int) -> bool:
    td2, n2 = read_td(path)
    tmp = path + ".rt"
    write_td(tmp, td2, n2)
    try:
        same = Path(tmp).read_bytes() == Path(path).read_bytes()
    finally:
        os.remove(tmp)
    return same and n2 == n


def cmd_decompose(args) -> int:
    rep = Report()
    cloud, inst = _load_instance(args.points, args.model)
    rep.emit("command", "decompose")
    rep.emit("kind", args.kind)
    rep.emit("model", args.model)
    rep.emit("n", inst.n)
    rep.emit("m", inst.graph.m)
    if args.kind == "tree":
        result = exact_treewidth(inst.graph, None)
        ok, msg = verify_tree_decomposition(inst.graph, result.td)
        if not ok:
            raise RuntimeError(f"produced decomposition failed verification: {msg}")
        path = args.out + ".td"
        write_td(path, result.td, inst.n)
        rep.emit("width", result.width)
        rep.emit("exact", "yes" if result.exact else "no", raw=result.exact)
        rep.emit("bags", len(result.td.bags))
        rep.emit("verified", "yes", raw=True)
        rep.emit("roundtrip", "ok" if _roundtrip_td(path, inst.n) else "mismatch")
        rep.emit("out", path)
    elif args.kind == "nctd":
        nctd = build_cell_nctd(inst)
        ok, msg = verify_cell_nctd(inst, nctd)
        if not ok:
            raise RuntimeError(f"produced decomposition failed verification: {msg}")
        path = args.out + ".nctd"
        lines = [f"s nctd {len(nctd)} {nctd.ell} {nctd.root + 1}"]
        for i in range(len(nctd)):
            cells = " ".join(f"{a},{b}" for a, b in sorted(nctd.cells_of[i]))
            kids = " ".join(str(c + 1) for c in nctd.children[i]) or "-"
            pay = "-" if nctd.payload[i] is None else f"{nctd.payload[i][0]},{nctd.payload[i][1]}"
            lines.append(f"n {i + 1} {nctd.kinds[i]} {pay} [{kids}] {cells}".rstrip())
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
        rep.emit("nodes", len(nctd))
        rep.emit("ell", nctd.ell)
        rep.emit("verified", "yes", raw=True)
        rep.emit("out", path)
    elif args.kind == "cell-graph":
        cg = cell_graph(inst)
        gr_path = args.out + ".gr"
        cells_path = args.out + ".cells"
        write_gr(gr_path, cg.graph, comment="cell graph: one vertex per nonempty cell")
        Path(cells_path).write_text(
            "".join(f"{i + 1} {a} {b}\n" for i, (a, b) in enumerate(cg.cells)),
            encoding="utf-8",
        )
        rep.emit("cells", cg.graph.n)
        rep.emit("cell_edges", cg.graph.m)
        rep.emit("out", gr_path)
        rep.emit("cells_out", cells_path)
    elif args.kind == "backbone":
        sub, kept = minimal_backbone(inst)
        if not is_backbone(inst, kept):
            raise RuntimeError("backbone failed its own audit")
        per_cell = {}
        for v in range(sub.n):
            c = sub.rep.cells[v]
            per_cell[c] = per_cell.get(c, 0) + 1
        per_cell_max = max(per_cell.values(), default=0)
        max_deg = max((len(sub.graph.adj(v)) for v in range(sub.n)), default=0)
        pts_path = args.out + ".points"
        gr_path = args.out + ".gr"
        write_point_file(
            pts_path,
            PointCloud(tuple(cloud.points[v] for v in kept)),
            comment=f"backbone of {args.points} ({len(kept)} of {inst.n} points)",
        )
        write_gr(gr_path, sub.graph, comment="backbone-induced subgraph")
        rep.emit("kept", len(kept))
        rep.emit("vertices", ",".join(str(v + 1) for v in kept), raw=[v + 1 for v in kept])
        rep.emit("per_cell_max", per_cell_max)
        rep.emit("within_24", "yes" if per_cell_max <= 24 else "no", raw=per_cell_max <= 24)
        rep.emit("max_degree", max_deg)
        rep.emit("within_599", "yes" if max_deg <= 599 else "no", raw=max_deg <= 599)
        rep.emit("verified", "yes", raw=True)
        rep.emit("out", pts_path)
        rep.emit("gr_out", gr_path)
    else:
        raise ValueError(f"unknown kind {args.kind!r}")
    rep.write_json(args.json)
    return EXIT_YES


# ---------------------------------------------------------------------------
# bench


_BENCH_COLUMNS = (
    ("seed", 6), ("n", 5), ("span", 6), ("problem", 13), ("k", 3),
    ("model", 6), ("m", 6), ("answer", 6), ("time_s", 8),
    ("states", 7), ("support", 7),
)


def _bench_row(values) -> str:
    return "  ".join(str(v).ljust(w) for (_, w), v in zip(_BENCH_COLUMNS, values)).rstrip()


def _parse_suite(path: str):
    """One instance per line: ``seed n span k problem [model]``."""
    rows = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) not in (5, 6):
            raise ValueError(
                f"{path}:{lineno}: want 'seed n span k problem [model]', got {raw!r}"
            )
        seed, n, span, k = int(fields[0]), int(fields[1]), float(fields[2]), int(fields[3])
        problem = fields[4]
        model = fields[5] if len(fields) == 6 else "disk"
        if problem not in PROBLEMS:
            raise ValueError(f"{path}:{lineno}: unknown problem {problem!r}")
        if model not in MODELS:
            raise ValueError(f"{path}:{lineno}: unknown model {model!r}")
        rows.append((seed, n, span, k, problem, model))
    return rows


def cmd_bench(args) -> int:
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    suite = _parse_suite(args.suite)
    print(_bench_row(name for name, _ in _BENCH_COLUMNS))
    records = []
    for seed, n, span, k, problem, model in suite:
        cloud = _gen_cloud(n, (0.0, 0.0, span, span), seed)
        inst = instance_from_points(cloud, GeometricModel(model))
        stats: dict = {}
        t0 = time.perf_counter()
        res = _dispatch_solve(
            problem, inst, k, witness=False, jobs=jobs, faithful_caps=True,
            stats=stats,
        )
        elapsed = time.perf_counter() - t0
        states = stats.get("states_peak", "-")
        support = stats.get("support_peak", "-")
        answer = "yes" if res.answer else "no"
        print(
            _bench_row(
                (seed, n, f"{span:g}", problem, k, model, inst.graph.m,
                 answer, f"{elapsed:.3f}", states, support)
            )
        )
        records.append(
            {
                "seed": seed, "n": n, "span": span, "problem": problem,
                "k": k, "model": model, "m": inst.graph.m,
                "answer": bool(res.answer), "time_s": elapsed,
                "states_peak": stats.get("states_peak"),
                "support_peak": stats.get("support_peak"),
            }
        )
    if args.json:
        Path(args.json).write_text(
            json.dumps({"command": "bench", "rows": records}, indent=2) + "\n",
            encoding="utf-8",
        )
    return EXIT_YES


# ---------------------------------------------------------------------------
# parser


def _add_common(sub, *, model=True, jsonf=True):
    if model:
        sub.add_argument(
            "--model", choices=MODELS, default=_env_str("MODEL", "disk"),
            help="geometric model building the graph (default: disk)",
        )
    if jsonf:
        sub.add_argument(
            "--json", default=_env_str("JSON", None), metavar="FILE",
            help="also write the report as structured JSON",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridcycles",
        description=(
            "Subexponential parameterized cycle problems on unit disk and "
            "unit square graphs. Exit codes: 0 yes/success, 1 no, 2 error, "
            "3 oracle disagreement."
        ),
    )
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate a uniform random point cloud")
    gen.add_argument("--n", type=int, default=_env_int("N", None), required=_env("N") is None)
    gen.add_argument("--seed", type=int, default=_env_int("SEED", 0),
                     help="64-bit seed for the PCG64 generator (default: 0)")
    gen.add_argument("--region", default=_env_str("REGION", "0,0,10,10"),
                     help="axis-aligned box 'x0,y0,x1,y1' (default: 0,0,10,10)")
    gen.add_argument("--out", required=True, help="point file to write")
    _add_common(gen)
    gen.set_defaults(func=cmd_gen)

    solve = subs.add_parser("solve", help="decide one problem on one point cloud")
    solve.add_argument("points", help="point file (one 'x y' per line)")
    solve.add_argument("--problem", choices=PROBLEMS,
                       default=_env_str("PROBLEM", None),
                       required=_env("PROBLEM") is None)
    solve.add_argument("--k", type=int, default=_env_int("K", None),
                       required=_env("K") is None)
    solve.add_argument("--witness", action="store_true",
                       default=_env_bool("WITNESS", False),
                       help="also compute and print a certificate")
    solve.add_argument("--check", action="store_true",
                       default=_env_bool("CHECK", False),
                       help="cross-check against the brute-force oracle")
    solve.add_argument("--faithful-caps", action=argparse.BooleanOptionalAction,
                       default=_env_bool("FAITHFUL_CAPS", True),
                       help="keep the theory-faithful DP state caps (default: on)")
    solve.add_argument("--jobs", type=int, default=_env_int("JOBS", None),
                       help="parallel DP runs (default: all cores); never changes answers")
    _add_common(solve)
    solve.set_defaults(func=cmd_solve)

    kern = subs.add_parser("kernelize", help="export Turing-kernel windows plus a size audit")
    kern.add_argument("points")
    kern.add_argument("--problem", choices=sorted(KERNEL_PROBLEMS),
                      default=_env_str("PROBLEM", "exact-cycle"))
    kern.add_argument("--k", type=int, default=_env_int("K", None),
                      required=_env("K") is None)
    kern.add_argument("--out", required=True, help="prefix for window files")
    _add_common(kern)
    kern.set_defaults(func=cmd_kernelize)

    dec = subs.add_parser("decompose", help="export a decomposition or structure file")
    dec.add_argument("points")
    dec.add_argument("--kind", choices=DECOMPOSE_KINDS, required=True)
    dec.add_argument("--out", required=True, help="prefix for export files")
    _add_common(dec)
    dec.set_defaults(func=cmd_decompose)

    bench = subs.add_parser("bench", help="run a suite file and print a timing table")
    bench.add_argument("--suite", required=True,
                       help="file with 'seed n span k problem [model]' per line")
    bench.add_argument("--jobs", type=int, default=_env_int("JOBS", None))
    _add_common(bench, model=False)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error={exc}")
        print(f"gridcycles: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
