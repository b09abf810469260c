"""Command-line interface: gen / build / query / bench.

Exit codes: 0 ok, 1 usage error, 2 data error, 3 correctness divergence.
``GPTREE_LOG`` selects the logging level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from .baseline import EpsDistance, Knn, Range
from .bench import (
    BenchmarkDivergence,
    DatasetError,
    ENGINE_GPTREE,
    ENGINE_ORACLE,
    ENGINE_STR,
    MetricsReport,
    Workload,
    export_reports,
    ingest,
    result_json_line,
    run_benchmark,
)
from .geometry import Envelope, GeometryError, THETA_CONTAINS, THETA_INTERSECTS
from .grid import DecompositionConfig, GridExtent, WORLD_EXTENT
from .queries import QueryStats, build_ghsi, eps_distance_query, knn_query, range_query
from .snapshot import save_index
from .synth import SynthSpec, generate_synthetic
from .tree import build, optimize_tree, prune, stats as tree_stats
from .wkt import format_wkt, parse_wkt

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DIVERGENCE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we map usage to 1
        raise _UsageError(message)


def _parse_extent(text: str) -> GridExtent:
    parts = text.split(",")
    if len(parts) != 4:
        raise _UsageError("--extent needs minx,miny,maxx,maxy")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise _UsageError(f"bad extent value in {text!r}") from None
    return GridExtent(Envelope(*vals))


def _parse_mix(text: str) -> dict[str, float]:
    mix = {}
    names = {"point": "Point", "linestring": "LineString", "polygon": "Polygon"}
    for part in text.split(","):
        name, _, weight = part.partition(":")
        key = names.get(name.strip().lower())
        if key is None:
            raise _UsageError(f"unknown kind {name!r} in --mix")
        mix[key] = float(weight) if weight else 1.0
    return mix


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--extent", type=str, default=None, help="minx,miny,maxx,maxy (default world lon/lat)")
    p.add_argument("--seg", type=int, default=20)
    p.add_argument("--max-level", type=int, default=16)
    p.add_argument("--point-level", type=int, default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="gptree", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic WKT dataset")
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--mix", type=str, default="point:1")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--clusters", type=int, default=8)
    gen.add_argument("--avg-segments", type=int, default=8)
    gen.add_argument("--extent", type=str, default=None)
    gen.add_argument("--out", type=str, required=True)

    bld = sub.add_parser("build", help="build an index and write its snapshot")
    bld.add_argument("--data", type=str, required=True)
    bld.add_argument("--format", choices=["wkt-lines", "csv"], default="wkt-lines")
    bld.add_argument("--out", type=str, required=True)
    _add_common(bld)

    qry = sub.add_parser("query", help="run one ad-hoc query, print a JSON line")
    qry.add_argument("--data", type=str, required=True)
    qry.add_argument("--format", choices=["wkt-lines", "csv"], default="wkt-lines")
    qry.add_argument("--wkt", type=str, required=True, help="query geometry as WKT")
    qry.add_argument("--type", choices=["range", "dist", "knn"], default="range")
    qry.add_argument("--theta", choices=["intersects", "contains"], default="intersects")
    qry.add_argument("--eps", type=float, default=0.03)
    qry.add_argument("--k", type=int, default=20)
    qry.add_argument("--ghsi-level", type=int, default=11)
    qry.add_argument("--explain", action="store_true", help="also print per-candidate diagnostics")
    _add_common(qry)

    ben = sub.add_parser("bench", help="run a benchmark workload")
    ben.add_argument("--data", type=str, required=True)
    ben.add_argument("--format", choices=["wkt-lines", "csv"], default="wkt-lines")
    ben.add_argument("--queries", type=str, required=True, help="WKT file of query geometries")
    ben.add_argument("--type", choices=["range", "dist", "knn"], default="range")
    ben.add_argument("--theta", choices=["intersects", "contains"], default="intersects")
    ben.add_argument("--eps", type=float, default=0.03)
    ben.add_argument("--k", type=int, default=20)
    ben.add_argument("--ghsi-level", type=int, default=11)
    ben.add_argument("--engine", type=str, default="all", help="gptree,str,oracle or 'all'")
    ben.add_argument("--workers", type=int, default=1)
    ben.add_argument("--repetitions", type=int, default=1)
    ben.add_argument("--seg", type=str, default="20", help="SEG value or comma list for a sweep")
    ben.add_argument("--max-level", type=int, default=16)
    ben.add_argument("--point-level", type=int, default=None)
    ben.add_argument("--extent", type=str, default=None)
    ben.add_argument("--out", type=str, default=None)
    ben.add_argument("--out-format", dest="out_format", choices=["json", "csv"], default="csv")
    return parser


def _cmd_gen(args) -> int:
    extent = _parse_extent(args.extent) if args.extent else WORLD_EXTENT
    spec = SynthSpec(
        count=args.count,
        kinds=_parse_mix(args.mix),
        extent=extent,
        seed=args.seed,
        cluster_count=args.clusters,
        avg_segments=args.avg_segments,
    )
    objects = generate_synthetic(spec)
    Path(args.out).write_text("\n".join(format_wkt(o.geometry) for o in objects) + "\n")
    print(f"wrote {len(objects)} objects to {args.out}")
    return EXIT_OK


def _load(args) -> list:
    return ingest(args.data, args.format)


def _cfg(args) -> DecompositionConfig:
    return DecompositionConfig(seg=int(args.seg) if isinstance(args.seg, str) else args.seg,
                               max_level=args.max_level, point_level=args.point_level)


def _cmd_build(args) -> int:
    extent = _parse_extent(args.extent) if args.extent else WORLD_EXTENT
    objects = _load(args)
    t0 = time.perf_counter()
    tree, table = build(objects, _cfg(args), extent)
    optimize_tree(tree)
    prune(tree)
    millis = (time.perf_counter() - t0) * 1e3
    save_index(tree, table, args.out)
    ts = tree_stats(tree)
    print(
        json.dumps(
            {
                "objects": len(objects),
                "buildMillis": round(millis, 3),
                "height": ts.height,
                "nodeCount": ts.node_count,
                "leafCount": ts.leaf_count,
                "memoryBytes": ts.memory_bytes,
                "subRoots": [sub.prefix.text() for sub in tree.sub_roots],
                "snapshot": args.out,
            }
        )
    )
    return EXIT_OK


def _cmd_query(args) -> int:
    extent = _parse_extent(args.extent) if args.extent else WORLD_EXTENT
    objects = _load(args)
    q = parse_wkt(args.wkt)
    tree, table = build(objects, _cfg(args), extent)
    optimize_tree(tree)
    prune(tree)
    theta = THETA_CONTAINS if args.theta == "contains" else THETA_INTERSECTS
    st = QueryStats(keep_candidates=args.explain)
    t0 = time.perf_counter()
    if args.type == "range":
        res = range_query(tree, table, q, theta, stats=st)
    elif args.type == "dist":
        res = eps_distance_query(tree, table, q, args.eps, stats=st)
    else:
        ghsi = build_ghsi(objects, args.ghsi_level, extent)
        res = knn_query(tree, table, ghsi, q, args.k, stats=st)
    elapsed = (time.perf_counter() - t0) * 1e6
    print(result_json_line(0, args.type, elapsed, res, ENGINE_GPTREE))
    if args.explain:
        for cand in st.candidates:
            print(
                json.dumps(
                    {"sId": cand.s_id, "hitTag": cand.hit_tag, "overlapCellCount": len(cand.overlapping_cells)}
                )
            )
    return EXIT_OK


def _cmd_bench(args) -> int:
    extent = _parse_extent(args.extent) if args.extent else WORLD_EXTENT
    objects = _load(args)
    query_args = argparse.Namespace(data=args.queries, format="wkt-lines")
    queries = [o.geometry for o in _load(query_args)]
    if not queries:
        raise DatasetError("no queries parsed")
    engines = (
        (ENGINE_GPTREE, ENGINE_STR, ENGINE_ORACLE)
        if args.engine == "all"
        else tuple(e.strip() for e in args.engine.split(","))
    )
    theta = THETA_CONTAINS if args.theta == "contains" else THETA_INTERSECTS
    seg_values = [int(s) for s in str(args.seg).split(",")]
    reports: list[MetricsReport] = []
    for seg in seg_values:
        w = Workload(
            objects=objects,
            queries=queries,
            query_type=args.type,
            theta=theta,
            eps=args.eps,
            k=args.k,
            engines=engines,
            workers=args.workers,
            repetitions=args.repetitions,
            seg=seg,
            max_level=args.max_level,
            point_level=args.point_level,
            ghsi_level=args.ghsi_level,
            extent=extent,
            label=Path(args.data).stem,
        )
        result = run_benchmark(w)
        for engine in engines:
            rep = result[engine]
            reports.append(rep)
            print(
                f"{engine:7s} seg={seg:<3d} {rep.query_type:5s} queries={rep.queries} "
                f"throughput/min={rep.throughput_per_minute:.1f} thr={rep.thr:.3f} "
                f"fhr={rep.fhr:.3f} ucr={rep.ucr:.3f} mem={rep.memory_total}"
            )
    if args.out:
        export_reports(reports, args.out_format, args.out)
        print(f"wrote {len(reports)} report rows to {args.out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("GPTREE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "build":
            return _cmd_build(args)
        if args.command == "query":
            return _cmd_query(args)
        if args.command == "bench":
            return _cmd_bench(args)
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BenchmarkDivergence as exc:
        print(f"correctness failure: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (DatasetError, GeometryError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
