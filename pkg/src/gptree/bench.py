"""Benchmark machinery: ingestion, workload execution, metrics, export.

Every run cross-checks engine answers against the brute-force oracle
before any performance number is reported; divergence is a hard failure.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .baseline import EpsDistance, Knn, QueryMode, Range, StrQueryStats, StrTree, str_build, str_query, oracle_query
from .geometry import Geometry, SpatialObject, THETA_INTERSECTS, distance, envelope
from .grid import DecompositionConfig, GridExtent, WORLD_EXTENT
from .queries import GHSI, QueryStats, build_ghsi, eps_distance_query, ghsi_analytic_bytes, knn_query, range_query
from .tree import GPTree, LookupTable, build, optimize_tree, prune, stats as tree_stats

log = logging.getLogger("gptree.bench")

ENGINE_GPTREE = "gptree"
ENGINE_STR = "str"
ENGINE_ORACLE = "oracle"

RANGE = "range"
DIST = "dist"
KNN = "knn"


class DatasetError(Exception):
    """Unreadable or unusable input data."""


class BenchmarkDivergence(Exception):
    """An engine answered differently from the oracle."""

    def __init__(self, engine: str, query_id: int):
        super().__init__(f"engine {engine!r} diverged from the oracle at query {query_id}")
        self.engine = engine
        self.query_id = query_id


# ---------------------------------------------------------------------------
# ingestion


def ingest(path: str | Path, fmt: str = "wkt-lines") -> list[SpatialObject]:
    """Load a dataset file; invalid lines are skipped with a warning.

    ``wkt-lines`` assigns sequential ids; ``csv`` expects an id,wkt
    header.  More than 10% invalid lines aborts the load.
    """
    from .wkt import parse_wkt

    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    objects: list[SpatialObject] = []
    bad = 0
    total = 0
    if fmt == "wkt-lines":
        next_id = 0
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            total += 1
            try:
                objects.append(SpatialObject(next_id, parse_wkt(line)))
                next_id += 1
            except ValueError as exc:
                bad += 1
                log.warning("%s:%d: skipped invalid line: %s", path, lineno, exc)
    elif fmt == "csv":
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None or [f.strip().lower() for f in reader.fieldnames] != ["id", "wkt"]:
            raise DatasetError(f"{path}: csv needs an 'id,wkt' header")
        for lineno, row in enumerate(reader, start=2):
            total += 1
            try:
                objects.append(SpatialObject(int(row["id"]), parse_wkt(row["wkt"])))
            except (ValueError, TypeError) as exc:
                bad += 1
                log.warning("%s:%d: skipped invalid row: %s", path, lineno, exc)
    else:
        raise DatasetError(f"unknown dataset format {fmt!r}")
    if total and bad / total > 0.10:
        raise DatasetError(f"{path}: {bad}/{total} invalid lines (>10%)")
    if bad:
        log.warning("%s: skipped %d of %d lines", path, bad, total)
    return objects


# ---------------------------------------------------------------------------
# workload definition


@dataclass
class Workload:
    objects: list[SpatialObject]
    queries: list[Geometry]
    query_type: str = RANGE  # range | dist | knn
    theta: str = THETA_INTERSECTS
    eps: float = 0.03
    k: int = 20
    engines: tuple[str, ...] = (ENGINE_GPTREE, ENGINE_STR, ENGINE_ORACLE)
    workers: int = 1
    repetitions: int = 1
    seg: int = 20
    max_level: int = 16
    point_level: int | None = None
    ghsi_level: int = 11
    str_capacity: int = 10
    extent: GridExtent = WORLD_EXTENT
    label: str = ""

    def __post_init__(self):
        if self.query_type == DIST and self.eps <= 0:
            raise ValueError("dist workloads need eps > 0")
        if self.query_type == KNN and self.k < 1:
            raise ValueError("knn workloads need k >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def mode(self) -> QueryMode:
        if self.query_type == RANGE:
            return Range(self.theta)
        if self.query_type == DIST:
            return EpsDistance(self.eps)
        if self.query_type == KNN:
            return Knn(self.k)
        raise ValueError(f"unknown query type {self.query_type!r}")

    def config(self) -> DecompositionConfig:
        return DecompositionConfig(seg=self.seg, max_level=self.max_level, point_level=self.point_level)


@dataclass
class MetricsReport:
    engine: str
    label: str
    query_type: str
    param: str
    queries: int
    build_millis: float
    total_micros: float
    filter_micros: float
    refine_micros: float
    throughput_per_minute: float
    n_c: int
    n_t: int
    n_u: int
    n_f: int
    thr: float
    fhr: float
    ucr: float
    memory_bytes: dict[str, int] = field(default_factory=dict)
    extra: dict[str, float] = field(default_factory=dict)

    @property
    def memory_total(self) -> int:
        return sum(self.memory_bytes.values())

    def flat(self) -> dict:
        row = {
            "engine": self.engine,
            "label": self.label,
            "query_type": self.query_type,
            "param": self.param,
            "queries": self.queries,
            "build_millis": self.build_millis,
            "total_micros": self.total_micros,
            "filter_micros": self.filter_micros,
            "refine_micros": self.refine_micros,
            "throughput_per_minute": self.throughput_per_minute,
            "n_c": self.n_c,
            "n_t": self.n_t,
            "n_u": self.n_u,
            "n_f": self.n_f,
            "thr": self.thr,
            "fhr": self.fhr,
            "ucr": self.ucr,
            "memory_total": self.memory_total,
        }
        for name, val in sorted(self.memory_bytes.items()):
            row[f"memory_{name}"] = val
        for name, val in sorted(self.extra.items()):
            row[name] = val
        return row


def _rates(n_c: int, n_t: int, n_u: int, n_f: int) -> tuple[float, float, float]:
    if n_c <= 0:
        return (0.0, 0.0, 0.0)
    return (n_t / n_c, n_f / n_c, n_u / n_c)


# ---------------------------------------------------------------------------
# engines


@dataclass
class _GPEngine:
    tree: GPTree
    table: LookupTable
    ghsi: GHSI | None


def _build_gptree(w: Workload) -> tuple[_GPEngine, float]:
    t0 = time.perf_counter()
    tree, table = build(w.objects, w.config(), w.extent)
    optimize_tree(tree)
    prune(tree)
    ghsi = build_ghsi(w.objects, w.ghsi_level, w.extent) if w.query_type == KNN else None
    millis = (time.perf_counter() - t0) * 1e3
    return _GPEngine(tree, table, ghsi), millis


def _result_key(w: Workload, res: list[SpatialObject], q: Geometry):
    if w.query_type == KNN:
        return [(distance(q, o.geometry), o.id) for o in res]
    return sorted(o.id for o in res)


def _knn_equal(a: list[tuple[float, int]], b: list[tuple[float, int]]) -> bool:
    if len(a) != len(b):
        return False
    return all(math.isclose(da, db, rel_tol=1e-9, abs_tol=1e-12) for (da, _), (db, _) in zip(a, b))


def _run_queries(runner: Callable[[int, Geometry], list], w: Workload) -> tuple[list, float]:
    """Execute all queries (repeated ``repetitions`` times) and time the wall."""
    indexed = list(enumerate(w.queries))
    warmup = indexed[: min(3, len(indexed))]
    for qid, q in warmup:
        runner(qid, q)
    t0 = time.perf_counter()
    results = [None] * len(indexed)
    for _ in range(w.repetitions):
        if w.workers == 1:
            for qid, q in indexed:
                results[qid] = runner(qid, q)
        else:
            with ThreadPoolExecutor(max_workers=w.workers) as pool:
                for qid, res in pool.map(lambda item: (item[0], runner(item[0], item[1])), indexed):
                    results[qid] = res
    wall = time.perf_counter() - t0
    return results, wall


def run_benchmark(w: Workload) -> dict[str, MetricsReport]:
    """Build each engine, run the workload, gate on oracle equality, report."""
    mode = w.mode()
    reports: dict[str, MetricsReport] = {}
    param = {RANGE: f"theta={w.theta} seg={w.seg}", DIST: f"eps={w.eps} seg={w.seg}", KNN: f"k={w.k} seg={w.seg}"}[
        w.query_type
    ]

    oracle_results = [oracle_query(w.objects, q, mode) for q in w.queries]
    oracle_keys = [_result_key(w, res, q) for res, q in zip(oracle_results, w.queries)]

    def check(engine: str, results: list) -> None:
        for qid, (res, q) in enumerate(zip(results, w.queries)):
            key = _result_key(w, res, q)
            ok = _knn_equal(key, oracle_keys[qid]) if w.query_type == KNN else key == oracle_keys[qid]
            if not ok:
                raise BenchmarkDivergence(engine, qid)

    for engine in w.engines:
        if engine == ENGINE_GPTREE:
            gp, build_ms = _build_gptree(w)
            agg = QueryStats()

            def gp_runner(qid: int, q: Geometry):
                st = QueryStats()
                if w.query_type == RANGE:
                    res = range_query(gp.tree, gp.table, q, w.theta, stats=st)
                elif w.query_type == DIST:
                    res = eps_distance_query(gp.tree, gp.table, q, w.eps, stats=st)
                else:
                    res = knn_query(gp.tree, gp.table, gp.ghsi, q, w.k, stats=st)
                agg.merge(st)
                return res

            results, wall = _run_queries(gp_runner, w)
            check(engine, results)
            ts = tree_stats(gp.tree)
            memory = {"tree": ts.memory_bytes, "lookup_table": gp.table.memory_bytes()}
            if gp.ghsi is not None:
                memory["ghsi"] = ghsi_analytic_bytes(gp.ghsi.level)
            n_q = len(w.queries) * w.repetitions
            reports[engine] = MetricsReport(
                engine=engine,
                label=w.label,
                query_type=w.query_type,
                param=param,
                queries=n_q,
                build_millis=build_ms,
                total_micros=wall * 1e6,
                filter_micros=agg.filter_seconds * 1e6,
                refine_micros=agg.refine_seconds * 1e6,
                throughput_per_minute=(n_q / wall * 60.0) if wall > 0 else math.inf,
                n_c=agg.n_candidates,
                n_t=agg.n_true_hits,
                n_u=agg.n_uncertain_pass,
                n_f=agg.n_uncertain_fail,
                thr=_rates(agg.n_candidates, agg.n_true_hits, agg.n_uncertain_pass, agg.n_uncertain_fail)[0],
                fhr=_rates(agg.n_candidates, agg.n_true_hits, agg.n_uncertain_pass, agg.n_uncertain_fail)[1],
                ucr=_rates(agg.n_candidates, agg.n_true_hits, agg.n_uncertain_pass, agg.n_uncertain_fail)[2],
                memory_bytes=memory,
                extra={
                    "indexed_cells": float(sum(len(e.cells) for e in gp.table.entries.values())),
                    "tree_height": float(ts.height),
                    "tree_nodes": float(ts.node_count),
                    "max_descent_visits": float(agg.max_descent_visits),
                    "knn_step3_cells": float(agg.knn_step3_cells),
                },
            )
        elif engine == ENGINE_STR:
            t0 = time.perf_counter()
            st_tree = str_build(w.objects, w.str_capacity)
            build_ms = (time.perf_counter() - t0) * 1e3
            st_stats = StrQueryStats()

            def str_runner(qid: int, q: Geometry):
                return str_query(st_tree, q, mode, stats=st_stats)

            results, wall = _run_queries(str_runner, w)
            check(engine, results)
            n_q = len(w.queries) * w.repetitions
            reports[engine] = MetricsReport(
                engine=engine,
                label=w.label,
                query_type=w.query_type,
                param=param,
                queries=n_q,
                build_millis=build_ms,
                total_micros=wall * 1e6,
                filter_micros=st_stats.filter_seconds * 1e6,
                refine_micros=st_stats.refine_seconds * 1e6,
                throughput_per_minute=(n_q / wall * 60.0) if wall > 0 else math.inf,
                n_c=st_stats.n_candidates,
                n_t=0,
                n_u=st_stats.n_pass,
                n_f=st_stats.n_fail,
                thr=_rates(st_stats.n_candidates, 0, st_stats.n_pass, st_stats.n_fail)[0],
                fhr=_rates(st_stats.n_candidates, 0, st_stats.n_pass, st_stats.n_fail)[1],
                ucr=_rates(st_stats.n_candidates, 0, st_stats.n_pass, st_stats.n_fail)[2],
                memory_bytes={"nodes": st_tree.memory_bytes()},
            )
        elif engine == ENGINE_ORACLE:
            def oracle_runner(qid: int, q: Geometry):
                return oracle_query(w.objects, q, mode)

            results, wall = _run_queries(oracle_runner, w)
            check(engine, results)
            n_q = len(w.queries) * w.repetitions
            reports[engine] = MetricsReport(
                engine=engine,
                label=w.label,
                query_type=w.query_type,
                param=param,
                queries=n_q,
                build_millis=0.0,
                total_micros=wall * 1e6,
                filter_micros=0.0,
                refine_micros=wall * 1e6,
                throughput_per_minute=(n_q / wall * 60.0) if wall > 0 else math.inf,
                n_c=len(w.objects) * n_q,
                n_t=0,
                n_u=0,
                n_f=0,
                thr=0.0,
                fhr=0.0,
                ucr=0.0,
                memory_bytes={},
            )
        else:
            raise ValueError(f"unknown engine {engine!r}")
    return reports


# ---------------------------------------------------------------------------
# export


def export_reports(reports: Sequence[MetricsReport], fmt: str, path: str | Path) -> None:
    """Write one row per report; csv columns are the union of all fields."""
    path = Path(path)
    rows = [r.flat() for r in reports]
    if fmt == "json":
        path.write_text(json.dumps(rows, indent=2) + "\n")
        return
    if fmt == "csv":
        fields: list[str] = []
        for row in rows:
            for key in row:
                if key not in fields:
                    fields.append(key)
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            for row in rows:
                writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
        return
    raise ValueError(f"unknown export format {fmt!r}")


def result_json_line(query_id: int, query_type: str, elapsed_micros: float, results: Sequence[SpatialObject], engine: str) -> str:
    return json.dumps(
        {
            "queryId": query_id,
            "type": query_type,
            "engine": engine,
            "elapsedMicros": round(elapsed_micros, 3),
            "resultIds": [o.id for o in results],
        }
    )
