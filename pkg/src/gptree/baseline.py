"""Correctness references: an exhaustive oracle and an STR-packed R-tree."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Sequence

from .geometry import (
    Envelope,
    Geometry,
    SpatialObject,
    THETA_INTERSECTS,
    TOL,
    distance,
    envelope,
    exact_predicate,
)


@dataclass(frozen=True)
class Range:
    theta: str = THETA_INTERSECTS


@dataclass(frozen=True)
class EpsDistance:
    eps: float


@dataclass(frozen=True)
class Knn:
    k: int


QueryMode = Range | EpsDistance | Knn


def oracle_query(objects: Sequence[SpatialObject], q: Geometry, mode: QueryMode):
    """Exhaustive scan with exact predicates; the ground truth for every engine.

    Range and eps results come back sorted by id; Knn is ordered by
    (distance, id).
    """
    if isinstance(mode, Range):
        q_env = envelope(q)
        out = [
            o
            for o in objects
            if q_env.intersects(envelope(o.geometry), TOL)
            and exact_predicate(q, o.geometry, mode.theta)
        ]
        return sorted(out, key=lambda o: o.id)
    if isinstance(mode, EpsDistance):
        if mode.eps <= 0:
            raise ValueError("eps must be positive")
        q_env = envelope(q)
        out = [
            o
            for o in objects
            if q_env.distance_to_env(envelope(o.geometry)) <= mode.eps
            and distance(q, o.geometry) <= mode.eps
        ]
        return sorted(out, key=lambda o: o.id)
    if isinstance(mode, Knn):
        if mode.k < 1:
            raise ValueError("k must be at least 1")
        q_env = envelope(q)
        # envelope distance lower-bounds geometry distance, so scanning in
        # lower-bound order allows stopping once the k-th result beats it
        order = sorted(
            ((q_env.distance_to_env(envelope(o.geometry)), o.id, o) for o in objects),
            key=lambda t: (t[0], t[1]),
        )
        best: list[tuple[float, int, SpatialObject]] = []
        for lb, oid, o in order:
            if len(best) >= mode.k and lb > best[-1][0]:
                break
            d = distance(q, o.geometry)
            best.append((d, oid, o))
            best.sort(key=lambda t: (t[0], t[1]))
            del best[mode.k:]
        return [o for _, _, o in best]
    raise TypeError(f"unknown query mode {mode!r}")


# ---------------------------------------------------------------------------
# STR-packed R-tree


class StrNode:
    __slots__ = ("env", "entries", "is_leaf")

    def __init__(self, env: Envelope, entries: list, is_leaf: bool):
        self.env = env
        self.entries = entries  # leaf: (env, id); internal: (env, StrNode)
        self.is_leaf = is_leaf


@dataclass
class StrTree:
    root: StrNode | None
    node_capacity: int
    geometries: dict[int, Geometry]
    node_count: int = 0
    height: int = 0

    def memory_bytes(self) -> int:
        """24 B node header + 40 B per entry (4 doubles + one reference)."""
        total = 0
        stack = [self.root] if self.root else []
        while stack:
            node = stack.pop()
            total += 24 + 40 * len(node.entries)
            if not node.is_leaf:
                stack.extend(child for _, child in node.entries)
        return total


def _merge_env(envs: Sequence[Envelope]) -> Envelope:
    return Envelope(
        min(e.min_x for e in envs),
        min(e.min_y for e in envs),
        max(e.max_x for e in envs),
        max(e.max_y for e in envs),
    )


def _pack_level(items: list[tuple[Envelope, object]], cap: int, is_leaf: bool) -> list[StrNode]:
    """One sort-tile-recursive packing pass: x slices, then y runs of ``cap``."""
    n = len(items)
    leaf_count = math.ceil(n / cap)
    slice_count = math.ceil(math.sqrt(leaf_count))
    slice_size = slice_count * cap
    by_x = sorted(items, key=lambda it: (it[0].center()[0], it[0].center()[1]))
    nodes = []
    for s in range(0, n, slice_size):
        vertical = sorted(by_x[s : s + slice_size], key=lambda it: (it[0].center()[1], it[0].center()[0]))
        for i in range(0, len(vertical), cap):
            chunk = vertical[i : i + cap]
            nodes.append(StrNode(_merge_env([e for e, _ in chunk]), chunk, is_leaf))
    return nodes


def str_build(objects: Sequence[SpatialObject], node_capacity: int = 10) -> StrTree:
    """Bulk-load by sort-tile-recursive packing; leaves sit at one depth."""
    if node_capacity < 2:
        raise ValueError("node capacity must be at least 2")
    geoms = {o.id: o.geometry for o in objects}
    if not objects:
        return StrTree(None, node_capacity, geoms)
    items: list[tuple[Envelope, object]] = [(envelope(o.geometry), o.id) for o in objects]
    level = _pack_level(items, node_capacity, True)
    count = len(level)
    height = 1
    while len(level) > 1:
        level = _pack_level([(node.env, node) for node in level], node_capacity, False)
        count += len(level)
        height += 1
    return StrTree(level[0], node_capacity, geoms, node_count=count, height=height)


@dataclass
class StrQueryStats:
    n_candidates: int = 0
    n_pass: int = 0
    n_fail: int = 0
    filter_seconds: float = 0.0
    refine_seconds: float = 0.0


def _str_collect(tree: StrTree, window: Envelope) -> list[int]:
    out = []
    if tree.root is None:
        return out
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if not node.env.intersects(window, TOL):
            continue
        if node.is_leaf:
            out.extend(sid for env, sid in node.entries if env.intersects(window, TOL))
        else:
            stack.extend(child for env, child in node.entries if env.intersects(window, TOL))
    return out


def str_query(
    tree: StrTree,
    q: Geometry,
    mode: QueryMode,
    stats: StrQueryStats | None = None,
) -> list[SpatialObject]:
    """MBR filter plus full-geometry refinement (the coarse single-entry pipeline)."""
    import time

    if isinstance(mode, Range):
        t0 = time.perf_counter()
        cand = sorted(_str_collect(tree, envelope(q)))
        t1 = time.perf_counter()
        out = [sid for sid in cand if exact_predicate(q, tree.geometries[sid], mode.theta)]
        t2 = time.perf_counter()
        if stats is not None:
            stats.n_candidates += len(cand)
            stats.n_pass += len(out)
            stats.n_fail += len(cand) - len(out)
            stats.filter_seconds += t1 - t0
            stats.refine_seconds += t2 - t1
        return [SpatialObject(sid, tree.geometries[sid]) for sid in out]
    if isinstance(mode, EpsDistance):
        if mode.eps <= 0:
            raise ValueError("eps must be positive")
        t0 = time.perf_counter()
        cand = sorted(_str_collect(tree, envelope(q).dilated(mode.eps)))
        t1 = time.perf_counter()
        out = [sid for sid in cand if distance(q, tree.geometries[sid]) <= mode.eps]
        t2 = time.perf_counter()
        if stats is not None:
            stats.n_candidates += len(cand)
            stats.n_pass += len(out)
            stats.n_fail += len(cand) - len(out)
            stats.filter_seconds += t1 - t0
            stats.refine_seconds += t2 - t1
        return [SpatialObject(sid, tree.geometries[sid]) for sid in out]
    if isinstance(mode, Knn):
        if mode.k < 1:
            raise ValueError("k must be at least 1")
        if tree.root is None:
            return []
        q_env = envelope(q)
        # best-first by envelope distance; nodes (kind 0) pop before
        # objects (kind 1) at equal distance so id ties resolve correctly
        heap: list[tuple[float, int, int, object]] = [
            (q_env.distance_to_env(tree.root.env), 0, -1, tree.root)
        ]
        out: list[SpatialObject] = []
        counter = 0
        while heap and len(out) < mode.k:
            d, kind, sid, payload = heapq.heappop(heap)
            if kind == 1:
                out.append(SpatialObject(sid, payload))
                continue
            node = payload
            for env, child in node.entries:
                if node.is_leaf:
                    g = tree.geometries[child]
                    heapq.heappush(heap, (distance(q, g), 1, child, g))
                else:
                    heapq.heappush(heap, (q_env.distance_to_env(env), 0, counter, child))
                    counter += 1
        return out
    raise TypeError(f"unknown query mode {mode!r}")
