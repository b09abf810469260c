"""Filter-and-refine query processing over the prefix tree.

Filtering walks each query cell's code two bits per level from the
containing sub-root, collecting object references from the IL/BL/UL lists
along the path and breadth-first below it.  Matches certified by cell
types alone are true hits; the rest are refined exactly, restricted to
the overlapping cells.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .geometry import (
    Envelope,
    Geometry,
    POINT,
    POLYGON,
    Segment,
    SpatialObject,
    THETA_CONTAINS,
    THETA_INTERSECTS,
    clip_to_cells,
    distance,
    envelope,
    exact_predicate,
    point_in_polygon,
    sweep_line_intersects,
)
from .grid import (
    ROOT_CELL,
    CellCode,
    GridCell,
    GridExtent,
    ancestor_at,
    cell_bounds,
    cell_containing,
    cell_range_for_envelope,
    decompose,
    convert_cells,
    encode,
    extend_cells,
    is_ancestor,
    merge_cells,
    neighbors,
    quadrant_at,
)
from .tree import GPTree, IndexNode, LookupTable

TRUE_HIT = "TrueHit"
UNCERTAIN = "Uncertain"

_IL, _BL, _UL = 0, 1, 2


@dataclass(frozen=True)
class CandidateMatch:
    """One filtered object: its overlapping cells and the hit verdict."""

    s_id: int
    query_cells: tuple[GridCell, ...]
    overlapping_cells: tuple[GridCell, ...]
    hit_tag: str


@dataclass
class QueryStats:
    """Per-query instrumentation; counters merge additively across queries."""

    filter_seconds: float = 0.0
    refine_seconds: float = 0.0
    n_candidates: int = 0
    n_true_hits: int = 0
    n_uncertain_pass: int = 0
    n_uncertain_fail: int = 0
    max_descent_visits: int = 0
    query_cell_count: int = 0
    knn_step3_cells: int = 0
    knn_extension_rounds: int = 0
    keep_candidates: bool = False
    candidates: list[CandidateMatch] = field(default_factory=list)

    def merge(self, other: "QueryStats") -> None:
        self.filter_seconds += other.filter_seconds
        self.refine_seconds += other.refine_seconds
        self.n_candidates += other.n_candidates
        self.n_true_hits += other.n_true_hits
        self.n_uncertain_pass += other.n_uncertain_pass
        self.n_uncertain_fail += other.n_uncertain_fail
        self.max_descent_visits = max(self.max_descent_visits, other.max_descent_visits)
        self.query_cell_count += other.query_cell_count
        self.knn_step3_cells += other.knn_step3_cells
        self.knn_extension_rounds += other.knn_extension_rounds
        if self.keep_candidates:
            self.candidates.extend(other.candidates)


# ---------------------------------------------------------------------------
# true-hit rules
#
# A rule sees one overlapping (query cell, object cell) pair: the query
# cell with its interior flag, the level of the node where the reference
# was found, and which list held it.  It must only certify pairs whose
# intersection with the query region is guaranteed.

HitRule = Callable[[GridCell, int, int], bool]


def sound_range_rule(qc: GridCell, node_level: int, kind: int) -> bool:
    """Certify when the ancestor-or-equal cell is interior to its owner."""
    if kind == _UL:
        return False
    if kind == _IL:
        return node_level <= qc.cell.level or qc.is_interior
    return qc.is_interior and qc.cell.level <= node_level


def sound_eps_rule(qc: GridCell, node_level: int, kind: int) -> bool:
    """Distance-query variant: only interior query cells certify.

    Interior expanded cells lie wholly within eps of the query, so any
    object content they cover is a true hit; object-side interior cells
    covering dilation ring cells prove nothing about Euclidean distance.
    """
    if not qc.is_interior or kind == _UL:
        return False
    if kind == _IL:
        return True
    return qc.cell.level <= node_level


def literal_any_interior_rule(qc: GridCell, node_level: int, kind: int) -> bool:
    """The unsound reading: any interior cell in the pair certifies."""
    return qc.is_interior or kind == _IL


def no_true_hits_rule(qc: GridCell, node_level: int, kind: int) -> bool:
    return False


# ---------------------------------------------------------------------------
# prefix-search filter


class _Cand:
    __slots__ = ("query_cells", "cells", "true_hit")

    def __init__(self):
        self.query_cells: set[GridCell] = set()
        self.cells: set[GridCell] = set()
        self.true_hit = False


def _visit_node(node: IndexNode, node_cell: CellCode, qc: GridCell, rule: HitRule, acc: dict[int, _Cand]) -> None:
    deeper = node_cell if node_cell.level >= qc.cell.level else qc.cell
    for kind, ids in ((_IL, node.il), (_BL, node.bl), (_UL, node.ul)):
        if not ids:
            continue
        interior_obj = kind == _IL
        # UL entries inherit from an unknown ancestor cell, so the query
        # cell is the only safe overlap context for them
        cell = GridCell(qc.cell, qc.is_interior) if kind == _UL else GridCell(deeper, interior_obj)
        certify = rule(qc, node_cell.level, kind)
        for sid in ids:
            cand = acc.get(sid)
            if cand is None:
                cand = acc[sid] = _Cand()
            cand.query_cells.add(qc)
            cand.cells.add(cell)
            if certify:
                cand.true_hit = True


def _bfs_collect(node: IndexNode, node_cell: CellCode, qc: GridCell, rule: HitRule, acc: dict[int, _Cand]) -> None:
    stack = [(node, node_cell)]
    while stack:
        cur, cell = stack.pop()
        _visit_node(cur, cell, qc, rule, acc)
        if cur.children is not None:
            base = cell.code << 2
            lv = cell.level + 1
            for i, child in enumerate(cur.children):
                if child is not None:
                    stack.append((child, CellCode(lv, base | i)))


def _filter_cells(
    tree: GPTree,
    query_cells: Sequence[GridCell],
    rule: HitRule,
    stats: QueryStats | None,
) -> dict[int, _Cand]:
    acc: dict[int, _Cand] = {}
    for qc in query_cells:
        code = qc.cell
        for prefix, sub_node in tree.sub_roots:
            if prefix.level <= code.level:
                if not is_ancestor(prefix, code):
                    continue
                node = sub_node
                level = prefix.level
                visits = 1
                while True:
                    _visit_node(node, ancestor_at(code, level), qc, rule, acc)
                    if level == code.level:
                        if node.children is not None:
                            base_cell = ancestor_at(code, level)
                            base = base_cell.code << 2
                            for i, child in enumerate(node.children):
                                if child is not None:
                                    _bfs_collect(child, CellCode(level + 1, base | i), qc, rule, acc)
                        break
                    if node.children is None:
                        break
                    child = node.children[quadrant_at(code, level)]
                    if child is None:
                        break
                    node = child
                    level += 1
                    visits += 1
                if stats is not None and visits > stats.max_descent_visits:
                    stats.max_descent_visits = visits
            elif is_ancestor(code, prefix):
                _bfs_collect(sub_node, prefix, qc, rule, acc)
    return acc


def _candidates(acc: dict[int, _Cand]) -> list[CandidateMatch]:
    out = []
    for sid in sorted(acc):
        c = acc[sid]
        out.append(
            CandidateMatch(
                sid,
                tuple(sorted(c.query_cells)),
                tuple(sorted(c.cells)),
                TRUE_HIT if c.true_hit else UNCERTAIN,
            )
        )
    return out


# ---------------------------------------------------------------------------
# refinement


def refine_candidate(
    cand: CandidateMatch,
    q: Geometry,
    table: LookupTable,
    extent: GridExtent,
    theta: str = THETA_INTERSECTS,
) -> bool:
    """Exact verdict for an uncertain candidate.

    For intersection the test runs on the segments clipped to the
    overlapping cells: a sweep over the clipped sets finds boundary
    crossings, and representative points settle polygon containment.
    Containment falls back to the full exact predicate.
    """
    if cand.s_id not in table:
        raise KeyError(f"candidate id {cand.s_id} missing from lookup table")
    s = table[cand.s_id].geometry
    if theta == THETA_CONTAINS:
        return exact_predicate(q, s, THETA_CONTAINS)
    if q.kind == POINT or s.kind == POINT:
        return exact_predicate(q, s, THETA_INTERSECTS)
    rects = [cell_bounds(gc.cell, extent) for gc in cand.overlapping_cells]
    q_part = clip_to_cells(q, rects)
    s_part = clip_to_cells(s, rects)
    if sweep_line_intersects(q_part, s_part):
        return True
    if q.kind == POLYGON and point_in_polygon(s.first_vertex(), q):
        return True
    if s.kind == POLYGON and point_in_polygon(q.first_vertex(), s):
        return True
    return False


# ---------------------------------------------------------------------------
# range query


def range_query(
    tree: GPTree,
    table: LookupTable,
    q: Geometry,
    theta: str = THETA_INTERSECTS,
    stats: QueryStats | None = None,
    _rule: HitRule | None = None,
) -> list[SpatialObject]:
    """All objects satisfying ``theta`` against ``q``, sorted by id."""
    t0 = time.perf_counter()
    q_cells = decompose(q, tree.config, tree.extent)
    if _rule is None:
        # cell coverage cannot certify containment, only intersection
        rule = sound_range_rule if theta == THETA_INTERSECTS else no_true_hits_rule
    else:
        rule = _rule
    acc = _filter_cells(tree, q_cells, rule, stats)
    cands = _candidates(acc)
    t1 = time.perf_counter()

    out = []
    for cand in cands:
        if cand.hit_tag == TRUE_HIT:
            out.append(cand.s_id)
        elif refine_candidate(cand, q, table, tree.extent, theta):
            out.append(cand.s_id)
            if stats is not None:
                stats.n_uncertain_pass += 1
        else:
            if stats is not None:
                stats.n_uncertain_fail += 1
    t2 = time.perf_counter()
    if stats is not None:
        stats.filter_seconds += t1 - t0
        stats.refine_seconds += t2 - t1
        stats.query_cell_count += len(q_cells)
        stats.n_candidates += len(cands)
        stats.n_true_hits += sum(1 for c in cands if c.hit_tag == TRUE_HIT)
        if stats.keep_candidates:
            stats.candidates.extend(cands)
    return [SpatialObject(sid, table[sid].geometry) for sid in out]


# ---------------------------------------------------------------------------
# eps-distance query


def eps_distance_query(
    tree: GPTree,
    table: LookupTable,
    q: Geometry,
    eps: float,
    stats: QueryStats | None = None,
) -> list[SpatialObject]:
    """All objects within ``eps`` of ``q``, sorted by id.

    The query's cells are dilated by eps and the job becomes a range
    filter: candidates reached through interior expanded cells are
    accepted outright, the rest pay one exact distance computation.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    t0 = time.perf_counter()
    base = decompose(q, tree.config, tree.extent)
    expanded = extend_cells(base, eps, tree.extent)
    converted = convert_cells(base, eps, tree.extent)
    q_cells = merge_cells(list(expanded) + list(converted))
    acc = _filter_cells(tree, q_cells, sound_eps_rule, stats)
    cands = _candidates(acc)
    t1 = time.perf_counter()

    out = []
    for cand in cands:
        if cand.hit_tag == TRUE_HIT:
            out.append(cand.s_id)
        elif distance(q, table[cand.s_id].geometry) <= eps:
            out.append(cand.s_id)
            if stats is not None:
                stats.n_uncertain_pass += 1
        else:
            if stats is not None:
                stats.n_uncertain_fail += 1
    t2 = time.perf_counter()
    if stats is not None:
        stats.filter_seconds += t1 - t0
        stats.refine_seconds += t2 - t1
        stats.query_cell_count += len(q_cells)
        stats.n_candidates += len(cands)
        stats.n_true_hits += sum(1 for c in cands if c.hit_tag == TRUE_HIT)
        if stats.keep_candidates:
            stats.candidates.extend(cands)
    return [SpatialObject(sid, table[sid].geometry) for sid in out]


# ---------------------------------------------------------------------------
# grid histogram secondary index


@dataclass
class GHSI:
    """Fixed-level grid histogram: cell code -> object count.

    Non-point objects contribute to the single cell holding their
    envelope center.  ``build_reads`` counts object accesses during
    construction (one per object: a single pass).
    """

    level: int
    counts: dict[int, int]
    total: int
    build_reads: int

    def count_at(self, code: int) -> int:
        return self.counts.get(code, 0)


def ghsi_analytic_bytes(level: int) -> int:
    """Dense storage cost: 4^level entries at 8 B key + 4 B count."""
    return (4 ** level) * 12


def build_ghsi(objects: Iterable[SpatialObject], level: int, extent: GridExtent) -> GHSI:
    if not 1 <= level <= 30:
        raise ValueError("GHSI level must be in [1, 30]")
    counts: dict[int, int] = {}
    reads = 0
    total = 0
    for obj in objects:
        reads += 1
        g = obj.geometry
        if g.kind == POINT:
            x, y = g.rings[0][0]
        else:
            x, y = envelope(g).center()
        code = cell_containing(x, y, level, extent).code
        counts[code] = counts.get(code, 0) + 1
        total += 1
    return GHSI(level, counts, total, reads)


def extend_query_cells(ghsi: GHSI, current: set[CellCode]) -> set[CellCode]:
    """One ring of same-level neighbors around the current cell set."""
    if not current:
        raise ValueError("current cell set must be non-empty")
    out = set(current)
    for c in current:
        out.update(neighbors(c))
    return out


def unviewed_cells(
    q: Geometry,
    d_k: float,
    viewed: set[int],
    ghsi: GHSI,
    extent: GridExtent,
) -> set[CellCode]:
    """Histogram-level cells meeting the closed disc of radius ``d_k``
    around the query centroid, minus the already-searched ones."""
    if not math.isfinite(d_k):
        raise ValueError("d_k must be finite")
    cx, cy = envelope(q).center()
    disc_env = Envelope(cx - d_k, cy - d_k, cx + d_k, cy + d_k)
    col0, col1, row0, row1 = cell_range_for_envelope(disc_env, ghsi.level, extent)
    out: set[CellCode] = set()
    for col in range(col0, col1 + 1):
        for row in range(row0, row1 + 1):
            c = encode(col, row, ghsi.level)
            if c.code in viewed:
                continue
            if cell_bounds(c, extent).distance_to_point(cx, cy) <= d_k:
                out.add(c)
    return out


# ---------------------------------------------------------------------------
# kNN query


@dataclass
class KnnState:
    """Progress of one kNN search (exposed for instrumentation)."""

    query_cells: set[int] = field(default_factory=set)
    results: list[tuple[float, int]] = field(default_factory=list)
    d_k: float = math.inf
    d_m: float = math.inf


def _rect_cells(col0: int, col1: int, row0: int, row1: int, level: int) -> list[GridCell]:
    return [
        GridCell(encode(c, r, level), False)
        for c in range(col0, col1 + 1)
        for r in range(row0, row1 + 1)
    ]


def _ring_cells(rect, prev, level) -> list[GridCell]:
    col0, col1, row0, row1 = rect
    p0, p1, q0, q1 = prev
    out = []
    for c in range(col0, col1 + 1):
        for r in range(row0, row1 + 1):
            if p0 <= c <= p1 and q0 <= r <= q1:
                continue
            out.append(GridCell(encode(c, r, level), False))
    return out


def _search_cells(tree, table, q, cells, state: KnnState, stats) -> None:
    """Filter the given histogram cells and fold new candidates into state."""
    merged = merge_cells(cells)
    acc = _filter_cells(tree, merged, no_true_hits_rule, stats)
    known = {sid for _, sid in state.results}
    added = False
    for sid in acc:
        if sid in known:
            continue
        state.results.append((distance(q, table[sid].geometry), sid))
        added = True
    if added:
        state.results.sort()


def knn_query(
    tree: GPTree,
    table: LookupTable,
    ghsi: GHSI,
    q: Geometry,
    k: int,
    stats: QueryStats | None = None,
) -> list[SpatialObject]:
    """The k nearest objects to ``q``, ordered by (distance, id).

    Histogram counts steer an inside-out extension of query cells until
    enough objects are in reach; a range filter plus exact distances gives
    the rough answer, certified when d_k stays inside the searched
    rectangle; otherwise the cells meeting the d_k-disc are swept until
    none remain.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if len(table) == 0 or ghsi.total == 0:
        return []
    level = ghsi.level
    n = 1 << level
    extent = tree.extent
    q_env = envelope(q)
    cx, cy = q_env.center()
    # conservative slack: ranking uses geometry distance but the disc is
    # anchored at the centroid
    radius_off = 0.0
    if q.kind != POINT:
        radius_off = max(math.hypot(x - cx, y - cy) for ring in q.rings for x, y in ring)

    state = KnnState()
    rect = cell_range_for_envelope(q_env, level, extent)
    full = (0, n - 1, 0, n - 1)

    def rect_count(r):
        c0, c1, r0, r1 = r
        return sum(
            ghsi.count_at(encode(c, rr, level).code)
            for c in range(c0, c1 + 1)
            for rr in range(r0, r1 + 1)
        )

    if ghsi.total < k:
        rect = full
        in_reach = ghsi.total
    else:
        in_reach = rect_count(rect)
        while in_reach < k and rect != full:
            grown = (max(0, rect[0] - 1), min(n - 1, rect[1] + 1), max(0, rect[2] - 1), min(n - 1, rect[3] + 1))
            in_reach += sum(ghsi.count_at(gc.cell.code) for gc in _ring_cells(grown, rect, level))
            rect = grown
            if stats is not None:
                stats.knn_extension_rounds += 1

    _search_cells(tree, table, q, _rect_cells(*rect, level), state, stats)
    # histogram counts use center points: keep growing if the filter
    # reached fewer real candidates than k
    while len(state.results) < k and rect != full:
        grown = (max(0, rect[0] - 1), min(n - 1, rect[1] + 1), max(0, rect[2] - 1), min(n - 1, rect[3] + 1))
        ring = _ring_cells(grown, rect, level)
        rect = grown
        if stats is not None:
            stats.knn_extension_rounds += 1
        _search_cells(tree, table, q, ring, state, stats)

    viewed = {gc.cell.code for gc in _rect_cells(*rect, level)}
    state.query_cells = viewed

    def current_dk():
        return state.results[k - 1][0] if len(state.results) >= k else math.inf

    state.d_k = current_dk()
    state.d_m = _rect_boundary_distance(rect, cx, cy, level, extent, n)

    if not (state.d_k < state.d_m - radius_off):
        while True:
            d_k = current_dk()
            state.d_k = d_k
            if not math.isfinite(d_k):
                # fewer than k objects reachable: rect is already the full
                # grid, so everything has been searched
                break
            radius = d_k + radius_off
            disc_env = Envelope(cx - radius, cy - radius, cx + radius, cy + radius)
            dc0, dc1, dr0, dr1 = cell_range_for_envelope(disc_env, level, extent)
            box_cells = (dc1 - dc0 + 1) * (dr1 - dr0 + 1)
            if box_cells - len(viewed) > 262144:
                # disc degenerated to (nearly) the whole grid: sweep the
                # whole tree once instead of enumerating millions of cells
                _search_cells(tree, table, q, [GridCell(ROOT_CELL, False)], state, stats)
                break
            fresh = unviewed_cells(q, radius, viewed, ghsi, extent)
            if not fresh:
                break
            if stats is not None:
                stats.knn_step3_cells += len(fresh)
            viewed.update(c.code for c in fresh)
            _search_cells(tree, table, q, [GridCell(c, False) for c in fresh], state, stats)
    state.d_k = current_dk()
    if stats is not None:
        stats.n_candidates += len(state.results)
    top = state.results[:k]
    return [SpatialObject(sid, table[sid].geometry) for _, sid in top]


def _rect_boundary_distance(rect, cx, cy, level, extent, n) -> float:
    """Distance from the centroid to the searched rectangle's boundary.

    Edges flush with the grid border are ignored: nothing lies beyond
    them.  Returns inf when the whole grid is covered.
    """
    col0, col1, row0, row1 = rect
    b = extent.bounds
    w, h = extent.cell_size(level)
    dists = []
    if col0 > 0:
        dists.append(cx - (b.min_x + col0 * w))
    if col1 < n - 1:
        dists.append((b.min_x + (col1 + 1) * w) - cx)
    if row0 > 0:
        dists.append(cy - (b.min_y + row0 * h))
    if row1 < n - 1:
        dists.append((b.min_y + (row1 + 1) * h) - cy)
    if not dists:
        return math.inf
    return max(0.0, min(dists))
