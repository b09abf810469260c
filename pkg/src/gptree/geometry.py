"""Planar geometry model and exact spatial predicates.

Everything here works in dataset units (e.g. degrees) on the Euclidean
plane.  Robustness follows a single convention: orientation and
intersection tests use the fixed absolute tolerance ``TOL`` and
degenerate touching counts as intersecting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

TOL = 1e-12

POINT = "Point"
LINESTRING = "LineString"
POLYGON = "Polygon"

DISJOINT = "Disjoint"
INTERSECTS = "Intersects"
COVERS_RECT = "CoversRect"

THETA_INTERSECTS = "Intersects"
THETA_CONTAINS = "Contains"

Coordinate = tuple[float, float]


class GeometryError(ValueError):
    """Invalid geometry (bad coordinate, open ring, self-intersection...)."""


class Segment(NamedTuple):
    start: Coordinate
    end: Coordinate


class Envelope(NamedTuple):
    """Axis-aligned bounding rectangle (MBR)."""

    min_x: float
    min_y: float
    max_x: float
    max_y: float

    @property
    def width(self) -> float:
        return self.max_x - self.min_x

    @property
    def height(self) -> float:
        return self.max_y - self.min_y

    def area(self) -> float:
        return max(0.0, self.width) * max(0.0, self.height)

    def center(self) -> Coordinate:
        return ((self.min_x + self.max_x) / 2.0, (self.min_y + self.max_y) / 2.0)

    def intersects(self, other: "Envelope", tol: float = 0.0) -> bool:
        return not (
            self.max_x < other.min_x - tol
            or other.max_x < self.min_x - tol
            or self.max_y < other.min_y - tol
            or other.max_y < self.min_y - tol
        )

    def contains_point(self, x: float, y: float, tol: float = 0.0) -> bool:
        return (
            self.min_x - tol <= x <= self.max_x + tol
            and self.min_y - tol <= y <= self.max_y + tol
        )

    def contains_env(self, other: "Envelope", tol: float = 0.0) -> bool:
        return (
            self.min_x - tol <= other.min_x
            and other.max_x <= self.max_x + tol
            and self.min_y - tol <= other.min_y
            and other.max_y <= self.max_y + tol
        )

    def dilated(self, pad: float) -> "Envelope":
        return Envelope(self.min_x - pad, self.min_y - pad, self.max_x + pad, self.max_y + pad)

    def distance_to_point(self, x: float, y: float) -> float:
        dx = max(self.min_x - x, 0.0, x - self.max_x)
        dy = max(self.min_y - y, 0.0, y - self.max_y)
        return math.hypot(dx, dy)

    def distance_to_env(self, other: "Envelope") -> float:
        dx = max(self.min_x - other.max_x, 0.0, other.min_x - self.max_x)
        dy = max(self.min_y - other.max_y, 0.0, other.min_y - self.max_y)
        return math.hypot(dx, dy)


def _check_coord(x: float, y: float) -> None:
    if not (math.isfinite(x) and math.isfinite(y)):
        raise GeometryError(f"non-finite coordinate ({x}, {y})")


def _ring_self_intersects(ring: Sequence[Coordinate]) -> bool:
    """True when any two non-adjacent ring edges meet.

    Adjacent edges are allowed to share exactly their common vertex; the
    closing edge is adjacent to the first one.
    """
    n = len(ring) - 1  # edge count of a closed ring
    for i in range(n):
        a = Segment(ring[i], ring[i + 1])
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if segment_intersects(a, Segment(ring[j], ring[j + 1])):
                return True
    return False


class Geometry:
    """A 2-D Point, LineString or Polygon.

    ``rings`` holds one coordinate sequence for Point/LineString and, for
    polygons, the closed exterior ring followed by zero or more closed
    interior rings (holes).  Instances are immutable after construction;
    derived arrays are cached lazily.
    """

    __slots__ = ("kind", "rings", "_env", "_segments", "_seg_arr", "_n_coords")

    def __init__(self, kind: str, rings: Sequence[Sequence[Coordinate]], validate: bool = True):
        self.kind = kind
        self.rings = tuple(tuple((float(x), float(y)) for x, y in ring) for ring in rings)
        self._env = None
        self._segments = None
        self._seg_arr = None
        self._n_coords = sum(len(r) for r in self.rings)
        if validate:
            self._validate()

    @classmethod
    def point(cls, x: float, y: float) -> "Geometry":
        return cls(POINT, [[(x, y)]])

    @classmethod
    def linestring(cls, coords: Iterable[Coordinate]) -> "Geometry":
        return cls(LINESTRING, [list(coords)])

    @classmethod
    def polygon(cls, exterior: Iterable[Coordinate], holes: Iterable[Iterable[Coordinate]] = ()) -> "Geometry":
        return cls(POLYGON, [list(exterior), *[list(h) for h in holes]])

    def _validate(self) -> None:
        for ring in self.rings:
            for x, y in ring:
                _check_coord(x, y)
        if self.kind == POINT:
            if len(self.rings) != 1 or len(self.rings[0]) != 1:
                raise GeometryError("a point carries exactly one coordinate")
            return
        if self.kind == LINESTRING:
            coords = self.rings[0]
            if len(self.rings) != 1 or len(coords) < 2:
                raise GeometryError("a linestring needs at least 2 coordinates")
            for a, b in zip(coords, coords[1:]):
                if a == b:
                    raise GeometryError(f"zero-length segment at {a}")
            return
        if self.kind == POLYGON:
            if not self.rings:
                raise GeometryError("a polygon needs an exterior ring")
            for ring in self.rings:
                if len(ring) < 4:
                    raise GeometryError("a polygon ring needs at least 4 coordinates")
                if ring[0] != ring[-1]:
                    raise GeometryError(f"open ring: {ring[0]} != {ring[-1]}")
                for a, b in zip(ring, ring[1:]):
                    if a == b:
                        raise GeometryError(f"zero-length ring edge at {a}")
                if _ring_self_intersects(ring):
                    raise GeometryError("self-intersecting ring")
            return
        raise GeometryError(f"unknown geometry kind {self.kind!r}")

    @property
    def coords(self) -> tuple[Coordinate, ...]:
        if len(self.rings) == 1:
            return self.rings[0]
        return tuple(c for ring in self.rings for c in ring)

    def first_vertex(self) -> Coordinate:
        return self.rings[0][0]

    @property
    def seg_array(self) -> np.ndarray:
        """(n, 4) float array of segments as [x1, y1, x2, y2] rows."""
        if self._seg_arr is None:
            rows = []
            if self.kind != POINT:
                for ring in self.rings:
                    for a, b in zip(ring, ring[1:]):
                        rows.append((a[0], a[1], b[0], b[1]))
            if rows:
                self._seg_arr = np.asarray(rows, dtype=np.float64)
            else:
                self._seg_arr = np.empty((0, 4), dtype=np.float64)
        return self._seg_arr

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Geometry) and self.kind == other.kind and self.rings == other.rings

    def __hash__(self) -> int:
        return hash((self.kind, self.rings))

    def __repr__(self) -> str:
        return f"Geometry({self.kind}, {self._n_coords} coords)"


@dataclass(frozen=True)
class SpatialObject:
    """An identified geometry; ids are unique within a dataset."""

    id: int
    geometry: Geometry

    def __post_init__(self):
        if self.id < 0:
            raise GeometryError("object ids must be non-negative")


# ---------------------------------------------------------------------------
# basic operations


def segments(g: Geometry) -> list[Segment]:
    """All segments of ``g`` in ring order; points have none."""
    if g._segments is None:
        segs: list[Segment] = []
        if g.kind != POINT:
            for ring in g.rings:
                for a, b in zip(ring, ring[1:]):
                    segs.append(Segment(a, b))
        g._segments = segs
    return g._segments


def envelope(g: Geometry) -> Envelope:
    """Tight axis-aligned bounding box."""
    if g._env is None:
        xs = [c[0] for ring in g.rings for c in ring]
        ys = [c[1] for ring in g.rings for c in ring]
        g._env = Envelope(min(xs), min(ys), max(xs), max(ys))
    return g._env


# ---------------------------------------------------------------------------
# scalar segment predicates


def _orient(ax, ay, bx, by, cx, cy, tol=TOL):
    v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    if v > tol:
        return 1
    if v < -tol:
        return -1
    return 0


def _on_segment(ax, ay, bx, by, px, py, tol=TOL):
    return (
        min(ax, bx) - tol <= px <= max(ax, bx) + tol
        and min(ay, by) - tol <= py <= max(ay, by) + tol
    )


def segment_intersects(a: Segment, b: Segment, tol: float = TOL) -> bool:
    """Closed-segment intersection; touching endpoints count."""
    (ax, ay), (bx, by) = a
    (cx, cy), (dx, dy) = b
    o1 = _orient(ax, ay, bx, by, cx, cy, tol)
    o2 = _orient(ax, ay, bx, by, dx, dy, tol)
    o3 = _orient(cx, cy, dx, dy, ax, ay, tol)
    o4 = _orient(cx, cy, dx, dy, bx, by, tol)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _on_segment(ax, ay, bx, by, cx, cy, tol):
        return True
    if o2 == 0 and _on_segment(ax, ay, bx, by, dx, dy, tol):
        return True
    if o3 == 0 and _on_segment(cx, cy, dx, dy, ax, ay, tol):
        return True
    if o4 == 0 and _on_segment(cx, cy, dx, dy, bx, by, tol):
        return True
    return False


# ---------------------------------------------------------------------------
# vectorized kernels


def seg_rect_mask(segs: np.ndarray, rect: Envelope, pad: float = TOL) -> np.ndarray:
    """Boolean mask of segments intersecting ``rect`` grown by ``pad``.

    Liang-Barsky clipping against the padded rectangle; a negative pad
    shrinks the rectangle, which turns the test into "passes through the
    open interior".
    """
    n = segs.shape[0]
    if n == 0:
        return np.zeros(0, dtype=bool)
    x0, y0 = rect.min_x - pad, rect.min_y - pad
    x1, y1 = rect.max_x + pad, rect.max_y + pad
    if x1 < x0 or y1 < y0:
        return np.zeros(n, dtype=bool)
    ax, ay, bx, by = segs[:, 0], segs[:, 1], segs[:, 2], segs[:, 3]
    dx = bx - ax
    dy = by - ay
    t0 = np.zeros(n)
    t1 = np.ones(n)
    ok = np.ones(n, dtype=bool)
    for p, q in ((-dx, ax - x0), (dx, x1 - ax), (-dy, ay - y0), (dy, y1 - ay)):
        para = np.abs(p) <= TOL
        ok &= ~(para & (q < 0.0))
        safe_p = np.where(para, 1.0, p)
        t = q / safe_p
        t0 = np.where(~para & (p < 0), np.maximum(t0, t), t0)
        t1 = np.where(~para & (p > 0), np.minimum(t1, t), t1)
    return ok & (t0 <= t1)


def point_segs_distance(px: float, py: float, segs: np.ndarray) -> np.ndarray:
    """Distances from a point to each segment row."""
    ax, ay, bx, by = segs[:, 0], segs[:, 1], segs[:, 2], segs[:, 3]
    dx = bx - ax
    dy = by - ay
    L2 = dx * dx + dy * dy
    t = ((px - ax) * dx + (py - ay) * dy) / np.where(L2 <= 0.0, 1.0, L2)
    t = np.clip(np.where(L2 <= 0.0, 0.0, t), 0.0, 1.0)
    cx = ax + t * dx
    cy = ay + t * dy
    return np.hypot(px - cx, py - cy)


def _cross_sign(ax, ay, bx, by, px, py):
    v = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    s = np.zeros_like(v, dtype=np.int8)
    s[v > TOL] = 1
    s[v < -TOL] = -1
    return s


def seg_segs_intersect_mask(e: Segment, segs: np.ndarray) -> np.ndarray:
    """Mask of rows of ``segs`` intersecting the single segment ``e``."""
    n = segs.shape[0]
    if n == 0:
        return np.zeros(0, dtype=bool)
    (ax, ay), (bx, by) = e
    cx, cy, dx_, dy_ = segs[:, 0], segs[:, 1], segs[:, 2], segs[:, 3]
    o1 = _cross_sign(np.float64(ax), np.float64(ay), np.float64(bx), np.float64(by), cx, cy)
    o2 = _cross_sign(np.float64(ax), np.float64(ay), np.float64(bx), np.float64(by), dx_, dy_)
    o3 = _cross_sign(cx, cy, dx_, dy_, np.float64(ax), np.float64(ay))
    o4 = _cross_sign(cx, cy, dx_, dy_, np.float64(bx), np.float64(by))
    hit = (o1 != o2) & (o3 != o4)

    def on_ab(px, py):
        return (
            (np.minimum(ax, bx) - TOL <= px)
            & (px <= np.maximum(ax, bx) + TOL)
            & (np.minimum(ay, by) - TOL <= py)
            & (py <= np.maximum(ay, by) + TOL)
        )

    def on_cd(px, py):
        return (
            (np.minimum(cx, dx_) - TOL <= px)
            & (px <= np.maximum(cx, dx_) + TOL)
            & (np.minimum(cy, dy_) - TOL <= py)
            & (py <= np.maximum(cy, dy_) + TOL)
        )

    hit |= (o1 == 0) & on_ab(cx, cy)
    hit |= (o2 == 0) & on_ab(dx_, dy_)
    hit |= (o3 == 0) & on_cd(np.float64(ax), np.float64(ay))
    hit |= (o4 == 0) & on_cd(np.float64(bx), np.float64(by))
    return hit


def _ring_crossings(px: float, py: float, ring: Sequence[Coordinate]) -> int:
    """Ray-cast crossing count for one closed ring (half-open edge rule)."""
    arr = np.asarray(ring, dtype=np.float64)
    x1, y1 = arr[:-1, 0], arr[:-1, 1]
    x2, y2 = arr[1:, 0], arr[1:, 1]
    cond = (y1 > py) != (y2 > py)
    if not cond.any():
        return 0
    denom = np.where(cond, y2 - y1, 1.0)
    xin = x1 + (py - y1) * (x2 - x1) / denom
    return int(np.count_nonzero(cond & (px < xin)))


def point_in_polygon(pt: Coordinate, g: Geometry, boundary: bool = True) -> bool:
    """Point membership in a polygon's region (closed, minus open holes).

    ``boundary=False`` makes ring points count as outside.
    """
    if g.kind != POLYGON:
        raise GeometryError("point_in_polygon requires a polygon")
    px, py = pt
    if not envelope(g).contains_point(px, py, TOL):
        return False
    segs = g.seg_array
    if point_segs_distance(px, py, segs).min() <= TOL:
        return boundary
    if _ring_crossings(px, py, g.rings[0]) % 2 == 0:
        return False
    for hole in g.rings[1:]:
        if _ring_crossings(px, py, hole) % 2 == 1:
            return False
    return True


def _point_hits(pt: Coordinate, g: Geometry) -> bool:
    """Exact point-vs-geometry intersection."""
    px, py = pt
    if g.kind == POINT:
        qx, qy = g.rings[0][0]
        return math.hypot(px - qx, py - qy) <= TOL
    if g.kind == LINESTRING:
        return bool(point_segs_distance(px, py, g.seg_array).min() <= TOL)
    return point_in_polygon(pt, g)


def _any_segments_cross(a: Geometry, b: Geometry) -> bool:
    small, big = (a, b) if a.seg_array.shape[0] <= b.seg_array.shape[0] else (b, a)
    arr = big.seg_array
    for e in segments(small):
        if seg_segs_intersect_mask(e, arr).any():
            return True
    return False


# ---------------------------------------------------------------------------
# rectangle classification


def rect_relation(g: Geometry, rect: Envelope) -> str:
    """Classify ``rect`` against ``g``: Disjoint, Intersects or CoversRect.

    CoversRect means every point of the rectangle lies in the polygon's
    closed region; only polygons can cover.  Touching counts as
    intersecting.
    """
    if not envelope(g).intersects(rect, TOL):
        return DISJOINT
    if g.kind == POINT:
        x, y = g.rings[0][0]
        return INTERSECTS if rect.contains_point(x, y, TOL) else DISJOINT
    segs = g.seg_array
    closed_hit = seg_rect_mask(segs, rect, TOL)
    if g.kind == LINESTRING:
        return INTERSECTS if closed_hit.any() else DISJOINT
    cx, cy = rect.center()
    if closed_hit.any():
        if seg_rect_mask(segs, rect, -TOL).any():
            return INTERSECTS
        # boundary touches edges only: the open rectangle is uniformly
        # inside or outside, so the center decides
        return COVERS_RECT if point_in_polygon((cx, cy), g) else INTERSECTS
    return COVERS_RECT if point_in_polygon((cx, cy), g) else DISJOINT


# ---------------------------------------------------------------------------
# clipping and the refinement sweep


def clip_to_cells(g: Geometry, rects: Sequence[Envelope]) -> list[Segment]:
    """Segments of ``g`` intersecting the union of ``rects``, kept whole."""
    arr = g.seg_array
    if arr.shape[0] == 0 or not rects:
        return []
    keep = np.zeros(arr.shape[0], dtype=bool)
    for rect in rects:
        remaining = ~keep
        if not remaining.any():
            break
        idx = np.nonzero(remaining)[0]
        keep[idx] |= seg_rect_mask(arr[idx], rect, TOL)
    segs = segments(g)
    return [segs[i] for i in np.nonzero(keep)[0]]


def sweep_line_intersects(a: Sequence[Segment], b: Sequence[Segment]) -> bool:
    """True when any segment of ``a`` meets any segment of ``b``.

    X-ordered event sweep: segments enter an active set (sorted by their
    low y) at their left endpoint and leave at their right one; each
    insertion is tested against y-overlapping actives of the other color.
    """
    if not a or not b:
        return False
    events = []  # (x, kind, side, index) with starts before ends at equal x
    norm: list[list[tuple[float, float, float, float]]] = [[], []]
    for side, segs in enumerate((a, b)):
        for seg in segs:
            (x1, y1), (x2, y2) = seg
            if (x1, y1) > (x2, y2):
                x1, y1, x2, y2 = x2, y2, x1, y1
            idx = len(norm[side])
            norm[side].append((x1, y1, x2, y2))
            events.append((x1, 0, side, idx))
            events.append((x2, 1, side, idx))
    events.sort()
    active: list[list[tuple[float, float, int]]] = [[], []]  # (ylo, yhi, idx)
    for _, kind, side, idx in events:
        x1, y1, x2, y2 = norm[side][idx]
        ylo, yhi = (y1, y2) if y1 <= y2 else (y2, y1)
        if kind == 1:
            try:
                active[side].remove((ylo, yhi, idx))
            except ValueError:
                pass
            continue
        seg = Segment((x1, y1), (x2, y2))
        other = 1 - side
        for oylo, oyhi, oidx in active[other]:
            if oylo > yhi + TOL or oyhi < ylo - TOL:
                continue
            ox1, oy1, ox2, oy2 = norm[other][oidx]
            if segment_intersects(seg, Segment((ox1, oy1), (ox2, oy2))):
                return True
        active[side].append((ylo, yhi, idx))
        active[side].sort()
    return False


# ---------------------------------------------------------------------------
# exact predicates


def exact_predicate(q: Geometry, s: Geometry, theta: str = THETA_INTERSECTS) -> bool:
    """Exact truth of ``theta`` between query ``q`` and object ``s``."""
    if theta == THETA_CONTAINS:
        return _contains(q, s)
    if theta == THETA_INTERSECTS:
        return _intersects(q, s)
    raise ValueError(f"unknown predicate {theta!r}")


def _intersects(q: Geometry, s: Geometry) -> bool:
    if not envelope(q).intersects(envelope(s), TOL):
        return False
    if q.kind == POINT:
        return _point_hits(q.rings[0][0], s)
    if s.kind == POINT:
        return _point_hits(s.rings[0][0], q)
    if _any_segments_cross(q, s):
        return True
    if q.kind == POLYGON and point_in_polygon(s.first_vertex(), q):
        return True
    if s.kind == POLYGON and point_in_polygon(q.first_vertex(), s):
        return True
    return False


def _seg_param_events(e: Segment, other: Segment) -> list[float]:
    """Parameters t on ``e`` where ``other`` meets it (0..1), if any."""
    if not segment_intersects(e, other):
        return []
    (ax, ay), (bx, by) = e
    (cx, cy), (dx, dy) = other
    ex, ey = bx - ax, by - ay
    fx, fy = dx - cx, dy - cy
    denom = ex * fy - ey * fx
    out = []
    if abs(denom) > TOL:
        t = ((cx - ax) * fy - (cy - ay) * fx) / denom
        out.append(min(1.0, max(0.0, t)))
        return out
    # collinear-ish overlap: project other's endpoints onto e
    L2 = ex * ex + ey * ey
    if L2 <= TOL:
        return [0.0]
    for px, py in ((cx, cy), (dx, dy)):
        t = ((px - ax) * ex + (py - ay) * ey) / L2
        if -TOL <= t <= 1.0 + TOL:
            out.append(min(1.0, max(0.0, t)))
    return out


def _boundary_inside_polygon(s: Geometry, q: Geometry) -> bool:
    """Every point of s's rings/segments lies in q's closed region."""
    for ring in s.rings:
        for v in ring:
            if not point_in_polygon(v, q):
                return False
    q_segs = segments(q)
    for e in segments(s):
        ts = {0.0, 1.0}
        for f in q_segs:
            ts.update(_seg_param_events(e, f))
        cuts = sorted(ts)
        (ax, ay), (bx, by) = e
        for t0, t1 in zip(cuts, cuts[1:]):
            tm = (t0 + t1) / 2.0
            mx, my = ax + tm * (bx - ax), ay + tm * (by - ay)
            if not point_in_polygon((mx, my), q):
                return False
    return True


def _on_linestring(e: Segment, q: Geometry) -> bool:
    """Whole segment ``e`` lies on linestring ``q``."""
    (ax, ay), (bx, by) = e
    ex, ey = bx - ax, by - ay
    L2 = ex * ex + ey * ey
    ts = {0.0, 1.0}
    for ring in q.rings:
        for px, py in ring:
            t = ((px - ax) * ex + (py - ay) * ey) / L2
            if -TOL <= t <= 1.0 + TOL:
                ts.add(min(1.0, max(0.0, t)))
    arr = q.seg_array
    cuts = sorted(ts)
    for t0, t1 in zip(cuts, cuts[1:]):
        tm = (t0 + t1) / 2.0
        mx, my = ax + tm * ex, ay + tm * ey
        if point_segs_distance(mx, my, arr).min() > TOL:
            return False
    return True


def _contains(q: Geometry, s: Geometry) -> bool:
    if q.kind == POINT:
        if s.kind != POINT:
            return False
        (ax, ay), (bx, by) = q.rings[0][0], s.rings[0][0]
        return math.hypot(ax - bx, ay - by) <= TOL
    if q.kind == LINESTRING:
        if s.kind == POLYGON:
            return False
        if s.kind == POINT:
            return _point_hits(s.rings[0][0], q)
        return all(_on_linestring(e, q) for e in segments(s))
    # q polygon
    if s.kind == POINT:
        return point_in_polygon(s.rings[0][0], q)
    if not envelope(q).contains_env(envelope(s), TOL):
        return False
    if not _boundary_inside_polygon(s, q):
        return False
    if s.kind == POLYGON:
        # a hole of q buried in s's interior breaks containment
        for hole in q.rings[1:]:
            if point_in_polygon(hole[0], s, boundary=False):
                return False
    return True


# ---------------------------------------------------------------------------
# distance


def _points_to_seg_distance(px: np.ndarray, py: np.ndarray, e: Segment) -> np.ndarray:
    (ax, ay), (bx, by) = e
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    if L2 <= 0.0:
        return np.hypot(px - ax, py - ay)
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / L2, 0.0, 1.0)
    return np.hypot(px - (ax + t * dx), py - (ay + t * dy))


def _seg_to_segs_distance(e: Segment, arr: np.ndarray) -> float:
    if arr.shape[0] == 0:
        return math.inf
    inter = seg_segs_intersect_mask(e, arr)
    if inter.any():
        return 0.0
    (ax, ay), (bx, by) = e
    d = point_segs_distance(ax, ay, arr)
    d = np.minimum(d, point_segs_distance(bx, by, arr))
    d = np.minimum(d, _points_to_seg_distance(arr[:, 0], arr[:, 1], e))
    d = np.minimum(d, _points_to_seg_distance(arr[:, 2], arr[:, 3], e))
    return float(d.min())


def _point_geom_distance(pt: Coordinate, g: Geometry) -> float:
    px, py = pt
    if g.kind == POINT:
        qx, qy = g.rings[0][0]
        return math.hypot(px - qx, py - qy)
    if g.kind == POLYGON and point_in_polygon(pt, g):
        return 0.0
    return float(point_segs_distance(px, py, g.seg_array).min())


def distance(a: Geometry, b: Geometry) -> float:
    """Minimum planar Euclidean distance between two geometries (0 if they meet)."""
    if a.kind == POINT:
        return _point_geom_distance(a.rings[0][0], b)
    if b.kind == POINT:
        return _point_geom_distance(b.rings[0][0], a)
    if a.kind == POLYGON and point_in_polygon(b.first_vertex(), a):
        return 0.0
    if b.kind == POLYGON and point_in_polygon(a.first_vertex(), b):
        return 0.0
    small, big = (a, b) if a.seg_array.shape[0] <= b.seg_array.shape[0] else (b, a)
    arr = big.seg_array
    best = math.inf
    for e in segments(small):
        d = _seg_to_segs_distance(e, arr)
        if d < best:
            best = d
            if best == 0.0:
                break
    return best
