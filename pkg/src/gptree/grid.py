"""Z-order cell encoding and the adaptive grid approximation of geometries.

A cell is identified by (level, code) where ``code`` interleaves the bits
of its column and row indices, column bit first, most significant first.
Parent codes are prefixes of child codes, so ancestry and containment are
plain bit operations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .geometry import (
    Envelope,
    Geometry,
    GeometryError,
    POINT,
    POLYGON,
    TOL,
    envelope,
    point_in_polygon,
    seg_rect_mask,
)

MAX_LEVEL = 30


class CellCode(NamedTuple):
    """A quadtree cell key: ``code`` holds exactly ``2 * level`` bits."""

    level: int
    code: int

    def text(self) -> str:
        """Binary form, e.g. "10100011" for a level-4 cell."""
        if self.level == 0:
            return ""
        return format(self.code, f"0{2 * self.level}b")

    @classmethod
    def from_text(cls, s: str) -> "CellCode":
        if len(s) % 2 != 0:
            raise ValueError(f"cell code text needs an even bit count: {s!r}")
        if s and (set(s) - {"0", "1"}):
            raise ValueError(f"cell code text must be binary: {s!r}")
        return cls(len(s) // 2, int(s, 2) if s else 0)


ROOT_CELL = CellCode(0, 0)


class GridCell(NamedTuple):
    cell: CellCode
    is_interior: bool


@dataclass(frozen=True)
class GridExtent:
    """The level-0 cell: the rectangle all indexed geometry must fall in."""

    bounds: Envelope

    def __post_init__(self):
        if self.bounds.width <= 0 or self.bounds.height <= 0:
            raise ValueError("grid extent must be non-degenerate")

    @property
    def width(self) -> float:
        return self.bounds.width

    @property
    def height(self) -> float:
        return self.bounds.height

    def cell_size(self, level: int) -> tuple[float, float]:
        n = 1 << level
        return (self.width / n, self.height / n)


WORLD_EXTENT = GridExtent(Envelope(-180.0, -90.0, 180.0, 90.0))


@dataclass(frozen=True)
class DecompositionConfig:
    """Knobs of the adaptive decomposition.

    ``seg`` is the maximum number of geometry segments a boundary cell may
    hold before it is subdivided; ``point_level`` defaults to ``max_level``.
    """

    seg: int = 20
    max_level: int = 16
    point_level: int | None = None

    def __post_init__(self):
        if self.seg < 1:
            raise ValueError("seg must be positive")
        if not 1 <= self.max_level <= MAX_LEVEL:
            raise ValueError(f"max_level must be in [1, {MAX_LEVEL}]")
        if self.point_level is None:
            object.__setattr__(self, "point_level", self.max_level)
        if not 1 <= self.point_level <= self.max_level:
            raise ValueError("point_level must be in [1, max_level]")


# ---------------------------------------------------------------------------
# encoding


def _part1by1(n: int) -> int:
    n &= 0xFFFFFFFF
    n = (n | (n << 16)) & 0x0000FFFF0000FFFF
    n = (n | (n << 8)) & 0x00FF00FF00FF00FF
    n = (n | (n << 4)) & 0x0F0F0F0F0F0F0F0F
    n = (n | (n << 2)) & 0x3333333333333333
    n = (n | (n << 1)) & 0x5555555555555555
    return n


def _compact1by1(n: int) -> int:
    n &= 0x5555555555555555
    n = (n ^ (n >> 1)) & 0x3333333333333333
    n = (n ^ (n >> 2)) & 0x0F0F0F0F0F0F0F0F
    n = (n ^ (n >> 4)) & 0x00FF00FF00FF00FF
    n = (n ^ (n >> 8)) & 0x0000FFFF0000FFFF
    n = (n ^ (n >> 16)) & 0x00000000FFFFFFFF
    return n


def encode(col: int, row: int, level: int) -> CellCode:
    """Interleave column/row bits, column bit first at every position."""
    if not 0 <= level <= MAX_LEVEL:
        raise ValueError(f"level {level} out of [0, {MAX_LEVEL}]")
    n = 1 << level
    if not (0 <= col < n and 0 <= row < n):
        raise ValueError(f"cell ({col}, {row}) out of range for level {level}")
    return CellCode(level, (_part1by1(col) << 1) | _part1by1(row))


def decode(c: CellCode) -> tuple[int, int, int]:
    """Inverse of :func:`encode`: (col, row, level)."""
    if c.code >> (2 * c.level):
        raise ValueError(f"code 0x{c.code:x} too long for level {c.level}")
    return (_compact1by1(c.code >> 1), _compact1by1(c.code), c.level)


def cell_bounds(c: CellCode, extent: GridExtent) -> Envelope:
    col, row, level = decode(c)
    w, h = extent.cell_size(level)
    b = extent.bounds
    return Envelope(b.min_x + col * w, b.min_y + row * h, b.min_x + (col + 1) * w, b.min_y + (row + 1) * h)


def is_ancestor(a: CellCode, b: CellCode) -> bool:
    """True when ``a`` is ``b`` or one of b's ancestors (prefix test)."""
    if a.level > b.level:
        return False
    return (b.code >> (2 * (b.level - a.level))) == a.code


def children(c: CellCode) -> tuple[CellCode, CellCode, CellCode, CellCode]:
    if c.level >= MAX_LEVEL:
        raise ValueError("cannot subdivide below the maximum level")
    base = c.code << 2
    lv = c.level + 1
    return (CellCode(lv, base), CellCode(lv, base | 1), CellCode(lv, base | 2), CellCode(lv, base | 3))


def parent(c: CellCode) -> CellCode:
    if c.level < 1:
        raise ValueError("the root cell has no parent")
    return CellCode(c.level - 1, c.code >> 2)


def ancestor_at(c: CellCode, level: int) -> CellCode:
    if level > c.level:
        raise ValueError("ancestor level exceeds cell level")
    return CellCode(level, c.code >> (2 * (c.level - level)))


def quadrant_at(c: CellCode, depth: int) -> int:
    """The 2-bit child index consumed when stepping from ``depth`` to ``depth+1``."""
    return (c.code >> (2 * (c.level - 1 - depth))) & 3


def neighbors(c: CellCode) -> list[CellCode]:
    """Same-level edge and corner neighbors, clipped at the grid border."""
    col, row, level = decode(c)
    n = 1 << level
    out = []
    for dc in (-1, 0, 1):
        for dr in (-1, 0, 1):
            if dc == 0 and dr == 0:
                continue
            nc, nr = col + dc, row + dr
            if 0 <= nc < n and 0 <= nr < n:
                out.append(encode(nc, nr, level))
    return out


def cell_containing(x: float, y: float, level: int, extent: GridExtent) -> CellCode:
    """The level-``level`` cell holding a point; border points clamp inward."""
    n = 1 << level
    b = extent.bounds
    col = int((x - b.min_x) / extent.width * n)
    row = int((y - b.min_y) / extent.height * n)
    return encode(min(max(col, 0), n - 1), min(max(row, 0), n - 1), level)


def cell_range_for_envelope(env: Envelope, level: int, extent: GridExtent) -> tuple[int, int, int, int]:
    """Inclusive (col0, col1, row0, row1) of level cells overlapping ``env``."""
    n = 1 << level
    b = extent.bounds
    w, h = extent.cell_size(level)
    col0 = int(math.floor((env.min_x - b.min_x) / w))
    col1 = int(math.floor((env.max_x - b.min_x) / w))
    row0 = int(math.floor((env.min_y - b.min_y) / h))
    row1 = int(math.floor((env.max_y - b.min_y) / h))
    clamp = lambda v: min(max(v, 0), n - 1)
    return (clamp(col0), clamp(col1), clamp(row0), clamp(row1))


# ---------------------------------------------------------------------------
# decomposition


def _scale_floor_level(g_env: Envelope, cfg: DecompositionConfig, extent: GridExtent) -> int:
    """Smallest level whose cells are no larger than the geometry's extent.

    Descent always proceeds at least this deep so that small geometries do
    not collapse into a single oversized cell regardless of their segment
    count.
    """
    target = max(g_env.width, g_env.height)
    if target <= 0.0:
        return cfg.max_level
    size = max(extent.width, extent.height)
    level = 0
    while level < cfg.max_level and size > target * (1.0 + 1e-9):
        size /= 2.0
        level += 1
    return level


def decompose(g: Geometry, cfg: DecompositionConfig, extent: GridExtent) -> list[GridCell]:
    """Approximate ``g`` as multi-resolution interior/boundary cells.

    A point maps to the single boundary cell of ``cfg.point_level`` that
    holds it.  Other geometries descend the quadtree from the root: cells
    fully covered by a polygon become interior cells, disjoint cells are
    dropped, and an intersecting cell becomes a boundary cell once it is
    no larger than the geometry and holds at most ``cfg.seg`` segments (or
    the maximum level is reached); otherwise it is subdivided.  Returned
    cells cover the geometry and have pairwise disjoint interiors.
    """
    g_env = envelope(g)
    b = extent.bounds
    if not b.contains_env(g_env):
        raise GeometryError(f"geometry envelope {g_env} outside grid extent {b}")
    if g.kind == POINT:
        x, y = g.rings[0][0]
        return [GridCell(cell_containing(x, y, cfg.point_level, extent), False)]

    floor_level = _scale_floor_level(g_env, cfg, extent)
    seg_arr = g.seg_array
    is_polygon = g.kind == POLYGON
    out: list[GridCell] = []
    # stack entries: (cell, segment-row indices intersecting the cell's parent)
    stack: list[tuple[CellCode, np.ndarray]] = [(ROOT_CELL, np.arange(seg_arr.shape[0]))]
    while stack:
        cell, cand = stack.pop()
        rect = cell_bounds(cell, extent)
        sub = seg_arr[cand]
        hit = seg_rect_mask(sub, rect, TOL)
        inside = cand[hit]
        if inside.size == 0:
            if is_polygon and point_in_polygon(rect.center(), g):
                out.append(GridCell(cell, True))
            continue
        if is_polygon and not seg_rect_mask(seg_arr[inside], rect, -TOL).any():
            # boundary only touches the cell edges: covered or outside
            if point_in_polygon(rect.center(), g):
                out.append(GridCell(cell, True))
                continue
        if cell.level >= cfg.max_level or (
            cell.level >= floor_level and inside.size <= cfg.seg
        ):
            out.append(GridCell(cell, False))
            continue
        for child in reversed(children(cell)):
            stack.append((child, inside))
    return out


# ---------------------------------------------------------------------------
# cell algebra used by the distance query


def extend_cells(cells: Sequence[GridCell], eps: float, extent: GridExtent) -> list[GridCell]:
    """Boundary cells covering the eps-dilation of the cells' union.

    For every source cell, same-level cells whose rectangle lies within
    Euclidean distance ``eps`` of the union are emitted; the source cells
    themselves are excluded.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    src = {gc.cell for gc in cells}
    src_rects = [cell_bounds(gc.cell, extent) for gc in cells]
    seen: set[CellCode] = set()
    out: list[GridCell] = []
    for gc in cells:
        level = gc.cell.level
        w, h = extent.cell_size(level)
        col, row, _ = decode(gc.cell)
        kx = int(math.ceil(eps / w))
        ky = int(math.ceil(eps / h))
        n = 1 << level
        for nc in range(max(0, col - kx), min(n - 1, col + kx) + 1):
            for nr in range(max(0, row - ky), min(n - 1, row + ky) + 1):
                cand = encode(nc, nr, level)
                if cand in src or cand in seen:
                    continue
                rect = cell_bounds(cand, extent)
                if min(rect.distance_to_env(r) for r in src_rects) <= eps:
                    seen.add(cand)
                    out.append(GridCell(cand, False))
    return out


def convert_cells(cells: Sequence[GridCell], eps: float, extent: GridExtent) -> list[GridCell]:
    """Promote boundary cells with diagonal strictly below ``eps`` to interior."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    out = []
    for gc in cells:
        if gc.is_interior:
            out.append(gc)
            continue
        w, h = extent.cell_size(gc.cell.level)
        out.append(GridCell(gc.cell, math.hypot(w, h) < eps))
    return out


def merge_cells(cells: Iterable[GridCell]) -> list[GridCell]:
    """Collapse complete same-type sibling quartets into their parent, to fixpoint."""
    tags: dict[CellCode, bool] = {}
    for gc in cells:
        prev = tags.get(gc.cell)
        tags[gc.cell] = gc.is_interior if prev is None else (prev or gc.is_interior)
    max_lv = max((c.level for c in tags), default=0)
    for level in range(max_lv, 0, -1):
        groups: dict[tuple[CellCode, bool], int] = {}
        for c, interior in tags.items():
            if c.level != level:
                continue
            groups[(parent(c), interior)] = groups.get((parent(c), interior), 0) + 1
        for (par, interior), count in groups.items():
            if count != 4:
                continue
            for child in children(par):
                if tags.get(child) is not interior:
                    break
            else:
                for child in children(par):
                    del tags[child]
                prev = tags.get(par)
                tags[par] = interior if prev is None else (prev or interior)
    return [GridCell(c, t) for c, t in sorted(tags.items())]
