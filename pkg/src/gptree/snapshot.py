"""Versioned binary snapshot of a built index ("GPT1" format).

Layout: magic, flags, config, extent, sub-root count, then per sub-root
its code prefix and a pre-order node stream, and finally the lookup
table.  Loading reproduces the structural stats exactly.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

from .geometry import Envelope, Geometry, LINESTRING, POINT, POLYGON
from .grid import CellCode, DecompositionConfig, GridCell, GridExtent
from .tree import GPTree, IndexNode, LookupTable, SubRoot, TableEntry

MAGIC = b"GPT1"

_KIND_TO_BYTE = {POINT: 0, LINESTRING: 1, POLYGON: 2}
_BYTE_TO_KIND = {v: k for k, v in _KIND_TO_BYTE.items()}


class SnapshotError(ValueError):
    pass


def _write_node(fh: BinaryIO, node: IndexNode) -> None:
    mask = 0
    if node.children is not None:
        for i, child in enumerate(node.children):
            if child is not None:
                mask |= 1 << i
    fh.write(struct.pack("<B", mask))
    for lst in (node.il, node.bl, node.ul):
        items = lst or ()
        fh.write(struct.pack("<I", len(items)))
        if items:
            fh.write(struct.pack(f"<{len(items)}Q", *items))
    if node.children is not None:
        for child in node.children:
            if child is not None:
                _write_node(fh, child)


def _read_node(fh: BinaryIO) -> IndexNode:
    node = IndexNode()
    (mask,) = struct.unpack("<B", fh.read(1))
    lists = []
    for _ in range(3):
        (count,) = struct.unpack("<I", fh.read(4))
        if count:
            lists.append(list(struct.unpack(f"<{count}Q", fh.read(8 * count))))
        else:
            lists.append(None)
    node.il, node.bl, node.ul = lists
    if mask:
        node.children = [None, None, None, None]
        for i in range(4):
            if mask & (1 << i):
                node.children[i] = _read_node(fh)
    return node


def _write_geometry(fh: BinaryIO, g: Geometry) -> None:
    fh.write(struct.pack("<BI", _KIND_TO_BYTE[g.kind], len(g.rings)))
    for ring in g.rings:
        fh.write(struct.pack("<I", len(ring)))
        flat = [v for c in ring for v in c]
        fh.write(struct.pack(f"<{len(flat)}d", *flat))


def _read_geometry(fh: BinaryIO) -> Geometry:
    kind_b, n_rings = struct.unpack("<BI", fh.read(5))
    rings = []
    for _ in range(n_rings):
        (n,) = struct.unpack("<I", fh.read(4))
        flat = struct.unpack(f"<{2 * n}d", fh.read(16 * n))
        rings.append(list(zip(flat[0::2], flat[1::2])))
    return Geometry(_BYTE_TO_KIND[kind_b], rings, validate=False)


def save_index(tree: GPTree, table: LookupTable, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<BB", int(tree.optimized), int(tree.pruned)))
        cfg = tree.config
        fh.write(struct.pack("<III", cfg.seg, cfg.max_level, cfg.point_level))
        b = tree.extent.bounds
        fh.write(struct.pack("<4d", b.min_x, b.min_y, b.max_x, b.max_y))
        fh.write(struct.pack("<I", len(tree.sub_roots)))
        for sub in tree.sub_roots:
            fh.write(struct.pack("<BQ", sub.prefix.level, sub.prefix.code))
            _write_node(fh, sub.node)
        fh.write(struct.pack("<I", len(table)))
        for sid in sorted(table.ids()):
            entry = table[sid]
            fh.write(struct.pack("<Q", sid))
            _write_geometry(fh, entry.geometry)
            fh.write(struct.pack("<I", len(entry.cells)))
            for gc in entry.cells:
                fh.write(struct.pack("<BQB", gc.cell.level, gc.cell.code, int(gc.is_interior)))


def load_index(path: str) -> tuple[GPTree, LookupTable]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise SnapshotError(f"bad magic {magic!r}; expected {MAGIC!r}")
        optimized, pruned = struct.unpack("<BB", fh.read(2))
        seg, max_level, point_level = struct.unpack("<III", fh.read(12))
        cfg = DecompositionConfig(seg=seg, max_level=max_level, point_level=point_level)
        extent = GridExtent(Envelope(*struct.unpack("<4d", fh.read(32))))
        (n_subs,) = struct.unpack("<I", fh.read(4))
        sub_roots = []
        for _ in range(n_subs):
            level, code = struct.unpack("<BQ", fh.read(9))
            sub_roots.append(SubRoot(CellCode(level, code), _read_node(fh)))
        root = sub_roots[0].node if n_subs == 1 and sub_roots[0].prefix.level == 0 else IndexNode()
        tree = GPTree(root, cfg, extent, sub_roots=sub_roots, optimized=bool(optimized), pruned=bool(pruned))
        table = LookupTable()
        (n_entries,) = struct.unpack("<I", fh.read(4))
        for _ in range(n_entries):
            (sid,) = struct.unpack("<Q", fh.read(8))
            geom = _read_geometry(fh)
            (n_cells,) = struct.unpack("<I", fh.read(4))
            cells = []
            for _ in range(n_cells):
                level, code, interior = struct.unpack("<BQB", fh.read(10))
                cells.append(GridCell(CellCode(level, code), bool(interior)))
            table.entries[sid] = TableEntry(geom, tuple(cells))
        return tree, table
