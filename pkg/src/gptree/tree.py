"""The prefix-tree index over decomposed grid cells.

Construction inserts every cell of every object by consuming two code
bits per level from the root; interior cells land in a node's IL,
boundary cells in its BL.  Node optimization then migrates all references
down to leaves (parent IL into child ILs, parent BL/UL into child ULs),
and pruning replaces empty top layers with up to four sub-roots carrying
their full code prefixes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .geometry import Geometry, GeometryError
from .grid import (
    CellCode,
    DecompositionConfig,
    GridCell,
    GridExtent,
    ROOT_CELL,
    decompose,
    quadrant_at,
)


class IndexNode:
    """One prefix-tree node: four child slots and the IL/BL/UL id lists.

    ``children`` stays None for leaves; the lists stay None until used.
    """

    __slots__ = ("children", "il", "bl", "ul")

    def __init__(self):
        self.children: list[IndexNode | None] | None = None
        self.il: list[int] | None = None
        self.bl: list[int] | None = None
        self.ul: list[int] | None = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def has_items(self) -> bool:
        return bool(self.il) or bool(self.bl) or bool(self.ul)

    def child(self, i: int) -> "IndexNode | None":
        return None if self.children is None else self.children[i]

    def ensure_child(self, i: int) -> "IndexNode":
        if self.children is None:
            self.children = [None, None, None, None]
        node = self.children[i]
        if node is None:
            node = IndexNode()
            self.children[i] = node
        return node

    def existing_children(self) -> list[tuple[int, "IndexNode"]]:
        if self.children is None:
            return []
        return [(i, c) for i, c in enumerate(self.children) if c is not None]


class TableEntry(NamedTuple):
    geometry: Geometry
    cells: tuple[GridCell, ...]


class LookupTable:
    """Object id -> (geometry, decomposed cells)."""

    def __init__(self):
        self.entries: dict[int, TableEntry] = {}

    def __getitem__(self, sid: int) -> TableEntry:
        return self.entries[sid]

    def __contains__(self, sid: int) -> bool:
        return sid in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self):
        return self.entries.keys()

    def memory_bytes(self) -> int:
        """8 B key + 16 B per coordinate + 9 B per stored cell, per entry."""
        total = 0
        for entry in self.entries.values():
            coords = sum(len(r) for r in entry.geometry.rings)
            total += 8 + 16 * coords + 9 * len(entry.cells)
        return total


class SubRoot(NamedTuple):
    prefix: CellCode
    node: IndexNode


@dataclass
class GPTree:
    """The index: a root, post-pruning sub-roots, and its build configuration."""

    root: IndexNode
    config: DecompositionConfig
    extent: GridExtent
    sub_roots: list[SubRoot] = field(default_factory=list)
    optimized: bool = False
    pruned: bool = False

    def __post_init__(self):
        if not self.sub_roots:
            self.sub_roots = [SubRoot(ROOT_CELL, self.root)]


def build(
    objects: Sequence, cfg: DecompositionConfig, extent: GridExtent
) -> tuple[GPTree, LookupTable]:
    """Construct the basic (unoptimized) tree plus the lookup table."""
    tree = GPTree(IndexNode(), cfg, extent)
    table = LookupTable()
    for obj in objects:
        if obj.id in table:
            raise GeometryError(f"duplicate object id {obj.id}")
        cells = tuple(decompose(obj.geometry, cfg, extent))
        table.entries[obj.id] = TableEntry(obj.geometry, cells)
        for gc in cells:
            node = tree.root
            for depth in range(gc.cell.level):
                node = node.ensure_child(quadrant_at(gc.cell, depth))
            if gc.is_interior:
                if node.il is None:
                    node.il = []
                node.il.append(obj.id)
            else:
                if node.bl is None:
                    node.bl = []
                node.bl.append(obj.id)
    return tree, table


def node_optimization(root: IndexNode) -> IndexNode:
    """Migrate every reference into leaf nodes (breadth-first).

    An internal node holding items pushes its IL into each child's IL and
    its BL and UL into each child's UL, then clears its own lists.  All
    four children are materialized first: a missing child slot becomes an
    empty leaf so that descents into unindexed regions still see the
    inherited references.  Interior membership is safe to push down
    because a covered cell's children are covered as well; BL/UL
    inheritance is only a may-overlap claim, hence lands in UL.
    """
    queue = deque([root])
    while queue:
        node = queue.popleft()
        if node.is_leaf:
            continue
        if node.has_items():
            for i in range(4):
                child = node.ensure_child(i)
                if node.il:
                    if child.il is None:
                        child.il = []
                    child.il.extend(node.il)
                inherited = (node.bl or []) + (node.ul or [])
                if inherited:
                    if child.ul is None:
                        child.ul = []
                    child.ul.extend(inherited)
            node.il = None
            node.bl = None
            node.ul = None
        for _, child in node.existing_children():
            queue.append(child)
    return root


def prune(tree: GPTree) -> GPTree:
    """Replace empty top layers by at most four sub-roots.

    Each direct child of the root starts as a sub-root; an item-free
    internal sub-root is replaced by its existing children as long as the
    total sub-root count stays within four, and newly formed sub-roots are
    reconsidered.  Every sub-root keeps the full cell code leading to it,
    so searches resume bit-consumption below the removed layers.
    """
    root = tree.root
    if root.is_leaf or root.has_items():
        tree.sub_roots = [SubRoot(ROOT_CELL, root)]
        tree.pruned = True
        return tree
    queue: deque[SubRoot] = deque()
    for i, child in root.existing_children():
        queue.append(SubRoot(CellCode(1, i), child))
    final: list[SubRoot] = []
    while queue:
        sub = queue.popleft()
        if sub.node.is_leaf or sub.node.has_items():
            final.append(sub)
            continue
        kids = sub.node.existing_children()
        if len(final) + len(queue) + len(kids) > 4:
            final.append(sub)
            continue
        for i, child in kids:
            queue.append(SubRoot(CellCode(sub.prefix.level + 1, (sub.prefix.code << 2) | i), child))
    final.sort(key=lambda s: (s.prefix.level, s.prefix.code))
    tree.sub_roots = final
    tree.pruned = True
    return tree


def build_index(
    objects: Sequence,
    cfg: DecompositionConfig | None = None,
    extent: GridExtent | None = None,
    optimize: bool = True,
) -> tuple[GPTree, LookupTable]:
    """build + node_optimization + prune in one call."""
    from .grid import WORLD_EXTENT

    cfg = cfg or DecompositionConfig()
    extent = extent or WORLD_EXTENT
    tree, table = build(objects, cfg, extent)
    if optimize:
        optimize_tree(tree)
        prune(tree)
    return tree, table


def optimize_tree(tree: GPTree) -> GPTree:
    node_optimization(tree.root)
    tree.optimized = True
    return tree


@dataclass(frozen=True)
class TreeStats:
    height: int
    node_count: int
    leaf_count: int
    il_entries: int
    bl_entries: int
    ul_entries: int
    memory_bytes: int


def stats(tree: GPTree) -> TreeStats:
    """Structural counts and the analytic in-memory cost of the tree.

    ``height`` is the longest search path in node steps below a sub-root:
    pruning shortens it because a sub-root's code prefix is matched in one
    comparison rather than walked level by level.  Every node costs 32 B
    of child slots plus 8 B per stored id.  Nodes that may hold references
    carry three 16 B list headers; after node optimization the internal
    nodes provably store nothing and shed that allowance, which is where
    the optimization's memory win comes from.
    """
    height = 0
    nodes = 0
    leaves = 0
    il = bl = ul = 0
    memory = 0
    for sub in tree.sub_roots:
        stack = [(sub.node, 0)]
        while stack:
            node, level = stack.pop()
            nodes += 1
            height = max(height, level)
            ids = len(node.il or ()) + len(node.bl or ()) + len(node.ul or ())
            il += len(node.il or ())
            bl += len(node.bl or ())
            ul += len(node.ul or ())
            memory += 32 + 8 * ids
            if node.is_leaf:
                leaves += 1
                memory += 48
            else:
                if not tree.optimized:
                    memory += 48
                for _, child in node.existing_children():
                    stack.append((child, level + 1))
    return TreeStats(height, nodes, leaves, il, bl, ul, memory)
