"""Deterministic synthetic datasets: clustered points, random-walk
linestrings and perturbed star polygons."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .geometry import Geometry, LINESTRING, POINT, POLYGON, SpatialObject
from .grid import GridExtent, WORLD_EXTENT


@dataclass
class SynthSpec:
    count: int
    kinds: dict[str, float] = field(default_factory=lambda: {POINT: 1.0})
    extent: GridExtent = WORLD_EXTENT
    seed: int = 0
    cluster_count: int = 8
    avg_segments: int = 8
    cluster_spread: float = 0.03  # stddev as a fraction of the extent width
    object_scale: float = 1e-4  # walk step / polygon radius as extent fraction

    def __post_init__(self):
        if self.count <= 0:
            raise ValueError("count must be positive")
        total = sum(self.kinds.values())
        if total <= 0:
            raise ValueError("kind mix must have positive weight")
        self.kinds = {k: v / total for k, v in self.kinds.items()}


def _clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else hi if v > hi else v


def generate_synthetic(spec: SynthSpec) -> list[SpatialObject]:
    """Seed-deterministic objects with the requested kind mix.

    Placement is clustered Gaussian around uniformly drawn cluster
    centers; linestrings are random walks and polygons are star-shaped
    rings with perturbed radii, both sized so that segment counts average
    ``spec.avg_segments``.
    """
    rng = random.Random(spec.seed)
    b = spec.extent.bounds
    margin = 0.02 * min(b.width, b.height)
    centers = [
        (rng.uniform(b.min_x + margin, b.max_x - margin), rng.uniform(b.min_y + margin, b.max_y - margin))
        for _ in range(max(1, spec.cluster_count))
    ]
    spread = spec.cluster_spread * b.width
    kinds = sorted(spec.kinds.items())
    out: list[SpatialObject] = []
    for oid in range(spec.count):
        r = rng.random()
        acc = 0.0
        kind = kinds[-1][0]
        for name, w in kinds:
            acc += w
            if r < acc:
                kind = name
                break
        ccx, ccy = centers[rng.randrange(len(centers))]
        x = _clamp(ccx + rng.gauss(0.0, spread), b.min_x + margin, b.max_x - margin)
        y = _clamp(ccy + rng.gauss(0.0, spread), b.min_y + margin, b.max_y - margin)
        if kind == POINT:
            geom = Geometry.point(x, y)
        elif kind == LINESTRING:
            geom = _walk(rng, x, y, spec, b, margin)
        elif kind == POLYGON:
            geom = _star(rng, x, y, spec, b, margin)
        else:
            raise ValueError(f"unknown kind {kind!r}")
        out.append(SpatialObject(oid, geom))
    return out


def _segment_count(rng: random.Random, avg: int) -> int:
    return max(2, int(round(rng.gauss(avg, 0.2 * avg))))


def _walk(rng, x, y, spec: SynthSpec, b, margin) -> Geometry:
    n_segs = _segment_count(rng, spec.avg_segments)
    step = spec.object_scale * b.width * (0.5 + rng.random())
    heading = rng.uniform(0.0, 2.0 * math.pi)
    coords = [(x, y)]
    for _ in range(n_segs):
        heading += rng.gauss(0.0, 0.7)
        nx = _clamp(x + step * math.cos(heading), b.min_x + margin, b.max_x - margin)
        ny = _clamp(y + step * math.sin(heading), b.min_y + margin, b.max_y - margin)
        if (nx, ny) == (x, y):  # clamped into a corner: nudge inward
            heading += math.pi / 2
            nx = _clamp(x + step * math.cos(heading), b.min_x + margin, b.max_x - margin)
            ny = _clamp(y + step * math.sin(heading), b.min_y + margin, b.max_y - margin)
        x, y = nx, ny
        coords.append((x, y))
    return Geometry.linestring(coords)


def _star(rng, x, y, spec: SynthSpec, b, margin) -> Geometry:
    # a closed ring of n vertices carries n segments
    n = max(3, _segment_count(rng, spec.avg_segments))
    radius = spec.object_scale * b.width * (1.0 + 2.0 * rng.random())
    x = _clamp(x, b.min_x + margin + radius, b.max_x - margin - radius)
    y = _clamp(y, b.min_y + margin + radius, b.max_y - margin - radius)
    base = rng.uniform(0.0, 2.0 * math.pi)
    ring = []
    for i in range(n):
        ang = base + (i + 0.25 + 0.5 * rng.random()) * (2.0 * math.pi / n)
        rad = radius * (0.55 + 0.45 * rng.random())
        ring.append((x + rad * math.cos(ang), y + rad * math.sin(ang)))
    ring.append(ring[0])
    return Geometry.polygon(ring)
