"""Shared helpers: seeded random geometry builders and tiny brute-force oracles."""

from __future__ import annotations

import math
import random

import pytest

from gptree.geometry import Envelope, Geometry, Segment, SpatialObject
from gptree.grid import GridExtent
from gptree.synth import SynthSpec, generate_synthetic

UNIT_EXTENT = GridExtent(Envelope(0.0, 0.0, 16.0, 16.0))


def rand_point(rng: random.Random, box: Envelope) -> Geometry:
    return Geometry.point(rng.uniform(box.min_x, box.max_x), rng.uniform(box.min_y, box.max_y))


def rand_linestring(rng: random.Random, box: Envelope, n_segs: int = 4, scale: float = 0.08) -> Geometry:
    step = scale * box.width
    x = rng.uniform(box.min_x + step * n_segs, box.max_x - step * n_segs)
    y = rng.uniform(box.min_y + step * n_segs, box.max_y - step * n_segs)
    heading = rng.uniform(0, 2 * math.pi)
    coords = [(x, y)]
    for _ in range(n_segs):
        heading += rng.gauss(0, 0.8)
        x += step * math.cos(heading)
        y += step * math.sin(heading)
        coords.append((x, y))
    return Geometry.linestring(coords)


def rand_polygon(rng: random.Random, box: Envelope, n: int = 7, scale: float = 0.08) -> Geometry:
    radius = scale * box.width * (0.5 + rng.random())
    cx = rng.uniform(box.min_x + radius, box.max_x - radius)
    cy = rng.uniform(box.min_y + radius, box.max_y - radius)
    base = rng.uniform(0, 2 * math.pi)
    ring = []
    for i in range(n):
        ang = base + (i + 0.2 + 0.6 * rng.random()) * 2 * math.pi / n
        rad = radius * (0.5 + 0.5 * rng.random())
        ring.append((cx + rad * math.cos(ang), cy + rad * math.sin(ang)))
    ring.append(ring[0])
    return Geometry.polygon(ring)


def rand_geometry(rng: random.Random, box: Envelope) -> Geometry:
    r = rng.random()
    if r < 1 / 3:
        return rand_point(rng, box)
    if r < 2 / 3:
        return rand_linestring(rng, box, n_segs=rng.randrange(2, 7))
    return rand_polygon(rng, box, n=rng.randrange(4, 9))


def rand_segment(rng: random.Random, box: Envelope, max_len: float = 0.3) -> Segment:
    x = rng.uniform(box.min_x, box.max_x)
    y = rng.uniform(box.min_y, box.max_y)
    ang = rng.uniform(0, 2 * math.pi)
    ln = max_len * box.width * (0.05 + rng.random())
    return Segment((x, y), (x + ln * math.cos(ang), y + ln * math.sin(ang)))


def envelope_polygon(env: Envelope) -> Geometry:
    return Geometry.polygon(
        [
            (env.min_x, env.min_y),
            (env.max_x, env.min_y),
            (env.max_x, env.max_y),
            (env.min_x, env.max_y),
            (env.min_x, env.min_y),
        ]
    )


def mixed_dataset(seed: int, count: int, extent: GridExtent) -> list[SpatialObject]:
    spec = SynthSpec(
        count=count,
        kinds={"Point": 0.4, "LineString": 0.3, "Polygon": 0.3},
        extent=extent,
        seed=seed,
        cluster_count=6,
        avg_segments=7,
        cluster_spread=0.08,
        object_scale=0.004,
    )
    return generate_synthetic(spec)


@pytest.fixture(scope="session")
def world_extent():
    from gptree.grid import WORLD_EXTENT

    return WORLD_EXTENT
