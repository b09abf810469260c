import math
import random

import pytest

from gptree.baseline import EpsDistance, Knn, Range, oracle_query
from gptree.geometry import (
    Envelope,
    Geometry,
    SpatialObject,
    THETA_CONTAINS,
    THETA_INTERSECTS,
    distance,
    envelope,
    exact_predicate,
)
from gptree.grid import (
    CellCode,
    DecompositionConfig,
    GridCell,
    GridExtent,
    cell_bounds,
    cell_containing,
    encode,
    is_ancestor,
)
from gptree.queries import (
    GHSI,
    QueryStats,
    TRUE_HIT,
    UNCERTAIN,
    build_ghsi,
    eps_distance_query,
    extend_query_cells,
    ghsi_analytic_bytes,
    knn_query,
    literal_any_interior_rule,
    range_query,
    refine_candidate,
    unviewed_cells,
)
from gptree.tree import build, optimize_tree, prune

from conftest import envelope_polygon, mixed_dataset, rand_point, rand_polygon

EXT = GridExtent(Envelope(0.0, 0.0, 16.0, 16.0))
CFG = DecompositionConfig(seg=4, max_level=6)


def _index(objects, cfg=CFG, optimize=True):
    tree, table = build(objects, cfg, EXT)
    if optimize:
        optimize_tree(tree)
        prune(tree)
    return tree, table


def _dataset(seed, count=400):
    return mixed_dataset(seed, count, EXT)


# ---------------------------------------------------------------------------
# range query


def test_range_empty_when_no_shared_path():
    objects = [SpatialObject(0, Geometry.point(1.0, 1.0))]
    tree, table = _index(objects)
    q = envelope_polygon(Envelope(12, 12, 13, 13))
    assert range_query(tree, table, q) == []


def test_true_hit_skips_refinement():
    # object strictly inside a region that the query's interior cells cover
    obj = SpatialObject(0, Geometry.point(4.2, 4.3))
    tree, table = _index([obj], DecompositionConfig(seg=4, max_level=5))
    q = envelope_polygon(Envelope(3.0, 3.0, 6.0, 6.0))
    st = QueryStats(keep_candidates=True)
    res = range_query(tree, table, q, stats=st)
    assert [o.id for o in res] == [0]
    assert st.n_true_hits == 1
    assert st.candidates[0].hit_tag == TRUE_HIT
    assert st.n_uncertain_pass == 0 and st.n_uncertain_fail == 0


def test_interior_object_cell_over_query_cell_is_true_hit():
    # big polygon covering the query cell region: candidate matched through
    # an interior object cell that is an ancestor of the query cell
    big = envelope_polygon(Envelope(0.5, 0.5, 10.0, 10.0))
    cfg = DecompositionConfig(seg=1, max_level=6)
    tree, table = _index([SpatialObject(0, big)], cfg)
    interior_cells = [gc for gc in table[0].cells if gc.is_interior]
    assert interior_cells  # the config must actually yield interior coverage
    q = Geometry.point(4.05, 4.05)
    st = QueryStats(keep_candidates=True)
    res = range_query(tree, table, q, stats=st)
    assert [o.id for o in res] == [0]
    assert st.candidates[0].hit_tag == TRUE_HIT


def test_range_oracle_equivalence_random():
    rng = random.Random(77)
    objects = _dataset(201, 400)
    tree, table = _index(objects)
    for _ in range(60):
        q = rand_polygon(rng, Envelope(1, 1, 15, 15), n=6, scale=0.12)
        got = {o.id for o in range_query(tree, table, q)}
        want = {o.id for o in oracle_query(objects, q, Range())}
        assert got == want


def test_range_contains_oracle_equivalence():
    rng = random.Random(78)
    objects = _dataset(202, 300)
    tree, table = _index(objects)
    for _ in range(40):
        q = rand_polygon(rng, Envelope(1, 1, 15, 15), n=6, scale=0.25)
        got = {o.id for o in range_query(tree, table, q, THETA_CONTAINS)}
        want = {o.id for o in oracle_query(objects, q, Range(THETA_CONTAINS))}
        assert got == want


def test_range_rejects_query_outside_extent():
    objects = _dataset(203, 10)
    tree, table = _index(objects)
    with pytest.raises(ValueError):
        range_query(tree, table, Geometry.point(99.0, 0.5))


def test_candidate_dedup_single_match_with_union():
    # a long object crossed by a query via several cells: one CandidateMatch
    obj = SpatialObject(0, Geometry.linestring([(1, 8.01), (15, 8.02)]))
    tree, table = _index([obj])
    q = envelope_polygon(Envelope(2, 7, 14, 9))
    st = QueryStats(keep_candidates=True)
    range_query(tree, table, q, stats=st)
    assert len(st.candidates) == 1
    assert len(st.candidates[0].overlapping_cells) > 1


def test_results_are_spatial_objects_sorted_by_id():
    objects = _dataset(204, 200)
    tree, table = _index(objects)
    q = envelope_polygon(Envelope(2, 2, 14, 14))
    res = range_query(tree, table, q)
    ids = [o.id for o in res]
    assert ids == sorted(ids)
    for o in res:
        assert o.geometry == table[o.id].geometry


# ---------------------------------------------------------------------------
# refinement


def test_refine_crossing_inside_shared_cell():
    a = Geometry.linestring([(3.0, 3.0), (5.0, 5.0)])
    b = Geometry.linestring([(3.0, 5.0), (5.0, 3.0)])
    tree, table = _index([SpatialObject(0, a)])
    st = QueryStats(keep_candidates=True)
    res = range_query(tree, table, b, stats=st)
    assert [o.id for o in res] == [0]


def test_refine_false_hit_mbr_overlap():
    # diagonal linestrings with overlapping MBRs but no contact
    a = Geometry.linestring([(2.0, 2.0), (6.0, 6.0)])
    b = Geometry.linestring([(2.0, 2.6), (5.4, 6.0)])
    tree, table = _index([SpatialObject(0, a)])
    st = QueryStats(keep_candidates=True)
    res = range_query(tree, table, b, stats=st)
    assert res == []
    assert st.n_uncertain_fail >= 0  # either filtered away or refined out
    assert envelope(a).intersects(envelope(b))


def test_refine_verdicts_match_exact_predicate():
    rng = random.Random(79)
    objects = _dataset(205, 300)
    tree, table = _index(objects)
    checked = 0
    for _ in range(40):
        q = rand_polygon(rng, Envelope(1, 1, 15, 15), n=6, scale=0.15)
        st = QueryStats(keep_candidates=True)
        range_query(tree, table, q, stats=st)
        for cand in st.candidates:
            if cand.hit_tag != UNCERTAIN:
                continue
            got = refine_candidate(cand, q, table, EXT)
            want = exact_predicate(q, table[cand.s_id].geometry, THETA_INTERSECTS)
            assert got == want
            checked += 1
    assert checked > 200


def test_refine_unknown_id_raises():
    objects = [SpatialObject(0, Geometry.point(2, 2))]
    tree, table = _index(objects)
    from gptree.queries import CandidateMatch

    bogus = CandidateMatch(99, (), (GridCell(CellCode(1, 0), False),), UNCERTAIN)
    with pytest.raises(KeyError):
        refine_candidate(bogus, Geometry.point(2, 2), table, EXT)


# ---------------------------------------------------------------------------
# true-hit soundness / filter completeness


def test_true_hits_always_sound_and_filter_complete():
    rng = random.Random(80)
    objects = _dataset(206, 350)
    tree, table = _index(objects)
    for _ in range(40):
        q = rand_polygon(rng, Envelope(1, 1, 15, 15), n=7, scale=0.14)
        st = QueryStats(keep_candidates=True)
        range_query(tree, table, q, stats=st)
        cand_ids = {c.s_id for c in st.candidates}
        for cand in st.candidates:
            if cand.hit_tag == TRUE_HIT:
                assert exact_predicate(q, table[cand.s_id].geometry, THETA_INTERSECTS)
        for o in oracle_query(objects, q, Range()):
            assert o.id in cand_ids


def test_unsound_literal_rule_produces_false_positive():
    """Mutation sanity: the 'any interior overlapping cell' reading must be
    caught by the oracle gate on an adversarial layout."""
    # object: small square exactly covering a deep cell -> interior object cell;
    # query: thin L-shaped polygon whose coarse boundary cell contains that
    # cell but whose geometry stays away from the object
    target = cell_bounds(encode(9, 9, 4), EXT)
    obj = SpatialObject(0, envelope_polygon(target))
    tree, table = _index([obj], DecompositionConfig(seg=30, max_level=4))
    # query hugs the far corner of the level-2 cell containing the target
    q = Geometry.polygon([(8.05, 8.05), (8.4, 8.05), (8.4, 8.1), (8.1, 8.1), (8.1, 8.4), (8.05, 8.4), (8.05, 8.05)])
    truth = {o.id for o in oracle_query([obj], q, Range())}
    sound = {o.id for o in range_query(tree, table, q)}
    assert sound == truth == set()
    unsound = {o.id for o in range_query(tree, table, q, _rule=literal_any_interior_rule)}
    assert unsound != truth
    assert 0 in unsound


# ---------------------------------------------------------------------------
# eps-distance query


def test_eps_tiny_returns_only_intersecting():
    objects = [
        SpatialObject(0, Geometry.point(4.0, 4.0)),
        SpatialObject(1, Geometry.point(4.5, 4.0)),
    ]
    tree, table = _index(objects)
    q = envelope_polygon(Envelope(3.9, 3.9, 4.1, 4.1))
    res = eps_distance_query(tree, table, q, 1e-9)
    assert [o.id for o in res] == [0]


def test_eps_rejects_nonpositive():
    objects = _dataset(207, 10)
    tree, table = _index(objects)
    with pytest.raises(ValueError):
        eps_distance_query(tree, table, Geometry.point(2, 2), 0.0)


def test_eps_converted_interior_cell_accepts_without_distance(monkeypatch):
    # fine point-level cell has tiny diagonal -> converted to interior;
    # an object inside it is accepted with no distance call
    cfg = DecompositionConfig(seg=4, max_level=8, point_level=8)
    q = Geometry.point(5.03125, 5.03125)
    objects = [SpatialObject(0, Geometry.point(5.03, 5.03))]
    tree, table = _index(objects, cfg)
    calls = {"n": 0}
    import gptree.queries as queries_mod

    real = queries_mod.distance

    def counting(a, b):
        calls["n"] += 1
        return real(a, b)

    monkeypatch.setattr(queries_mod, "distance", counting)
    st = QueryStats(keep_candidates=True)
    res = eps_distance_query(tree, table, q, 0.5, stats=st)
    assert [o.id for o in res] == [0]
    assert st.n_true_hits >= 1
    assert calls["n"] == 0


def test_eps_oracle_equivalence_random():
    rng = random.Random(81)
    objects = _dataset(208, 350)
    tree, table = _index(objects)
    for _ in range(30):
        q = rand_polygon(rng, Envelope(2, 2, 14, 14), n=5, scale=0.08)
        eps = rng.choice([0.05, 0.2, 0.8])
        got = {o.id for o in eps_distance_query(tree, table, q, eps)}
        want = {o.id for o in oracle_query(objects, q, EpsDistance(eps))}
        assert got == want


def test_eps_monotone_in_eps():
    rng = random.Random(82)
    objects = _dataset(209, 250)
    tree, table = _index(objects)
    for _ in range(10):
        q = rand_point(rng, Envelope(2, 2, 14, 14))
        small = {o.id for o in eps_distance_query(tree, table, q, 0.1)}
        big = {o.id for o in eps_distance_query(tree, table, q, 0.7)}
        assert small <= big


# ---------------------------------------------------------------------------
# GHSI


def test_ghsi_points_counted_in_their_cell():
    objects = [SpatialObject(i, Geometry.point(1.1 + 0.001 * i, 1.1)) for i in range(10)]
    ghsi = build_ghsi(objects, 3, EXT)
    cell = cell_containing(1.1, 1.1, 3, EXT)
    assert ghsi.count_at(cell.code) == 10
    assert ghsi.total == 10


def test_ghsi_large_polygon_contributes_once():
    poly = envelope_polygon(Envelope(1, 1, 15, 15))
    ghsi = build_ghsi([SpatialObject(0, poly)], 4, EXT)
    assert sum(ghsi.counts.values()) == 1
    center_cell = cell_containing(8.0, 8.0, 4, EXT)
    assert ghsi.count_at(center_cell.code) == 1


def test_ghsi_analytic_size_level_11():
    assert ghsi_analytic_bytes(11) == 50_331_648


def test_ghsi_single_pass():
    objects = _dataset(210, 123)
    ghsi = build_ghsi(objects, 5, EXT)
    assert ghsi.build_reads == len(objects)


def test_extend_query_cells_3x3():
    start = {encode(4, 4, 4)}
    out = extend_query_cells(GHSI(4, {}, 0, 0), start)
    assert len(out) == 9
    cols_rows = {(c.code,) for c in out}
    assert len(cols_rows) == 9


def test_extend_query_cells_corner_2x2():
    start = {encode(0, 0, 4)}
    out = extend_query_cells(GHSI(4, {}, 0, 0), start)
    assert len(out) == 4


def test_extend_query_cells_reaches_full_grid():
    level = 3
    cells = {encode(3, 3, level)}
    ghsi = GHSI(level, {}, 0, 0)
    rounds = 0
    while len(cells) < (1 << level) ** 2:
        grown = extend_query_cells(ghsi, cells)
        assert len(grown) > len(cells)
        cells = grown
        rounds += 1
        assert rounds < 20
    assert len(cells) == (1 << level) ** 2


def test_unviewed_cells_exhaustive_small_grid():
    level = 3
    ghsi = GHSI(level, {}, 0, 0)
    q = Geometry.point(5.0, 7.0)
    rng = random.Random(83)
    for _ in range(20):
        d_k = rng.uniform(0.2, 10.0)
        viewed = {encode(rng.randrange(8), rng.randrange(8), level).code for _ in range(rng.randrange(10))}
        got = unviewed_cells(q, d_k, viewed, ghsi, EXT)
        expected = set()
        for col in range(8):
            for row in range(8):
                c = encode(col, row, level)
                if c.code in viewed:
                    continue
                if cell_bounds(c, EXT).distance_to_point(5.0, 7.0) <= d_k:
                    expected.add(c)
        assert got == expected


def test_unviewed_disc_covering_extent_gives_complement():
    level = 2
    ghsi = GHSI(level, {}, 0, 0)
    viewed = {encode(0, 0, level).code}
    got = unviewed_cells(Geometry.point(8, 8), 100.0, viewed, ghsi, EXT)
    assert len(got) == 15


# ---------------------------------------------------------------------------
# kNN


def _knn_fixture(seed, count=300, ghsi_level=4):
    objects = _dataset(seed, count)
    tree, table = _index(objects)
    ghsi = build_ghsi(objects, ghsi_level, EXT)
    return objects, tree, table, ghsi


def test_knn_k_at_least_dataset_returns_all_sorted():
    objects, tree, table, ghsi = _knn_fixture(211, 40)
    q = Geometry.point(8.0, 8.0)
    res = knn_query(tree, table, ghsi, q, 100)
    assert len(res) == 40
    dists = [distance(q, o.geometry) for o in res]
    assert dists == sorted(dists)


def test_knn_empty_dataset():
    tree, table = _index([])
    ghsi = build_ghsi([], 4, EXT)
    assert knn_query(tree, table, ghsi, Geometry.point(2, 2), 3) == []


def test_knn_rejects_bad_k():
    objects, tree, table, ghsi = _knn_fixture(212, 20)
    with pytest.raises(ValueError):
        knn_query(tree, table, ghsi, Geometry.point(2, 2), 0)


def test_knn_oracle_equivalence_point_queries():
    rng = random.Random(84)
    objects, tree, table, ghsi = _knn_fixture(213, 350)
    for k in (1, 5, 10, 20, 50):
        for _ in range(12):
            q = rand_point(rng, Envelope(1, 1, 15, 15))
            got = knn_query(tree, table, ghsi, q, k)
            want = oracle_query(objects, q, Knn(k))
            got_key = [(distance(q, o.geometry), o.id) for o in got]
            want_key = [(distance(q, o.geometry), o.id) for o in want]
            assert got_key == want_key


def test_knn_oracle_equivalence_polygon_queries():
    rng = random.Random(85)
    objects, tree, table, ghsi = _knn_fixture(214, 250)
    for _ in range(15):
        q = rand_polygon(rng, Envelope(2, 2, 14, 14), n=5, scale=0.06)
        got = knn_query(tree, table, ghsi, q, 8)
        want = oracle_query(objects, q, Knn(8))
        got_d = sorted(distance(q, o.geometry) for o in got)
        want_d = sorted(distance(q, o.geometry) for o in want)
        assert len(got_d) == len(want_d)
        for a, b in zip(got_d, want_d):
            assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)


def test_knn_prefix_monotonicity():
    objects, tree, table, ghsi = _knn_fixture(215, 200)
    q = Geometry.point(7.3, 9.1)
    prev = []
    for k in (1, 3, 7, 15):
        res = [o.id for o in knn_query(tree, table, ghsi, q, k)]
        assert res[: len(prev)] == prev
        prev = res


def test_knn_early_exit_skips_step3():
    # dense uniform cell population, query at a cell center
    rng = random.Random(86)
    objects = [
        SpatialObject(i, Geometry.point(rng.uniform(0.5, 15.5), rng.uniform(0.5, 15.5)))
        for i in range(2000)
    ]
    tree, table = _index(objects, DecompositionConfig(seg=4, max_level=8))
    ghsi = build_ghsi(objects, 3, EXT)  # 8x8 grid: ~31 objects per cell
    rect = cell_bounds(encode(3, 4, 3), EXT)
    q = Geometry.point(*rect.center())
    st = QueryStats()
    res = knn_query(tree, table, ghsi, q, 3, stats=st)
    assert len(res) == 3
    assert st.knn_step3_cells == 0


def test_knn_distance_ties_break_by_id():
    objects = [
        SpatialObject(3, Geometry.point(5.0, 4.0)),
        SpatialObject(1, Geometry.point(5.0, 6.0)),  # same distance from (5,5)
        SpatialObject(2, Geometry.point(9.0, 9.0)),
    ]
    tree, table = _index(objects)
    ghsi = build_ghsi(objects, 4, EXT)
    res = knn_query(tree, table, ghsi, Geometry.point(5.0, 5.0), 1)
    assert [o.id for o in res] == [1]


# ---------------------------------------------------------------------------
# result preservation across tree stages


def test_results_identical_across_basic_optimized_pruned():
    rng = random.Random(87)
    objects = _dataset(216, 250)
    queries = [rand_polygon(rng, Envelope(1, 1, 15, 15), n=6, scale=0.12) for _ in range(15)]
    eps_queries = [(rand_point(rng, Envelope(2, 2, 14, 14)), 0.4) for _ in range(10)]

    basic_tree, table = build(objects, CFG, EXT)
    opt_tree, _ = build(objects, CFG, EXT)
    optimize_tree(opt_tree)
    pruned_tree, _ = build(objects, CFG, EXT)
    optimize_tree(pruned_tree)
    prune(pruned_tree)

    for q in queries:
        a = sorted(o.id for o in range_query(basic_tree, table, q))
        b = sorted(o.id for o in range_query(opt_tree, table, q))
        c = sorted(o.id for o in range_query(pruned_tree, table, q))
        assert a == b == c
    for q, eps in eps_queries:
        a = sorted(o.id for o in eps_distance_query(basic_tree, table, q, eps))
        b = sorted(o.id for o in eps_distance_query(opt_tree, table, q, eps))
        c = sorted(o.id for o in eps_distance_query(pruned_tree, table, q, eps))
        assert a == b == c


def test_descent_visit_bound():
    objects = _dataset(217, 300)
    tree, table = _index(objects)
    rng = random.Random(88)
    for _ in range(25):
        q = rand_polygon(rng, Envelope(1, 1, 15, 15), n=6, scale=0.1)
        st = QueryStats()
        range_query(tree, table, q, stats=st)
        assert st.max_descent_visits <= CFG.max_level + 1
