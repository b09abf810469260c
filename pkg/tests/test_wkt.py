import pytest

from gptree.geometry import GeometryError, LINESTRING, POINT, POLYGON, segments
from gptree.wkt import WktParseError, format_wkt, parse_wkt


def test_point():
    g = parse_wkt("POINT (1 2)")
    assert g.kind == POINT
    assert g.rings[0][0] == (1.0, 2.0)


def test_linestring_segments():
    g = parse_wkt("LINESTRING (0 0, 1 1, 2 0)")
    assert g.kind == LINESTRING
    assert len(segments(g)) == 2


def test_unbalanced_parens():
    with pytest.raises(WktParseError):
        parse_wkt("POLYGON ((0 0, 1 0, 1 1, 0 0)")


def test_error_carries_position():
    with pytest.raises(WktParseError) as err:
        parse_wkt("POINT (1 x)")
    assert err.value.position == 9


def test_polygon_with_hole():
    g = parse_wkt("POLYGON ((0 0, 10 0, 10 10, 0 10, 0 0), (4 4, 6 4, 6 6, 4 6, 4 4))")
    assert g.kind == POLYGON
    assert len(g.rings) == 2
    assert len(segments(g)) == 8


def test_case_and_whitespace_insensitive():
    g = parse_wkt("  point( -1.5   2e1 ) ")
    assert g.rings[0][0] == (-1.5, 20.0)


def test_open_ring_rejected():
    with pytest.raises(GeometryError):
        parse_wkt("POLYGON ((0 0, 1 0, 1 1, 0 1))")


def test_short_ring_rejected():
    with pytest.raises(GeometryError):
        parse_wkt("POLYGON ((0 0, 1 0, 0 0))")


def test_self_intersecting_ring_rejected():
    with pytest.raises(GeometryError):
        parse_wkt("POLYGON ((0 0, 2 2, 2 0, 0 2, 0 0))")


def test_single_coordinate_linestring_rejected():
    with pytest.raises(GeometryError):
        parse_wkt("LINESTRING (1 1)")


def test_duplicate_consecutive_coordinates_rejected():
    with pytest.raises(GeometryError):
        parse_wkt("LINESTRING (0 0, 0 0, 1 1)")


def test_trailing_garbage_rejected():
    with pytest.raises(WktParseError):
        parse_wkt("POINT (1 2) extra")


def test_unknown_tag_rejected():
    with pytest.raises(WktParseError):
        parse_wkt("CIRCLE (0 0)")


def test_multi_not_supported():
    with pytest.raises(WktParseError):
        parse_wkt("MULTIPOINT ((0 0), (1 1))")


@pytest.mark.parametrize(
    "text",
    [
        "POINT (1.5 -2.25)",
        "LINESTRING (0 0, 0.1 3.75, -2 0.5)",
        "POLYGON ((0 0, 8 0, 8 8, 0 8, 0 0), (2 2, 3 2, 3 3, 2 3, 2 2))",
    ],
)
def test_round_trip(text):
    g = parse_wkt(text)
    assert parse_wkt(format_wkt(g)) == g


def test_round_trip_preserves_floats():
    g = parse_wkt("POINT (0.1234567890123456 -179.99999999999997)")
    g2 = parse_wkt(format_wkt(g))
    assert g2.rings[0][0] == g.rings[0][0]
