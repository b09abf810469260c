"""Well-known-text reader/writer for the 2-D POINT/LINESTRING/POLYGON subset."""

from __future__ import annotations

from .geometry import Geometry, GeometryError, LINESTRING, POINT, POLYGON


class WktParseError(GeometryError):
    """Syntax error; ``position`` is the 0-based offset into the input."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, ch: str) -> None:
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise WktParseError(f"expected {ch!r}", self.pos)
        self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def number(self) -> float:
        self.skip_ws()
        start = self.pos
        n = len(self.text)
        if self.pos < n and self.text[self.pos] in "+-":
            self.pos += 1
        digits = 0
        while self.pos < n and (self.text[self.pos].isdigit() or self.text[self.pos] == "."):
            digits += 1
            self.pos += 1
        if self.pos < n and self.text[self.pos] in "eE":
            self.pos += 1
            if self.pos < n and self.text[self.pos] in "+-":
                self.pos += 1
            while self.pos < n and self.text[self.pos].isdigit():
                self.pos += 1
        if digits == 0:
            raise WktParseError("expected a number", start)
        try:
            return float(self.text[start:self.pos])
        except ValueError:
            raise WktParseError("malformed number", start) from None

    def coord(self) -> tuple[float, float]:
        x = self.number()
        y = self.number()
        return (x, y)

    def coord_list(self) -> list[tuple[float, float]]:
        self.expect("(")
        coords = [self.coord()]
        while self.peek() == ",":
            self.expect(",")
            coords.append(self.coord())
        self.expect(")")
        return coords

    def end(self) -> None:
        self.skip_ws()
        if self.pos != len(self.text):
            raise WktParseError("trailing characters", self.pos)


def parse_wkt(text: str) -> Geometry:
    """Parse one POINT, LINESTRING or POLYGON literal.

    Raises WktParseError for syntax problems and GeometryError when the
    parsed shape violates a geometry invariant (open ring, duplicate
    consecutive coordinates, self-intersection, non-finite values).
    """
    sc = _Scanner(text)
    sc.skip_ws()
    upper = text.upper()
    if upper.startswith("POINT", sc.pos):
        sc.pos += len("POINT")
        sc.expect("(")
        x, y = sc.coord()
        sc.expect(")")
        sc.end()
        return Geometry.point(x, y)
    if upper.startswith("LINESTRING", sc.pos):
        sc.pos += len("LINESTRING")
        coords = sc.coord_list()
        sc.end()
        return Geometry.linestring(coords)
    if upper.startswith("POLYGON", sc.pos):
        sc.pos += len("POLYGON")
        sc.expect("(")
        rings = [sc.coord_list()]
        while sc.peek() == ",":
            sc.expect(",")
            rings.append(sc.coord_list())
        sc.expect(")")
        sc.end()
        return Geometry.polygon(rings[0], rings[1:])
    raise WktParseError("expected POINT, LINESTRING or POLYGON", sc.pos)


def _fmt(v: float) -> str:
    # repr round-trips doubles exactly; trim the trailing ".0" of integral values
    s = repr(v)
    return s[:-2] if s.endswith(".0") else s


def format_wkt(g: Geometry) -> str:
    """Serialize a geometry back to WKT (exact float round-trip)."""
    if g.kind == POINT:
        x, y = g.rings[0][0]
        return f"POINT ({_fmt(x)} {_fmt(y)})"
    if g.kind == LINESTRING:
        body = ", ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in g.rings[0])
        return f"LINESTRING ({body})"
    rings = ", ".join(
        "(" + ", ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in ring) + ")" for ring in g.rings
    )
    return f"POLYGON ({rings})"
