"""Plain-text formats for algebras, measures and finite maps.

Every file is a sequence of ``key: payload`` lines; ``#`` starts a comment.

``ground: id,id,...``          the ground set, in printing order
``member: bitstring``          an algebra member (all members must be listed)
``generator: bitstring``       alternatively, generators of the algebra
``value: bitstring = p/q``     a measure value (measure files)
``map: x -> y``                a point of a finite map (pushforward files)
``codomain: id,id,...``        the codomain of the map
``f: id = p/q``                a function value

The ``i``-th bit of a bitstring is membership of the ``i``-th ground id.
Without member or generator lines the algebra is the full power set.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import Element, FiniteAlgebra, GroundSet, make_algebra
from .errors import InvalidInput
from .fam import Fam, validate_fam
from .rational import fmt, to_fraction

_KEYS = {"ground", "member", "generator", "value", "map", "codomain", "f"}


@dataclass
class Document:
    ground: GroundSet
    algebra: FiniteAlgebra
    values: dict = field(default_factory=dict)
    hmap: dict = field(default_factory=dict)
    codomain: GroundSet | None = None
    fvalues: dict = field(default_factory=dict)


class ParseError(InvalidInput):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _ids(payload: str) -> list[str]:
    return [s.strip() for s in payload.split(",") if s.strip()]


def parse_document(text: str) -> Document:
    ground = None
    members, generators, values, hmap, fvals = [], [], [], {}, {}
    codomain = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if ":" not in line:
            raise ParseError("expected 'key: value'", lineno)
        key, payload = line.split(":", 1)
        key = key.strip()
        payload = payload.strip()
        # 1-based column where the payload starts
        col = line.index(payload, line.index(":") + 1) + 1 if payload else len(line) + 1
        if key not in _KEYS:
            raise ParseError(f"unknown key {key!r}", lineno, raw.index(key) + 1)
        if key == "ground":
            if ground is not None:
                raise ParseError("duplicate ground line", lineno)
            try:
                ground = GroundSet(_ids(payload))
            except InvalidInput as exc:
                raise ParseError(str(exc), lineno, col) from None
            continue
        if key == "codomain":
            try:
                codomain = GroundSet(_ids(payload))
            except InvalidInput as exc:
                raise ParseError(str(exc), lineno, col) from None
            continue
        if key == "map":
            if "->" not in payload:
                raise ParseError("expected 'x -> y'", lineno, col)
            x, y = (s.strip() for s in payload.split("->", 1))
            hmap[x] = y
            continue
        if key == "f":
            if "=" not in payload:
                raise ParseError("expected 'id = p/q'", lineno, col)
            x, v = (s.strip() for s in payload.split("=", 1))
            try:
                fvals[x] = to_fraction(v, what=f"f({x})")
            except InvalidInput as exc:
                raise ParseError(str(exc), lineno, col + payload.index("=") + 2) from None
            continue
        if ground is None:
            raise ParseError("the ground line must come first", lineno)
        if key == "value":
            if "=" not in payload:
                raise ParseError("expected 'bitstring = p/q'", lineno, col)
            bits, v = (s.strip() for s in payload.split("=", 1))
            try:
                values.append((ground.from_bits(bits), to_fraction(v, what=f"value of {bits}")))
            except InvalidInput as exc:
                raise ParseError(str(exc), lineno, col) from None
            continue
        try:
            e = ground.from_bits(payload)
        except InvalidInput as exc:
            raise ParseError(str(exc), lineno, col) from None
        (members if key == "member" else generators).append(e)
    if ground is None:
        raise ParseError("missing ground line", 1)
    if members and generators:
        raise InvalidInput("use either member lines or generator lines, not both")
    if members:
        algebra = FiniteAlgebra.from_members(ground, members)
    elif generators:
        algebra = make_algebra(ground, generators)
    else:
        algebra = FiniteAlgebra.power_set(ground)
    vals = {}
    for e, v in values:
        if e in vals:
            raise InvalidInput(f"duplicate value for {e.bits()}")
        vals[e] = v
    for x in hmap:
        if x not in ground:
            raise InvalidInput(f"map line for {x!r}, which is not a ground element")
    return Document(ground, algebra, vals, hmap, codomain, fvals)


def load_measure(text: str) -> Fam:
    """Parse a measure file and validate it (raises with the witness on failure)."""
    doc = parse_document(text)
    if not doc.values:
        raise InvalidInput("measure file has no value lines")
    return validate_fam(doc.values, doc.algebra)


def dump_algebra(A: FiniteAlgebra) -> str:
    lines = ["ground: " + ",".join(str(x) for x in A.ground)]
    lines += [f"member: {e.bits()}" for e in A.members]
    return "\n".join(lines) + "\n"


def dump_measure(m: Fam) -> str:
    lines = ["ground: " + ",".join(str(x) for x in m.algebra.ground)]
    for e in m.algebra.members:
        lines.append(f"member: {e.bits()}")
    for e in m.algebra.members:
        lines.append(f"value: {e.bits()} = {fmt(m(e))}")
    return "\n".join(lines) + "\n"


def element_from_bits(A: FiniteAlgebra, bits: str) -> Element:
    return A.require(A.ground.from_bits(bits))
