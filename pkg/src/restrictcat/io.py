"""Canonical line-oriented documents.

A document is a header comment followed by one ``key: value`` line per field,
keys in ascending order, every value a compact JSON literal (integers,
strings, booleans, null, lists and objects only). Each line is therefore also
a valid YAML mapping entry. Nested objects (functor sources, square edges)
are inline JSON objects carrying their own ``kind``.

    # restrictcat document
    bar: [0]
    cod: [0]
    compose: [[0,0,0]]
    ...
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any

from .core import CategoryError, FinCat, FinFunctor, validate_category
from .fundamental import TotalNatTransf
from .join import JoinStructure
from .ranges import RangeStructure
from .restriction import RestrictionCat, bar_structure_problem
from .semilattice import MeetSemilattice, StabOpCat, StableMap, StabSquare, validate_semilattice

FORMAT_VERSION = 1
HEADER = "# restrictcat document"

_CAT_KEYS = ("cod", "compose", "dom", "identity", "morphisms", "objects")
_RC_KEYS = _CAT_KEYS + ("bar",)
SCHEMA: dict[str, tuple[str, ...]] = {
    "category": _CAT_KEYS,
    "restriction": _RC_KEYS,
    "stab_op": _RC_KEYS + ("lattices", "maps"),
    "join": _RC_KEYS + ("bottoms", "joins"),
    "range": _RC_KEYS + ("hat",),
    "functor": ("mor_map", "obj_map", "source", "target"),
    "transformation": ("components", "source", "target"),
    "semilattice": ("elements", "meet", "order", "top"),
    "stable_map": ("mapping", "source", "target"),
    "square": ("bottom", "left", "right", "top"),
    "stab_square": ("bottom", "left", "right", "top"),
    "report": ("checks", "command", "details", "verdict"),
}
_ALIASES = {"nat_transf": "transformation"}

_KEY_RE = re.compile(r"[a-z_]+")


class ParseError(CategoryError):
    def __init__(self, line: int, col: int, expected: str, found: str = "") -> None:
        self.line, self.col, self.expected = line, col, expected
        msg = f"line {line}, column {col}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg)


@dataclass
class Document:
    kind: str
    payload: dict[str, Any]
    format_version: int = FORMAT_VERSION

    def __post_init__(self) -> None:
        self.payload = _plain(self.payload)


@dataclass(frozen=True)
class FunctorSquare:
    """``right∘top == bottom∘left``: top ``A -> E``, left ``A -> D``,
    right ``E -> F``, bottom ``D -> F``."""

    top: FinFunctor
    left: FinFunctor
    right: FinFunctor
    bottom: FinFunctor


@dataclass(frozen=True)
class Report:
    command: str
    verdict: str
    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)


def _plain(v: Any) -> Any:
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, float):
        raise CategoryError("floating point values are not allowed in documents")
    return v


def _dump(v: Any) -> str:
    return json.dumps(v, separators=(",", ":"), sort_keys=True, ensure_ascii=False)


# object -> payload

def _labels(c: FinCat) -> tuple[list[str], list[str]]:
    return [c.obj_name(a) for a in c.objects], [c.mor_name(m) for m in c.morphisms]


def _cat_payload(c: FinCat) -> dict:
    objs, mors = _labels(c)
    return {
        "objects": objs,
        "morphisms": mors,
        "dom": list(c.dom),
        "cod": list(c.cod),
        "identity": list(c.identity),
        "compose": [[g, f, h] for (g, f), h in sorted(c.table.items())],
    }


def _semilattice_payload(L: MeetSemilattice) -> dict:
    return {
        "elements": [L.name(a) for a in L.elements],
        "order": [[a, b] for a in L.elements for b in L.elements if L.le[a][b]],
        "meet": [list(r) for r in L.meet],
        "top": L.top,
    }


def _restriction_payload(rc: RestrictionCat) -> dict:
    # join and range documents carry only the plain restriction host
    p = _cat_payload(rc)
    p["bar"] = list(rc.bar)
    return p


def _kind_and_payload(x: Any) -> tuple[str, dict]:
    if isinstance(x, Document):
        return x.kind, x.payload
    if isinstance(x, StabOpCat):
        p = _cat_payload(x)
        p["bar"] = list(x.bar)
        p["lattices"] = [_nested("semilattice", _semilattice_payload(L)) for L in x.lattices]
        p["maps"] = [list(h.mapping) for h in x.maps]
        return "stab_op", p
    if isinstance(x, RestrictionCat):
        p = _cat_payload(x)
        p["bar"] = list(x.bar)
        return "restriction", p
    if isinstance(x, FinCat):
        return "category", _cat_payload(x)
    if isinstance(x, JoinStructure):
        p = _restriction_payload(x.host)
        p["joins"] = [[f, g, h] for (f, g), h in sorted(x.pairs.items())]
        p["bottoms"] = [[a, b, m] for (a, b), m in sorted(x.bottoms.items())]
        return "join", p
    if isinstance(x, RangeStructure):
        p = _restriction_payload(x.host)
        p["hat"] = list(x.hat)
        return "range", p
    if isinstance(x, FinFunctor):
        return "functor", {
            "source": _nested(*_kind_and_payload(x.source)),
            "target": _nested(*_kind_and_payload(x.target)),
            "obj_map": list(x.obj_map),
            "mor_map": list(x.mor_map),
        }
    if isinstance(x, TotalNatTransf):
        return "transformation", {
            "source": _nested(*_kind_and_payload(x.source)),
            "target": _nested(*_kind_and_payload(x.target)),
            "components": list(x.components),
        }
    if isinstance(x, MeetSemilattice):
        return "semilattice", _semilattice_payload(x)
    if isinstance(x, StableMap):
        return "stable_map", {
            "source": _nested("semilattice", _semilattice_payload(x.source)),
            "target": _nested("semilattice", _semilattice_payload(x.target)),
            "mapping": list(x.mapping),
        }
    if isinstance(x, (StabSquare, FunctorSquare)):
        kind = "stab_square" if isinstance(x, StabSquare) else "square"
        return kind, {k: _nested(*_kind_and_payload(getattr(x, k))) for k in ("top", "left", "right", "bottom")}
    if isinstance(x, Report):
        return "report", {"command": x.command, "verdict": x.verdict, "checks": x.checks, "details": x.details}
    raise CategoryError(f"cannot serialize {type(x).__name__}")


def _nested(kind: str, payload: dict) -> dict:
    d = dict(payload)
    d["kind"] = kind
    return d


def to_document(x: Any) -> Document:
    kind, payload = _kind_and_payload(x)
    return Document(kind, dict(payload))


def serialize(x: Any) -> str:
    doc = x if isinstance(x, Document) else to_document(x)
    fields = dict(doc.payload)
    fields["kind"] = doc.kind
    fields["format_version"] = doc.format_version
    lines = [HEADER] + [f"{k}: {_dump(fields[k])}" for k in sorted(fields)]
    return "\n".join(lines) + "\n"


# text -> document

def _no_float(s: str):
    raise ValueError("float")


def parse(text: str) -> Document:
    """Parse canonical text. Anything off-canonical (unsorted or duplicate
    keys, extra spaces, floats, missing fields) is rejected with the
    1-based line and column of the first offending character."""
    lines = text.split("\n")
    if not text.endswith("\n"):
        last = len(lines)
        raise ParseError(last, len(lines[-1]) + 1, "newline at end of document")
    lines = lines[:-1]
    if not lines or lines[0] != HEADER:
        found = lines[0] if lines else ""
        raise ParseError(1, 1, repr(HEADER), found)
    decoder = json.JSONDecoder(parse_float=_no_float, parse_constant=_no_float)
    fields: dict[str, Any] = {}
    prev = ""
    for i, line in enumerate(lines[1:], start=2):
        m = _KEY_RE.match(line)
        if not m:
            raise ParseError(i, 1, "field name", line[:1])
        key = m.group(0)
        if key <= prev:
            raise ParseError(i, 1, f"field name after {prev!r} in ascending order", key)
        pos = m.end()
        if line[pos:pos + 2] != ": ":
            raise ParseError(i, pos + 1, "': '", line[pos:pos + 2])
        pos += 2
        try:
            value, end = decoder.raw_decode(line, pos)
        except json.JSONDecodeError as e:
            raise ParseError(i, e.colno, "JSON value", line[e.pos:e.pos + 1]) from None
        except ValueError:
            raise ParseError(i, pos + 1, "integer (floats are not allowed)") from None
        if end != len(line):
            raise ParseError(i, end + 1, "end of line", line[end:end + 1])
        fields[key] = value
        prev = key
    end_line = len(lines) + 1
    for k in ("format_version", "kind"):
        if k not in fields:
            raise ParseError(end_line, 1, f"field {k!r}")
    if fields["format_version"] != FORMAT_VERSION:
        row = 2 + sorted(fields).index("format_version")
        raise ParseError(row, len("format_version: ") + 1, f"format_version {FORMAT_VERSION}",
                         str(fields["format_version"]))
    kind = _ALIASES.get(fields["kind"], fields["kind"])
    if kind not in SCHEMA:
        row = 2 + sorted(fields).index("kind")
        raise ParseError(row, len("kind: ") + 1, "one of " + ", ".join(sorted(SCHEMA)), str(fields["kind"]))
    want = set(SCHEMA[kind]) | {"format_version", "kind"}
    for k in sorted(want - set(fields)):
        raise ParseError(end_line, 1, f"field {k!r}")
    for k in sorted(set(fields) - want):
        row = 2 + sorted(fields).index(k)
        raise ParseError(row, 1, f"a field of kind {kind!r}", k)
    payload = {k: v for k, v in fields.items() if k not in ("format_version", "kind")}
    return Document(kind, payload, fields["format_version"])


# document -> object

def _ints(v: Any, what: str) -> tuple[int, ...]:
    if not isinstance(v, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise CategoryError(f"{what} must be a list of integers")
    return tuple(v)


def _labels_or_default(names: Any, default: str, what: str) -> tuple[str, ...]:
    if not isinstance(names, list) or not all(isinstance(x, str) for x in names):
        raise CategoryError(f"{what} must be a list of strings")
    if names == [f"{default}{i}" for i in range(len(names))]:
        return ()
    return tuple(names)


def _category(p: dict) -> FinCat:
    dom, cod, ident = _ints(p["dom"], "dom"), _ints(p["cod"], "cod"), _ints(p["identity"], "identity")
    objs = _labels_or_default(p["objects"], "o", "objects")
    mors = _labels_or_default(p["morphisms"], "m", "morphisms")
    if len(p["objects"]) != len(ident):
        raise CategoryError("objects and identity differ in length")
    if len(p["morphisms"]) != len(dom):
        raise CategoryError("morphisms and dom differ in length")
    table = {}
    for entry in p["compose"]:
        g, f, h = _ints(entry, "compose entry") if len(entry) == 3 else (None, None, None)
        if g is None:
            raise CategoryError("compose entries are [g, f, g∘f]")
        if (g, f) in table:
            raise CategoryError(f"duplicate composite for ({g}, {f})")
        table[(g, f)] = h
    c = FinCat(dom, cod, ident, table, objs, mors)
    rep = validate_category(c)
    if rep.structural:
        raise CategoryError(f"malformed category: {rep.failures[0][0]} {list(rep.failures[0][1])}")
    return c


def _restriction(p: dict) -> RestrictionCat:
    c = _category(p)
    rc = RestrictionCat.of(c, _ints(p["bar"], "bar"))
    problem = bar_structure_problem(rc)
    if problem is not None:
        raise CategoryError(f"malformed restriction: {problem}")
    return rc


def _semilattice(p: dict) -> MeetSemilattice:
    names = p["elements"]
    n = len(names)
    le = [[False] * n for _ in range(n)]
    for pair in p["order"]:
        a, b = _ints(pair, "order entry")
        if not (0 <= a < n and 0 <= b < n):
            raise CategoryError("order entry out of range")
        le[a][b] = True
    meet = tuple(_ints(r, "meet row") for r in p["meet"])
    labels = _labels_or_default(names, "", "elements")
    L = MeetSemilattice(tuple(tuple(r) for r in le), meet, p["top"], labels)
    if not validate_semilattice(L):
        raise CategoryError("malformed semilattice")
    return L


def _stab_op(p: dict) -> StabOpCat:
    rc = _restriction(p)
    lattices = tuple(from_payload(_expect(q, "semilattice")) for q in p["lattices"])
    if len(lattices) != rc.n_objects or len(p["maps"]) != rc.n_morphisms:
        raise CategoryError("stab_op lattices/maps do not match the category")
    maps = tuple(StableMap(lattices[rc.cod[m]], lattices[rc.dom[m]], _ints(mp, "map"))
                 for m, mp in enumerate(p["maps"]))
    return StabOpCat(rc.dom, rc.cod, rc.identity, rc.table, rc.obj_labels, rc.mor_labels,
                     bar=rc.bar, lattices=lattices, maps=maps)


def _expect(q: Any, *kinds: str) -> tuple[str, dict]:
    if not isinstance(q, dict) or "kind" not in q:
        raise CategoryError("nested value must be an object with a kind")
    kind = _ALIASES.get(q["kind"], q["kind"])
    if kinds and kind not in kinds:
        raise CategoryError(f"expected a nested {' or '.join(kinds)}, got {kind}")
    p = {k: v for k, v in q.items() if k != "kind"}
    missing = set(SCHEMA.get(kind, ())) - set(p)
    if kind not in SCHEMA or missing:
        raise CategoryError(f"nested {kind} is missing {sorted(missing)}")
    return kind, p


def _functor(p: dict) -> FinFunctor:
    src = from_payload(_expect(p["source"]))
    tgt = from_payload(_expect(p["target"]))
    src, tgt = _host(src), _host(tgt)
    return FinFunctor(src, tgt, _ints(p["obj_map"], "obj_map"), _ints(p["mor_map"], "mor_map"))


def _host(x: Any) -> FinCat:
    if isinstance(x, (JoinStructure, RangeStructure)):
        return x.host
    if not isinstance(x, FinCat):
        raise CategoryError("functor endpoints must be categories")
    return x


def from_payload(kp: tuple[str, dict]) -> Any:
    kind, p = kp
    if kind == "category":
        return _category(p)
    if kind == "restriction":
        return _restriction(p)
    if kind == "stab_op":
        return _stab_op(p)
    if kind == "join":
        rc = _restriction(p)
        pairs = {(f, g): h for f, g, h in (_ints(e, "join entry") for e in p["joins"])}
        bottoms = {(a, b): m for a, b, m in (_ints(e, "bottom entry") for e in p["bottoms"])}
        return JoinStructure(rc, pairs, bottoms)
    if kind == "range":
        return RangeStructure(_restriction(p), _ints(p["hat"], "hat"))
    if kind == "functor":
        return _functor(p)
    if kind == "transformation":
        s = from_payload(_expect(p["source"], "functor"))
        t = from_payload(_expect(p["target"], "functor"))
        return TotalNatTransf(s, t, _ints(p["components"], "components"))
    if kind == "semilattice":
        return _semilattice(p)
    if kind == "stable_map":
        s = from_payload(_expect(p["source"], "semilattice"))
        t = from_payload(_expect(p["target"], "semilattice"))
        return StableMap(s, t, _ints(p["mapping"], "mapping"))
    if kind in ("square", "stab_square"):
        inner = "functor" if kind == "square" else "stable_map"
        edges = {k: from_payload(_expect(p[k], inner)) for k in ("top", "left", "right", "bottom")}
        return FunctorSquare(**edges) if kind == "square" else StabSquare(**edges)
    if kind == "report":
        return Report(p["command"], p["verdict"], p["checks"], p["details"])
    raise CategoryError(f"unknown kind {kind}")


def from_document(doc: Document) -> Any:
    try:
        return from_payload((doc.kind, doc.payload))
    except (KeyError, TypeError, ValueError, IndexError) as e:
        if isinstance(e, CategoryError):
            raise
        raise CategoryError(f"malformed {doc.kind} document: {e!r}") from None


def load(text: str) -> Any:
    return from_document(parse(text))


def read_file(path: str) -> Any:
    with open(path, encoding="utf-8") as fh:
        return load(fh.read())


def write_file(path: str, x: Any) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(x))
