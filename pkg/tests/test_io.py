import pytest
from hypothesis import given
from hypothesis import strategies as st

import suite
from restrictcat.builders import build_stab_op, build_trivial, point_category, random_restriction_category
from restrictcat.core import CategoryError, functors_equal, identity_functor
from restrictcat.fundamental import comparison_phi, factorize
from restrictcat.io import (
    FORMAT_VERSION,
    HEADER,
    Document,
    FunctorSquare,
    ParseError,
    Report,
    from_document,
    load,
    parse,
    read_file,
    serialize,
    to_document,
    write_file,
)
from restrictcat.ranges import comparison_squares, derive_range
from restrictcat.semilattice import identity_map, powerset

POINT = """\
# restrictcat document
bar: [0]
cod: [0]
compose: [[0,0,0]]
dom: [0]
format_version: 1
identity: [0]
kind: "restriction"
morphisms: ["1"]
objects: ["*"]
"""


def _point():
    return build_trivial(point_category()).rc


def test_point_document_is_exact():
    assert serialize(_point()) == POINT
    assert POINT.count("\n") == 10


def test_point_document_loads_back():
    assert load(POINT) == _point()


@pytest.mark.parametrize("name", sorted(suite.instances()))
def test_restriction_round_trip(name):
    rc = suite.instances()[name]
    text = serialize(rc)
    back = load(text)
    assert back == rc and serialize(back) == text


@pytest.mark.parametrize("name", sorted(suite.functors()))
def test_functor_round_trip(name):
    F = suite.functors()[name]
    text = serialize(F)
    back = load(text)
    assert functors_equal(back, F) and back.source == F.source and back.target == F.target
    assert serialize(back) == text


def test_structure_round_trips():
    js = suite.set_p(1, 2).join
    rs = derive_range(suite.set_p(1, 2).rc)
    for x in (js, rs):
        assert load(serialize(x)) == x
    stab = build_stab_op([powerset(2)]).rc
    back = load(serialize(stab))
    assert back.bar == stab.bar and [h.mapping for h in back.maps] == [h.mapping for h in stab.maps]


def test_join_over_stab_host_round_trips():
    js = build_stab_op([powerset(2)], join=True).join
    text = serialize(js)
    back = load(text)
    assert serialize(back) == text and back.pairs == js.pairs and back.host.bar == js.host.bar


def test_square_and_transformation_round_trips():
    fac = factorize(suite.functors()["total_incl[1,2]"])
    sq = FunctorSquare(fac.H, fac.H, fac.K, fac.K)
    back = load(serialize(sq))
    for k in ("top", "left", "right", "bottom"):
        assert functors_equal(getattr(back, k), getattr(sq, k))
    _, ssq = next(comparison_squares(suite.functors()["id[set_p[1,2]]"]))
    assert load(serialize(ssq)) == ssq
    phi = comparison_phi(suite.functors()["injections[2]"])
    assert load(serialize(phi)).components == phi.components
    i = identity_map(powerset(2))
    assert load(serialize(i)) == i


def test_report_round_trip():
    r = Report("check", "pass", {"R1": None}, {"n": 3})
    assert load(serialize(r)) == r


def test_file_round_trip(tmp_path):
    path = tmp_path / "p.doc"
    write_file(str(path), _point())
    assert path.read_text() == POINT
    assert read_file(str(path)) == _point()


def test_transformation_alias_is_accepted():
    phi = comparison_phi(identity_functor(_point()))
    text = serialize(phi)
    assert load(text.replace('"transformation"', '"nat_transf"')).components == phi.components


def _error(text):
    with pytest.raises(ParseError) as err:
        parse(text)
    return err.value


def test_missing_trailing_newline():
    e = _error(POINT[:-1])
    assert e.line == 10


def test_truncated_document_reports_missing_field():
    text = "".join(POINT.splitlines(keepends=True)[:5])
    e = _error(text)
    assert e.line == 6 and "field" in e.expected


def test_wrong_header():
    e = _error(POINT.replace(HEADER, "# something else"))
    assert (e.line, e.col) == (1, 1)


def test_malformed_json_reports_column():
    e = _error(POINT.replace("cod: [0]", "cod: [0,"))
    assert e.line == 3 and e.col > len("cod: ")


def test_bad_separator():
    e = _error(POINT.replace("dom: [0]", "dom:[0]"))
    assert (e.line, e.col) == (5, 4)


def test_unsorted_keys_rejected():
    lines = POINT.splitlines(keepends=True)
    lines[2], lines[3] = lines[3], lines[2]
    assert _error("".join(lines)).line == 4


def test_trailing_garbage_rejected():
    e = _error(POINT.replace("bar: [0]", "bar: [0] x"))
    assert (e.line, e.col) == (2, 9)


def test_unknown_version_rejected():
    e = _error(POINT.replace("format_version: 1", "format_version: 2"))
    assert e.line == 6 and str(FORMAT_VERSION) in e.expected


def test_unknown_kind_rejected():
    assert _error(POINT.replace('"restriction"', '"sheaf"')).line == 8


def test_extra_field_rejected():
    e = _error(POINT.replace("identity:", "hat: [0]\nidentity:"))
    assert e.line == 7 and e.col == 1


def test_floats_rejected():
    e = _error(POINT.replace("bar: [0]", "bar: [0.0]"))
    assert e.line == 2
    with pytest.raises(CategoryError):
        Document("report", {"x": 1.5})


def test_bad_values_are_category_errors():
    with pytest.raises(CategoryError):
        load(POINT.replace("bar: [0]", 'bar: ["a"]'))
    with pytest.raises(CategoryError):
        load(POINT.replace("compose: [[0,0,0]]", "compose: []"))


def test_document_kind_recorded():
    assert to_document(suite.functors()["non_open"]).kind == "functor"
    assert from_document(parse(POINT)) == _point()


@given(st.integers(min_value=0, max_value=10_000))
def test_random_fragments_round_trip(seed):
    built = random_restriction_category(seed)
    text = serialize(built.inclusion)
    back = load(text)
    assert back.source == built.rc and serialize(back) == text
