import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
import suite
from restrictcat.builders import build_trivial, group_category, monoid_category, random_restriction_category
from restrictcat.core import CategoryError
from restrictcat.restriction import (
    RestrictionCat,
    compatible,
    is_inverse_category,
    is_total,
    leq,
    partial_inverse,
    restriction_idempotents,
    verify_restriction,
)
from restrictcat.semilattice import chain, powerset
from restrictcat.builders import build_stab_op

seeds = st.integers(min_value=0, max_value=10_000)


def test_set_p_passes_all_axioms():
    rep = verify_restriction(suite.set_p(1, 2).rc)
    assert rep.ok and rep.failed() == []


@pytest.mark.parametrize("name", ["trivial[Z3]", "trivial[finset1,2]"])
def test_identity_bar_passes(name):
    assert verify_restriction(suite.instances()[name]).ok


def test_bar_of_unit_as_idempotent_fails_r1():
    c = monoid_category([[0, 1], [1, 1]])
    rc = RestrictionCat.of(c, (1, 1))
    rep = verify_restriction(rc)
    assert rep.results["R1"] == (0,)


def test_bar_not_endomorphism_is_structural():
    rc = suite.set_p(1, 2).rc
    bad = RestrictionCat.of(rc.base, tuple(rc.morphisms))
    rep = verify_restriction(bad)
    assert rep.structural == "bar_not_endomorphism" and not rep.ok


def test_leq_examples():
    b = suite.set_p(2)
    rc = b.rc
    empty = suite.find(b, 0, 0, (-1, -1))
    for f in rc.morphisms:
        assert leq(rc, f, f)
        assert leq(rc, empty, f)
    swap, ident = suite.find(b, 0, 0, (1, 0)), suite.find(b, 0, 0, (0, 1))
    assert not leq(rc, swap, ident) and not leq(rc, ident, swap)


def test_leq_matches_graph_inclusion():
    b = suite.set_p(1, 2)
    rc = b.rc
    for f in rc.morphisms:
        for g in rc.hom(rc.dom[f], rc.cod[f]):
            assert leq(rc, f, g) == (oracles.pf_graph(b.data[f]) <= oracles.pf_graph(b.data[g]))


def test_leq_rejects_non_parallel():
    rc = suite.set_p(1, 2).rc
    with pytest.raises(CategoryError):
        leq(rc, rc.identity[0], rc.identity[1])


def test_is_total_matches_domain():
    b = suite.set_p(1, 2)
    for f in b.rc.morphisms:
        assert is_total(b.rc, f) == (len(oracles.pf_domain(b.data[f])) == len(b.data[f]))
    assert not is_total(b.rc, suite.find(b, 1, 1, (0, -1)))


def test_idempotent_counts():
    assert len(restriction_idempotents(suite.set_p(2).rc, 0)) == 4
    rc = build_trivial(group_category(3)).rc
    assert restriction_idempotents(rc, 0) == {rc.identity[0]}
    for L in (chain(3), powerset(2)):
        assert len(restriction_idempotents(build_stab_op([L]).rc, 0)) == L.size


def test_compatible_examples():
    b = suite.set_p(1, 2)
    rc = b.rc
    for f in rc.morphisms:
        assert compatible(rc, f, f)
    # maps agreeing on the common domain
    assert compatible(rc, suite.find(b, 1, 1, (0, -1)), suite.find(b, 1, 1, (0, 0)))
    p0, p1 = suite.find(b, 0, 1, (0,)), suite.find(b, 0, 1, (1,))
    assert not compatible(rc, p0, p1)


def test_compatible_matches_graph_union_oracle():
    b = suite.set_p(2)
    for f in b.rc.morphisms:
        for g in b.rc.morphisms:
            union = oracles.pf_graph(b.data[f]) | oracles.pf_graph(b.data[g])
            functional = len({i for i, _ in union}) == len(union)
            assert compatible(b.rc, f, g) == functional


def test_inverse_symmetric_is_inverse_category():
    b = suite.inverse(2)
    rc = b.rc
    assert is_inverse_category(rc)
    for x in rc.morphisms:
        y = partial_inverse(rc, x)
        assert rc.bar[x] == rc.comp(y, x)
        assert rc.bar[y] == rc.comp(x, y)


def test_identity_is_its_own_partial_inverse():
    rc = suite.inverse(2).rc
    assert partial_inverse(rc, rc.identity[0]) == rc.identity[0]


def test_set_p_is_not_inverse():
    b = suite.set_p(2)
    assert not is_inverse_category(b.rc)
    assert partial_inverse(b.rc, suite.find(b, 0, 0, (0, 0))) is None


@pytest.mark.parametrize("name", sorted(k for k, v in suite.instances().items() if v.n_morphisms <= 70))
def test_order_laws(name):
    rc = suite.instances()[name]
    for f in rc.morphisms:
        assert rc.bar[rc.bar[f]] == rc.bar[f]
        assert rc.comp(rc.bar[f], rc.bar[f]) == rc.bar[f]
        par = rc.hom(rc.dom[f], rc.cod[f])
        for g in par:
            if leq(rc, f, g) and leq(rc, g, f):
                assert f == g
            for h in par:
                if leq(rc, f, g) and leq(rc, g, h):
                    assert leq(rc, f, h)
            if leq(rc, f, g):
                for k in rc.out_of(rc.cod[f]):
                    assert leq(rc, rc.comp(k, f), rc.comp(k, g))
                for k in rc.into(rc.dom[f]):
                    assert leq(rc, rc.comp(f, k), rc.comp(g, k))


@given(seeds)
def test_random_fragment_invariants(seed):
    rc = random_restriction_category(seed).rc
    assert verify_restriction(rc).ok
    for a in rc.objects:
        idem = restriction_idempotents(rc, a)
        assert rc.identity[a] in idem
        for e in idem:
            for e2 in idem:
                assert rc.comp(e, e2) == rc.comp(e2, e) and rc.comp(e, e2) in idem
    totals = [f for f in rc.morphisms if is_total(rc, f)]
    for f in totals:
        for g in totals:
            if rc.cod[f] == rc.dom[g]:
                assert is_total(rc, rc.comp(g, f))


@given(st.integers(min_value=0, max_value=3))
def test_partial_inverse_is_involution(n):
    rc = suite.inverse(n).rc
    for x in rc.morphisms:
        assert partial_inverse(rc, partial_inverse(rc, x)) == x
