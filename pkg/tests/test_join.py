import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
import suite
from restrictcat.builders import random_restriction_category
from restrictcat.core import identity_functor
from restrictcat.fibration import gamma, gamma_functor, is_discrete_fibration_map, poset_meet
from restrictcat.fundamental import is_hyperconnected
from restrictcat.join import (
    IncompatibleFamily,
    JoinStructure,
    compatible_families,
    etale_failure,
    fundamental_join,
    hom_pullback,
    is_cover,
    is_etale_map,
    is_join_functor,
    is_locally_etale,
    join_of,
    lift_join,
    lub_join_structure,
    verify_join,
)
from restrictcat.restriction import is_total, leq

seeds = st.integers(min_value=0, max_value=10_000)


def test_set_p_join_laws():
    rep = verify_join(suite.set_p(1, 2).join)
    assert rep.ok
    assert set(rep.results) == {"existence", "lub", "J1", "J2", "J3"}


def test_singleton_joins():
    js = suite.set_p(1, 2).join
    for f in js.host.morphisms:
        assert join_of(js, [f]) == f


def test_planted_non_lub_join_fails_lub_check():
    b = suite.set_p(2)
    js = b.join
    e0, e1 = suite.find(b, 0, 0, (0, -1)), suite.find(b, 0, 0, (-1, 1))
    ident = suite.find(b, 0, 0, (0, 1))
    # declare e0 ∨ e0 to be the identity: an upper bound, not the least one
    pairs = dict(js.pairs)
    pairs[(e0, e0)] = ident
    bad = JoinStructure(js.host, pairs, js.bottoms)
    rep = verify_join(bad)
    assert not rep.ok and rep.results["lub"] is not None
    assert join_of(js, [e0, e1]) == ident


def test_join_of_examples():
    b = suite.set_p(1, 2)
    js = b.join
    p = suite.find(b, 1, 1, (0, -1))
    q = suite.find(b, 1, 1, (-1, 1))
    union = oracles.pf_graph(b.data[p]) | oracles.pf_graph(b.data[q])
    assert oracles.pf_graph(b.data[join_of(js, [p, q])]) == union
    assert b.data[join_of(js, [], (1, 0))] == (-1, -1)
    assert join_of(js, [p, p]) == p


def test_join_of_incompatible_family_reports_witness():
    b = suite.set_p(1, 2)
    p0, p1 = suite.find(b, 0, 1, (0,)), suite.find(b, 0, 1, (1,))
    with pytest.raises(IncompatibleFamily) as err:
        join_of(b.join, [p0, p1])
    assert set(err.value.witness) == {p0, p1}


def test_join_functor_examples():
    js = suite.set_p(1, 2).join
    assert is_join_functor(identity_functor(js.host), js, js)
    F, js_t = fundamental_join(js)
    assert is_hyperconnected(F) and is_join_functor(F, js, js_t)
    inc = suite.functors()["join_breaking"]
    js_src = lub_join_structure(inc.source)
    assert js_src is not None and verify_join(js_src).ok
    assert not is_join_functor(inc, js_src, suite.set_p(3).join)


def test_cover_examples():
    b = suite.set_p(1, 2)
    js = b.join
    total = suite.find(b, 1, 0, (0, 0))
    assert is_cover(js, [total], total)
    pieces = [suite.find(b, 1, 0, (0, -1)), suite.find(b, 1, 0, (-1, 0))]
    assert is_cover(js, pieces, total)
    assert not is_cover(js, pieces[:1], total)


def test_etale_examples():
    b = suite.set_p(1, 2)
    js = b.join
    for a in b.rc.objects:
        assert is_etale_map(js, b.rc.identity[a])
    assert is_etale_map(js, suite.find(b, 1, 0, (0, 0)))
    why = etale_failure(js, suite.find(b, 1, 1, (0, -1)))
    assert why is not None and why[0] == "discrete_fibration"


def test_locally_etale_examples():
    js = suite.set_p(1, 2).join
    assert is_locally_etale(gamma_functor(identity_functor(js.host)), js)
    F, js_t = fundamental_join(js)
    assert is_locally_etale(gamma_functor(F), js_t)
    inc = suite.functors()["join_breaking"]
    assert not is_locally_etale(gamma_functor(inc), suite.set_p(3).join)


def test_lift_join_round_trips():
    js = suite.set_p(1, 2).join
    rc = js.host
    lifted, _ = lift_join(gamma(rc), gamma_functor(identity_functor(rc)), js)
    assert lifted.pairs == js.pairs and lifted.bottoms == js.bottoms
    F, js_t = fundamental_join(js)
    lifted, G = lift_join(gamma(rc), gamma_functor(F), js_t)
    assert lifted.pairs == js.pairs and lifted.bottoms == js.bottoms


def test_lift_join_over_stab_fragment_passes_join_laws():
    js = suite.set_p(2).join
    F, js_t = fundamental_join(js)
    lifted, G = lift_join(gamma(js.host), gamma_functor(F), js_t)
    assert verify_join(lifted).ok and is_join_functor(G, lifted, js_t)


@pytest.mark.parametrize("name", sorted(suite.join_hosts()))
def test_etale_chain_of_implications(name):
    js = suite.join_hosts()[name]
    rc = js.host
    k2 = gamma(rc)
    for f in rc.morphisms:
        et, df, tot = is_etale_map(js, f), is_discrete_fibration_map(k2, f), is_total(rc, f)
        assert (not et or df) and (not df or tot)
        assert tot == et


def test_hom_pullback_is_poset_meet():
    rc = suite.set_p(1, 2).rc
    k2 = gamma(rc)
    for h in rc.morphisms:
        below = [f for f in rc.hom(rc.dom[h], rc.cod[h]) if leq(rc, f, h)]
        P = k2.hom_poset(rc.dom[h], rc.cod[h])
        for f in below:
            for g in below:
                assert hom_pullback(rc, f, g) == poset_meet(P, f, g)


def test_covers_are_stable_under_pullback():
    js = suite.set_p(1, 2).join
    rc = js.host
    for f in rc.morphisms:
        hom = rc.hom(rc.dom[f], rc.cod[f])
        below = [g for g in hom if leq(rc, g, f)]
        for fam in compatible_families(rc, below):
            if not is_cover(js, fam, f):
                continue
            for g in below:
                pulled = [hom_pullback(rc, s, g) for s in fam]
                assert is_cover(js, pulled, g)


@given(seeds)
def test_j1_and_j2_imply_j3(seed):
    js = lub_join_structure(random_restriction_category(seed).rc)
    if js is None:
        return
    rep = verify_join(js)
    if rep.results["J1"] is None and rep.results["J2"] is None:
        assert rep.results["J3"] is None


@given(seeds)
def test_join_functor_iff_locally_etale_for_hyperconnected_inclusions(seed):
    built = random_restriction_category(seed)
    F = built.inclusion
    js_src = lub_join_structure(built.rc)
    if js_src is None or not is_hyperconnected(F) or F.target.n_morphisms > 20:
        return
    js_tgt = lub_join_structure(F.target)
    assert is_join_functor(F, js_src, js_tgt) == is_locally_etale(gamma_functor(F), js_tgt)
