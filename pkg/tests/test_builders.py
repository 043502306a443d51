import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
import suite
from restrictcat.builders import (
    Bounds,
    build_finset,
    build_inverse_symmetric,
    build_par,
    build_set_p,
    build_stab_op,
    build_trivial,
    group_category,
    injective_morphisms,
    monoid_category,
    random_restriction_category,
)
from restrictcat.core import CategoryError, find_isomorphism, validate_category
from restrictcat.fundamental import fundamental_functor
from restrictcat.restriction import is_total, verify_restriction
from restrictcat.semilattice import all_lattices, chain, m3, powerset


def _lattices_isomorphic(L, M):
    if L.size != M.size:
        return False
    for p in itertools.permutations(range(M.size)):
        if all(L.le[a][b] == M.le[p[a]][p[b]] for a in L.elements for b in L.elements):
            return True
    return False


def test_set_p_hom_counts_match_oracle():
    rc = suite.set_p(1, 2).rc
    sizes = (1, 2)
    for a in rc.objects:
        for b in rc.objects:
            assert len(rc.hom(a, b)) == oracles.count_partial_functions(sizes[a], sizes[b])
    assert len(rc.hom(1, 0)) == 4


def test_set_p_composition_matches_oracle():
    b = suite.set_p(1, 2)
    rc = b.rc
    for f in rc.morphisms:
        for g in rc.out_of(rc.cod[f]):
            assert b.data[rc.comp(g, f)] == oracles.pf_compose(b.data[g], b.data[f])


def test_empty_set_has_one_endomorphism():
    rc = build_set_p([0]).rc
    assert rc.n_morphisms == 1 and verify_restriction(rc).ok


@pytest.mark.parametrize("n,count", [(0, 1), (1, 2), (2, 7), (3, 34)])
def test_inverse_symmetric_counts(n, count):
    assert build_inverse_symmetric(n).rc.n_morphisms == count == oracles.count_partial_injections(n)


def test_par_of_finite_sets_is_set_p():
    par = suite.par_sets(0, 1, 2).rc
    setp = suite.set_p(0, 1, 2).rc
    assert find_isomorphism(par, setp, restriction=True) is not None


def test_par_with_identities_only_is_trivial():
    fs, _ = build_finset([1, 2])
    built = build_par(fs, fs.identity)
    assert all(is_total(built.rc, f) for f in built.rc.morphisms)
    assert find_isomorphism(built.rc, build_trivial(fs).rc, restriction=True) is not None


def test_par_rejects_class_without_pullbacks():
    fs, _ = build_finset([1, 2])
    with pytest.raises(CategoryError):
        build_par(fs, injective_morphisms(fs))


def test_par_rejects_non_monic_class():
    fs, _ = build_finset([0, 1, 2])
    with pytest.raises(CategoryError):
        build_par(fs, fs.morphisms)


@pytest.mark.parametrize("L,count", [(chain(1), 1), (chain(2), 3)], ids=["chain1", "chain2"])
def test_stab_op_counts(L, count):
    assert build_stab_op([L]).rc.n_morphisms == count


@pytest.mark.parametrize("L", [L for n in range(1, 6) for L in all_lattices(n)])
def test_idempotents_of_stab_op_recover_the_lattice(L):
    fund = fundamental_functor(build_stab_op([L]).rc)
    assert _lattices_isomorphic(fund.lattice_of[0], L)


def test_stab_op_join_variant():
    built = build_stab_op([powerset(2)], join=True)
    assert built.join is not None
    with pytest.raises(CategoryError):
        build_stab_op([m3()], join=True)


def test_trivial_structure_has_identity_bar():
    for c in (group_category(3), monoid_category([[0, 1], [1, 1]])):
        rc = build_trivial(c).rc
        assert all(rc.bar[f] == rc.identity[rc.dom[f]] for f in rc.morphisms)
        assert validate_category(rc).ok


def test_builder_bounds():
    with pytest.raises(CategoryError):
        build_set_p([])
    with pytest.raises(CategoryError):
        build_set_p([5])
    with pytest.raises(CategoryError):
        build_inverse_symmetric(5)
    with pytest.raises(CategoryError):
        build_stab_op([chain(2)] * 4)
    with pytest.raises(CategoryError):
        build_stab_op([chain(7)])


def test_builders_attach_structure():
    b = suite.set_p(1, 2)
    assert b.join is not None and b.range is not None
    assert suite.inverse(2).range is not None


@given(st.integers(min_value=0, max_value=10_000))
def test_random_fragments_are_deterministic(seed):
    a, b = random_restriction_category(seed), random_restriction_category(seed)
    assert a.rc == b.rc and a.inclusion.mor_map == b.inclusion.mor_map


@given(st.integers(min_value=0, max_value=10_000), st.sampled_from(["set_p", "par"]))
def test_random_fragments_are_valid_and_bounded(seed, ambient):
    bounds = Bounds(ambient=ambient)
    built = random_restriction_category(seed, bounds)
    assert verify_restriction(built.rc).ok
    assert built.rc.n_morphisms <= bounds.max_morphisms
    inc = built.inclusion
    for f in built.rc.morphisms:
        assert inc.mor_map[built.rc.bar[f]] == inc.target.bar[inc.mor_map[f]]
