import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

import suite
from restrictcat.builders import build_stab_op
from restrictcat.core import CategoryError
from restrictcat.ranges import comparison_squares
from restrictcat.restriction import verify_restriction
from restrictcat.semilattice import (
    MeetSemilattice,
    StableMap,
    StabSquare,
    all_lattices,
    all_local_left_adjoints,
    beck_chevalley,
    beck_chevalley_failure,
    chain,
    compose_maps,
    compose_squares_horizontal,
    identity_map,
    is_frame,
    is_open,
    local_left_adjoint,
    m3,
    meet_with,
    n5,
    powerset,
    preserves_joins,
    stab_op_bar,
    stable_maps,
    validate_semilattice,
    validate_stable,
)

SMALL = [L for n in range(1, 6) for L in all_lattices(n)]
lattices = st.sampled_from(SMALL)


def test_one_element_lattice_valid():
    assert validate_semilattice(chain(1)).ok


def test_powerset_meets_are_intersections():
    P = powerset(2)
    assert validate_semilattice(P).ok
    for a in P.elements:
        for b in P.elements:
            assert P.meet[a][b] == a & b
            assert P.le[a][b] == (a & b == a)


def test_planted_meet_defect_detected():
    C = chain(3)
    meet = [list(r) for r in C.meet]
    meet[1][2] = meet[2][1] = 2  # meet of 1 and 2 pointed at a non-lower-bound
    bad = MeetSemilattice(C.le, tuple(tuple(r) for r in meet), C.top)
    assert not validate_semilattice(bad).ok


def test_lattice_counts_up_to_isomorphism():
    assert [len(all_lattices(n)) for n in range(1, 7)] == [1, 1, 1, 2, 5, 15]


def test_validate_stable_examples():
    P = powerset(2)
    assert validate_stable(identity_map(P)).ok
    for c in P.elements:
        assert validate_stable(meet_with(P, c)).ok
    bad = StableMap(P, P, (0, 1, 2, 0))  # top collapses below the atoms
    rep = validate_stable(bad)
    assert not rep.ok and len(rep.failures[0][1]) == 2


def test_stab_op_bar_examples():
    P = powerset(2)
    assert stab_op_bar(identity_map(P)).mapping == identity_map(P).mapping
    h = StableMap(P, P, (0, 1, 0, 1))  # top image is the atom 1
    assert stab_op_bar(h).mapping == meet_with(P, 1).mapping


def test_stab_op_bar_composite_law_on_chain():
    rc = build_stab_op([chain(3)]).rc
    assert verify_restriction(rc).ok
    for f in rc.morphisms:
        assert rc.maps[rc.bar[f]].mapping == stab_op_bar(rc.maps[f]).mapping
        for g in rc.morphisms:
            # bar(g∘bar f) = bar g ∘ bar f, evaluated elementwise
            lhs = stab_op_bar(compose_maps(rc.maps[rc.bar[f]], rc.maps[g]))
            rhs = compose_maps(stab_op_bar(rc.maps[f]), stab_op_bar(rc.maps[g]))
            assert lhs.mapping == rhs.mapping


def test_adjoint_of_identity():
    adj = local_left_adjoint(identity_map(powerset(2)))
    assert adj is not None and adj.frobenius
    assert dict(adj.mapping) == {a: a for a in range(4)}


@pytest.mark.parametrize("L", [chain(3), powerset(2), n5()], ids=["chain3", "powerset2", "n5"])
def test_adjoint_of_meet_with_is_downset_inclusion(L):
    for c in L.elements:
        adj = local_left_adjoint(meet_with(L, c))
        assert adj is not None and adj.frobenius
        assert dict(adj.mapping) == {b: b for b in L.downset(c)}


def test_non_open_map_from_antichain_lattice_into_chain():
    found = []
    for g in stable_maps(powerset(2), chain(3)):
        adj = local_left_adjoint(g)
        if adj is None or not adj.frobenius:
            found.append(g)
        # the meet-formula candidate succeeds exactly when some adjoint exists
        assert (adj is None) == (all_local_left_adjoints(g) == [])
    assert found


def test_frames():
    assert is_frame(powerset(2))
    assert is_frame(chain(3))
    assert not is_frame(m3())
    assert not is_frame(n5())


def test_preserves_joins_examples():
    P = powerset(2)
    assert preserves_joins(identity_map(P))
    for c in P.elements:
        assert preserves_joins(meet_with(P, c))
    assert not preserves_joins(StableMap(P, P, (0, 0, 0, 3)))


def test_preserves_joins_rejects_non_frames():
    with pytest.raises(CategoryError):
        preserves_joins(identity_map(m3()))


def test_identity_square_is_beck_chevalley():
    i = identity_map(powerset(2))
    assert beck_chevalley(StabSquare(i, i, i, i))


def test_comparison_squares_of_identity_on_set_p_are_beck_chevalley():
    F = suite.functors()["id[set_p[1,2]]"]
    assert all(beck_chevalley(sq) for _, sq in comparison_squares(F))


def _first_failing_square():
    Ls = [chain(2), chain(3), powerset(2)]
    for A, B, C, D in itertools.product(Ls, repeat=4):
        hs = [h for h in stable_maps(A, B) if is_open(h)]
        ks = [k for k in stable_maps(C, D) if is_open(k)]
        fs = [f for f in stable_maps(A, C) if f.is_total]
        gs = [g for g in stable_maps(B, D) if g.is_total]
        for h, f, g, k in itertools.product(hs, fs, gs, ks):
            if compose_maps(g, h).mapping == compose_maps(k, f).mapping:
                sq = StabSquare(h, f, g, k)
                if not beck_chevalley(sq):
                    return sq
    return None


def test_search_finds_commuting_square_failing_the_mate_condition():
    sq = _first_failing_square()
    assert sq is not None
    assert sq.commutes() and beck_chevalley_failure(sq) == "mate"


def test_non_commuting_square_rejected():
    C = chain(2)
    bad = StabSquare(identity_map(C), identity_map(C), identity_map(C), StableMap(C, C, (0, 0)))
    with pytest.raises(CategoryError):
        beck_chevalley(bad)


@given(lattices, lattices, st.data())
def test_openness_is_downward_closed(L, M, data):
    g = data.draw(st.sampled_from(stable_maps(L, M)))
    if not is_open(g):
        return
    for c in M.downset(g.top_image):
        smaller = compose_maps(meet_with(M, c), g)  # a -> g(a) ∧ c, below g
        assert is_open(smaller)


@given(lattices, lattices, lattices, st.data())
def test_open_maps_compose(L, M, N, data):
    g = data.draw(st.sampled_from(stable_maps(L, M)))
    h = data.draw(st.sampled_from(stable_maps(M, N)))
    if is_open(g) and is_open(h):
        assert is_open(compose_maps(h, g))


@given(lattices)
def test_identities_open(L):
    assert is_open(identity_map(L))


@given(lattices, lattices, st.data())
def test_adjoint_is_unique_and_equals_meet_formula(L, M, data):
    g = data.draw(st.sampled_from(stable_maps(L, M)))
    adj = local_left_adjoint(g)
    found = all_local_left_adjoints(g)
    if adj is None:
        assert found == []
    else:
        assert found == [dict(adj.mapping)]


def test_beck_chevalley_squares_compose_horizontally():
    F = suite.functors()["id[set_p[1,2]]"]
    C = F.source
    squares = dict(comparison_squares(F))
    checked = 0
    for f in C.morphisms:
        for g in C.out_of(C.cod[f]):
            # square(g) sits left of square(f): O(C) -> O(B) -> O(A)
            pasted = compose_squares_horizontal(squares[g], squares[f])
            assert pasted.top.mapping == squares[C.comp(g, f)].top.mapping
            assert beck_chevalley(pasted)
            checked += 1
    assert checked > 100
