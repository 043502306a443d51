"""Range operators: axioms, exhaustive enumeration, derivation from the
fundamental functor's local left adjoints, range-preserving functors, and
their Beck-Chevalley characterisation."""

from __future__ import annotations

from dataclasses import dataclass

from .config import RANGE_ENUMERATION_LIMIT
from .core import CategoryError, FinFunctor
from .restriction import AxiomReport, RestrictionCat, require_restriction_functor

AXIOMS = ("RR1", "RR2", "RR3", "RR4")


@dataclass(frozen=True)
class RangeStructure:
    """``hat[f]`` is an endomorphism of ``cod(f)``."""

    host: RestrictionCat
    hat: tuple[int, ...]


def _hat_problem(rc: RestrictionCat, hat) -> str | None:
    if len(hat) != rc.n_morphisms:
        return "hat_not_total"
    for f in rc.morphisms:
        h = hat[f]
        if not 0 <= h < rc.n_morphisms:
            return "hat_dangling"
        if rc.dom[h] != rc.cod[f] or rc.cod[h] != rc.cod[f]:
            return "hat_not_endomorphism"
    return None


def verify_range(rs: RangeStructure) -> AxiomReport:
    rc, hat = rs.host, rs.hat
    problem = _hat_problem(rc, hat)
    if problem is not None:
        return AxiomReport({k: None for k in AXIOMS}, problem)
    c, bar = rc._dense, rc.bar
    res: dict[str, tuple[int, ...] | None] = {k: None for k in AXIOMS}
    for f in rc.morphisms:
        if bar[hat[f]] != hat[f]:
            res["RR1"] = (f,)
            break
    for f in rc.morphisms:
        if c[hat[f]][f] != f:
            res["RR2"] = (f,)
            break
    for f in rc.morphisms:
        for g in rc.out_of(rc.cod[f]):
            if res["RR3"] is None and hat[c[bar[g]][f]] != c[bar[g]][hat[f]]:
                res["RR3"] = (f, g)
            if res["RR4"] is None and hat[c[g][hat[f]]] != hat[c[g][f]]:
                res["RR4"] = (f, g)
        if res["RR3"] is not None and res["RR4"] is not None:
            break
    return AxiomReport(res)


def enumerate_range_operators(rc: RestrictionCat, bound: int = RANGE_ENUMERATION_LIMIT) -> list[RangeStructure]:
    """Every operator satisfying RR1-RR4. Candidates per morphism are first
    narrowed by RR1 and RR2 (which involve one morphism each); the pair
    axioms are checked as soon as both ends are assigned."""
    if rc.n_morphisms > bound:
        raise CategoryError(f"{rc.n_morphisms} morphisms exceeds the enumeration bound {bound}")
    c, bar = rc._dense, rc.bar
    n = rc.n_morphisms
    cands = []
    for f in rc.morphisms:
        b = rc.cod[f]
        cands.append([e for e in rc.hom(b, b) if bar[e] == e and c[e][f] == f])
    pair_checks: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for f in rc.morphisms:
        for g in rc.out_of(rc.cod[f]):
            for x in (f, c[bar[g]][f], c[g][f]):
                pair_checks[x].append((f, g))
    hat = [-1] * n
    out: list[tuple[int, ...]] = []

    def ok_pair(f: int, g: int) -> bool:
        hf = hat[f]
        gf_bar = c[bar[g]][f]
        if hf >= 0 and hat[gf_bar] >= 0 and hat[gf_bar] != c[bar[g]][hf]:
            return False
        if hf >= 0:
            ghf = c[g][hf]
            gf = c[g][f]
            if hat[ghf] >= 0 and hat[gf] >= 0 and hat[ghf] != hat[gf]:
                return False
        return True

    def rec(i: int) -> None:
        if i == n:
            out.append(tuple(hat))
            return
        for e in cands[i]:
            hat[i] = e
            if all(ok_pair(f, g) for f, g in pair_checks[i]):
                rec(i + 1)
        hat[i] = -1

    rec(0)
    found = []
    for h in out:
        rs = RangeStructure(rc, h)
        if verify_range(rs).ok:
            found.append(rs)
    return found


@dataclass(frozen=True)
class RangeDerivation:
    structure: RangeStructure | None
    first_non_open: int | None


def derive(rc: RestrictionCat) -> RangeDerivation:
    """``hat(f) = f_!(bar f)`` where ``f_!`` is the local left adjoint of
    ``f*: O(B) -> O(A)``; fails at the first ``f`` whose ``f*`` is not open."""
    from .fundamental import fundamental_functor, pullback_map
    from .semilattice import local_left_adjoint

    fund = fundamental_functor(rc)
    hat = []
    for f in rc.morphisms:
        a, b = rc.dom[f], rc.cod[f]
        adj = local_left_adjoint(pullback_map(rc, fund, f))
        if adj is None or not adj.frobenius:
            return RangeDerivation(None, f)
        hat.append(fund.idempotent(b, adj(fund.element(a, rc.bar[f]))))
    rs = RangeStructure(rc, tuple(hat))
    rep = verify_range(rs)
    if not rep.ok:
        raise CategoryError(f"derived range operator fails its axioms: {rep.failures}")
    return RangeDerivation(rs, None)


def derive_range(rc: RestrictionCat) -> RangeStructure | None:
    return derive(rc).structure


def range_functor_failure(F: FinFunctor, rs_src: RangeStructure, rs_tgt: RangeStructure) -> int | None:
    require_restriction_functor(F)
    for f in F.source.morphisms:
        if F.mor_map[rs_src.hat[f]] != rs_tgt.hat[F.mor_map[f]]:
            return f
    return None


def is_range_functor(F: FinFunctor, rs_src: RangeStructure, rs_tgt: RangeStructure) -> bool:
    return range_functor_failure(F, rs_src, rs_tgt) is None


def comparison_squares(F: FinFunctor):
    """For each ``f: A -> B`` the naturality square of the comparison
    transformation, oriented with ``f*`` on top::

        O(B)  --f*-->  O(A)
         |phi_B          |phi_A
        O(FB) -(Ff)*-> O(FA)
    """
    from .fundamental import comparison, pullback_map
    from .semilattice import StabSquare

    comp = comparison(F)
    fc, fd = comp.source_fundamental, comp.target_fundamental
    C, D = F.source, F.target
    for f in C.morphisms:
        a, b = C.dom[f], C.cod[f]
        yield f, StabSquare(
            top=pullback_map(C, fc, f),
            left=comp.maps[b],
            right=comp.maps[a],
            bottom=pullback_map(D, fd, F.mor_map[f]),
        )


def bc_failure(F: FinFunctor) -> tuple[int, str] | None:
    from .semilattice import beck_chevalley_failure

    for f, sq in comparison_squares(F):
        why = beck_chevalley_failure(sq)
        if why is not None:
            return (f, why)
    return None


def range_preservation_via_bc(F: FinFunctor) -> bool:
    """True iff every naturality square of the comparison transformation is
    Beck-Chevalley."""
    require_restriction_functor(F)
    return bc_failure(F) is None
