"""Joins of compatible families, their axioms, join-preserving functors,
covers, étale maps, and lifting joins along locally étale 2-functors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from .config import FAMILY_ALL_SUBSETS_MAX_HOM, FAMILY_MAX_SIZE
from .core import CategoryError, FinFunctor
from .restriction import (
    AxiomReport,
    RestrictionCat,
    compatible,
    is_restriction_functor,
    leq,
    require_restriction_functor,
)
from .semilattice import StabOpCat, full_stab_op, is_frame


class IncompatibleFamily(CategoryError):
    def __init__(self, f: int, g: int):
        super().__init__(f"morphisms {f} and {g} are not compatible")
        self.witness = (f, g)


class JoinUndefined(CategoryError):
    pass


@dataclass(frozen=True)
class JoinStructure:
    """Joins given by a table on compatible pairs plus a bottom per hom.

    The join of a finite family is the fold of ``pairs`` over its members in
    ascending id order; the empty family joins to ``bottoms[(A, B)]``.
    """

    host: RestrictionCat
    pairs: Mapping[tuple[int, int], int]
    bottoms: Mapping[tuple[int, int], int]


@dataclass(frozen=True)
class CoverFamily:
    hom: tuple[int, int]
    members: tuple[int, ...]
    target: int


def _first_incompatible(rc: RestrictionCat, family: Sequence[int]) -> tuple[int, int] | None:
    fam = sorted(set(family))
    for i, f in enumerate(fam):
        for g in fam[i + 1:]:
            if not compatible(rc, f, g):
                return (f, g)
    return None


def join_of(js: JoinStructure, family: Sequence[int], hom: tuple[int, int] | None = None) -> int:
    rc = js.host
    fam = sorted(set(family))
    if not fam:
        if hom is None:
            raise CategoryError("the empty family needs an explicit hom")
        if hom not in js.bottoms:
            raise JoinUndefined(f"no bottom recorded for hom {hom}")
        return js.bottoms[hom]
    a, b = rc.dom[fam[0]], rc.cod[fam[0]]
    if any(rc.dom[f] != a or rc.cod[f] != b for f in fam):
        raise CategoryError("family members are not parallel")
    if hom is not None and hom != (a, b):
        raise CategoryError("family does not lie in the given hom")
    bad = _first_incompatible(rc, fam)
    if bad is not None:
        raise IncompatibleFamily(*bad)
    acc = fam[0]
    if len(fam) == 1 and (acc, acc) in js.pairs:
        return js.pairs[(acc, acc)]
    for f in fam[1:]:
        if (acc, f) not in js.pairs:
            raise JoinUndefined(f"join of {acc} and {f} is undefined")
        acc = js.pairs[(acc, f)]
    return acc


def compatible_families(rc: RestrictionCat, hom: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Pairwise-compatible subsets of ``hom`` (including the empty one).

    All of them when the hom has at most the configured number of members;
    otherwise those of bounded size plus the whole hom if it is compatible.
    """
    hom = sorted(hom)
    small = len(hom) <= FAMILY_ALL_SUBSETS_MAX_HOM
    cap = len(hom) if small else FAMILY_MAX_SIZE
    compat = {f: {g for g in hom if compatible(rc, f, g)} for f in hom}
    chosen: list[int] = []

    def rec(start: int) -> Iterator[tuple[int, ...]]:
        yield tuple(chosen)
        if len(chosen) == cap:
            return
        for i in range(start, len(hom)):
            f = hom[i]
            if all(f in compat[g] for g in chosen):
                chosen.append(f)
                yield from rec(i + 1)
                chosen.pop()

    yield from rec(0)
    if not small and len(hom) > cap and _first_incompatible(rc, hom) is None:
        yield tuple(hom)


def verify_join(js: JoinStructure) -> AxiomReport:
    """Existence and least-upper-bound property of joins, then J1-J3, over
    the families produced by ``compatible_families``."""
    rc = js.host
    names = ("existence", "lub", "J1", "J2", "J3")
    res: dict[str, tuple[int, ...] | None] = {k: None for k in names}

    def safe(fam, hom):
        try:
            return join_of(js, fam, hom)
        except JoinUndefined:
            return None

    for a in rc.objects:
        for b in rc.objects:
            hom = rc.hom(a, b)
            for fam in compatible_families(rc, hom):
                if all(w is not None for w in res.values()):
                    return AxiomReport(res)
                j = safe(fam, (a, b))
                if j is None:
                    res["existence"] = res["existence"] or fam
                    continue
                if rc.dom[j] != a or rc.cod[j] != b:
                    return AxiomReport(res, "join_typing")
                if res["lub"] is None:
                    if not all(leq(rc, f, j) for f in fam):
                        res["lub"] = fam + (j,)
                    else:
                        for u in hom:
                            if all(leq(rc, f, u) for f in fam) and not leq(rc, j, u):
                                res["lub"] = fam + (u,)
                                break
                if res["J1"] is None:
                    jb = safe([rc.bar[f] for f in fam], (a, a))
                    if jb != rc.bar[j]:
                        res["J1"] = fam
                if res["J2"] is None:
                    for g in rc.into(a):
                        if safe([rc.comp(f, g) for f in fam], (rc.dom[g], b)) != rc.comp(j, g):
                            res["J2"] = fam + (g,)
                            break
                if res["J3"] is None:
                    for h in rc.out_of(b):
                        if safe([rc.comp(h, f) for f in fam], (a, rc.cod[h])) != rc.comp(h, j):
                            res["J3"] = fam + (h,)
                            break
    return AxiomReport(res)


def join_functor_failure(F: FinFunctor, js_src: JoinStructure, js_tgt: JoinStructure) -> tuple[int, ...] | None:
    require_restriction_functor(F)
    C, D = F.source, F.target
    for a in C.objects:
        for b in C.objects:
            for fam in compatible_families(C, C.hom(a, b)):
                lhs = F.mor_map[join_of(js_src, fam, (a, b))]
                try:
                    rhs = join_of(js_tgt, [F.mor_map[f] for f in fam], (F.obj_map[a], F.obj_map[b]))
                except CategoryError:
                    return fam
                if lhs != rhs:
                    return fam
    return None


def is_join_functor(F: FinFunctor, js_src: JoinStructure, js_tgt: JoinStructure) -> bool:
    return join_functor_failure(F, js_src, js_tgt) is None


def is_cover(js: JoinStructure, family: Sequence[int], f: int) -> bool:
    rc = js.host
    for g in family:
        if not leq(rc, g, f):
            raise CategoryError(f"member {g} is not below {f}")
    return join_of(js, family, (rc.dom[f], rc.cod[f])) == f


def hom_pullback(rc: RestrictionCat, f: int, g: int) -> int:
    """``f ×_h g`` for ``f, g <= h``: ``f∘bar(g)``, checked against ``g∘bar(f)``."""
    a = rc.comp(f, rc.bar[g])
    b = rc.comp(g, rc.bar[f])
    if a != b:
        raise CategoryError(f"{f} and {g} are not compatible")
    return a


# ---------------------------------------------------------------------------
# étale maps and locally étale 2-functors


def _unique_patchings(candidates: Sequence[int], members: Sequence[int], rc: RestrictionCat) -> int:
    return sum(1 for h in candidates if all(leq(rc, s, h) for s in members))


def etale_failure(js: JoinStructure, f: int) -> tuple[str, tuple[int, ...]] | None:
    """Why postcomposition with ``f`` is not étale, or None.

    Discrete fibration first; then, for every compatible family ``S`` in a
    hom into ``dom(f)``, the matching family ``S`` over the cover
    ``{f∘s} <= join(f∘s)`` must have exactly one patching.
    """
    from .fibration import gamma, is_discrete_fibration_map

    rc = js.host
    if not is_discrete_fibration_map(gamma(rc), f):
        return ("discrete_fibration", (f,))
    a, b = rc.dom[f], rc.cod[f]
    for x in rc.objects:
        hom = rc.hom(x, a)
        by_image: dict[int, list[int]] = {}
        for h in hom:
            by_image.setdefault(rc.comp(f, h), []).append(h)
        for fam in compatible_families(rc, hom):
            g = join_of(js, [rc.comp(f, s) for s in fam], (x, b))
            if _unique_patchings(by_image.get(g, []), fam, rc) != 1:
                return ("patching", fam)
    return None


def is_etale_map(js: JoinStructure, f: int) -> bool:
    return etale_failure(js, f) is None


def locally_etale_failure(F2, js_tgt: JoinStructure) -> tuple[str, tuple[int, ...]] | None:
    """Each hom component must be a discrete fibration, and each matching
    family over a cover in the target hom must patch uniquely. Matching is
    tested through the fibration's restrictions along hom-poset pullbacks."""
    from .fibration import hom_component, is_discrete_fibration_poset, poset_meet

    F = F2.functor
    src, tgt = F2.source, F2.target
    D = js_tgt.host
    for a in src.base.objects:
        for b in src.base.objects:
            p = hom_component(F2, a, b)
            if not is_discrete_fibration_poset(p):
                return ("discrete_fibration", (a, b))
            fa, fb = F.obj_map[a], F.obj_map[b]
            tgt_poset = tgt.hom_poset(fa, fb)
            src_poset = p.source

            def restrict(s: int, g_s: int, other: int) -> int:
                # the unique s' <= s over g_s ×_g other
                m = poset_meet(tgt_poset, g_s, other)
                return next(x for x in src_poset.elements
                            if src_poset.leq(x, s) and p.mapping[x] == m)

            hom = sorted(src_poset.elements)
            by_image: dict[int, list[int]] = {}
            for h in hom:
                by_image.setdefault(p.mapping[h], []).append(h)
            for fam in _bounded_subsets(hom):
                images = [p.mapping[s] for s in fam]
                try:
                    g = join_of(js_tgt, images, (fa, fb))
                except CategoryError:
                    continue
                if any(not D.parallel(i, g) or not leq(D, i, g) for i in images):
                    continue
                matching = all(
                    restrict(s, p.mapping[s], p.mapping[t]) == restrict(t, p.mapping[t], p.mapping[s])
                    for i, s in enumerate(fam) for t in fam[i + 1:]
                )
                if not matching:
                    continue
                n = sum(1 for h in by_image.get(g, []) if all(src_poset.leq(s, h) for s in fam))
                if n != 1:
                    return ("patching", tuple(fam))
    return None


def _bounded_subsets(hom: Sequence[int]) -> Iterator[tuple[int, ...]]:
    import itertools

    small = len(hom) <= FAMILY_ALL_SUBSETS_MAX_HOM
    cap = len(hom) if small else FAMILY_MAX_SIZE
    for r in range(0, cap + 1):
        yield from itertools.combinations(hom, r)
    if not small and len(hom) > cap:
        yield tuple(hom)


def is_locally_etale(F2, js_tgt: JoinStructure) -> bool:
    return locally_etale_failure(F2, js_tgt) is None


def lift_join(C2, F2, js_tgt: JoinStructure) -> tuple[JoinStructure, FinFunctor]:
    """Lift restriction structure along ``F2``, then define the join of a
    compatible family as its unique patching over the join of its image."""
    from .fibration import lift_restriction

    if not is_locally_etale(F2, js_tgt):
        raise CategoryError("2-functor is not locally étale")
    rc, Fhat = lift_restriction(C2, F2)
    D = js_tgt.host

    def patch(fam: Sequence[int], a: int, b: int) -> int:
        g = join_of(js_tgt, [Fhat.mor_map[f] for f in fam], (Fhat.obj_map[a], Fhat.obj_map[b]))
        found = [h for h in rc.hom(a, b) if Fhat.mor_map[h] == g and all(leq(rc, f, h) for f in fam)]
        if len(found) != 1:
            raise CategoryError(f"family {tuple(fam)} has {len(found)} patchings")
        return found[0]

    pairs = {}
    for a in rc.objects:
        for b in rc.objects:
            hom = rc.hom(a, b)
            for f in hom:
                for g in hom:
                    if compatible(rc, f, g):
                        pairs[(f, g)] = patch([f, g] if f != g else [f], a, b)
    bottoms = {(a, b): patch([], a, b) for a in rc.objects for b in rc.objects}
    js = JoinStructure(rc, pairs, bottoms)
    rep = verify_join(js)
    if not rep.ok:
        raise CategoryError(f"lifted joins fail their axioms: {rep.failures}")
    if not is_join_functor(Fhat, js, js_tgt):
        raise CategoryError("lifted functor does not preserve joins")
    return js, Fhat


# ---------------------------------------------------------------------------
# join structures on specific hosts


def lub_join_structure(rc: RestrictionCat) -> JoinStructure | None:
    """Joins as least upper bounds in the restriction order, when every
    compatible pair and every hom has one; None otherwise."""
    pairs = {}
    bottoms = {}
    for a in rc.objects:
        for b in rc.objects:
            hom = rc.hom(a, b)
            if not hom:
                return None
            least = [x for x in hom if all(leq(rc, x, y) for y in hom)]
            if not least:
                return None
            bottoms[(a, b)] = least[0]
            for f in hom:
                for g in hom:
                    if not compatible(rc, f, g):
                        continue
                    ups = [u for u in hom if leq(rc, f, u) and leq(rc, g, u)]
                    lub = [u for u in ups if all(leq(rc, u, v) for v in ups)]
                    if not lub:
                        return None
                    pairs[(f, g)] = lub[0]
    return JoinStructure(rc, pairs, bottoms)


def stab_join_structure(stab: StabOpCat) -> JoinStructure:
    """Pointwise joins in a fragment of frames and join-preserving maps."""
    pairs = {}
    bottoms = {}
    for x in stab.objects:
        for y in stab.objects:
            Lx, Ly = stab.lattices[x], stab.lattices[y]
            bot = stab.find(x, y, [Lx.bottom] * Ly.size)
            if bot is None:
                raise CategoryError(f"fragment lacks the bottom map {x}->{y}")
            bottoms[(x, y)] = bot
            hom = stab.hom(x, y)
            for f in hom:
                for g in hom:
                    if not compatible(stab, f, g):
                        continue
                    mf, mg = stab.maps[f].mapping, stab.maps[g].mapping
                    j = stab.find(x, y, [Lx.join(u, v) for u, v in zip(mf, mg)])
                    if j is None:
                        raise CategoryError(f"fragment lacks the join of {f} and {g}")
                    pairs[(f, g)] = j
    return JoinStructure(stab, pairs, bottoms)


def fundamental_join(js: JoinStructure):
    """The fundamental functor landing in the full fragment of frames and
    join-preserving maps on the idempotent lattices, with pointwise joins.
    Returns ``(functor, target join structure)``."""
    from .fundamental import fundamental_functor
    from .semilattice import retarget

    fund = fundamental_functor(js.host)
    if not all(is_frame(L) for L in fund.lattice_of):
        raise CategoryError("idempotent lattices are not frames")
    full = full_stab_op(fund.lattice_of, joins_only=True)
    F = retarget(fund.functor, full)
    if not is_restriction_functor(F):
        raise CategoryError("retargeted fundamental functor is not a restriction functor")
    return F, stab_join_structure(full)
