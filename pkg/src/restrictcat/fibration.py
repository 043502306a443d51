"""Restriction categories viewed as locally posetal 2-categories: discrete
fibrations of hom-posets, local discrete fibrations, and lifting restriction
structure back along them."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

from .core import CategoryError, FinCat, FinFunctor, validate_functor
from .restriction import (
    RestrictionCat,
    is_restriction_functor,
    leq,
    verify_restriction,
)


@dataclass(frozen=True)
class FinPoset:
    elements: tuple[int, ...]
    order: frozenset[tuple[int, int]]

    def leq(self, a: int, b: int) -> bool:
        return (a, b) in self.order


def validate_poset(P: FinPoset) -> bool:
    els = P.elements
    if any((a, a) not in P.order for a in els):
        return False
    if any(a != b and (b, a) in P.order for a, b in P.order):
        return False
    return all((a, c) in P.order for a, b in P.order for b2, c in P.order if b == b2)


@dataclass(frozen=True)
class MonotoneMap:
    source: FinPoset
    target: FinPoset
    mapping: Mapping[int, int]

    def is_monotone(self) -> bool:
        return all(self.target.leq(self.mapping[a], self.mapping[b]) for a, b in self.source.order)


@dataclass(frozen=True)
class LocallyPosetal2Cat:
    """A category whose homs carry partial orders (pairs ``(f, g)`` with ``f <= g``).

    ``origin`` optionally remembers the restriction category it came from.
    """

    base: FinCat
    order: frozenset[tuple[int, int]]
    origin: RestrictionCat | None = field(default=None, compare=False)

    def leq(self, f: int, g: int) -> bool:
        return (f, g) in self.order

    def hom_poset(self, a: int, b: int) -> FinPoset:
        return self._posets[(a, b)]

    @cached_property
    def _posets(self) -> dict[tuple[int, int], FinPoset]:
        c = self.base
        out = {}
        for a in c.objects:
            for b in c.objects:
                hom = c.hom(a, b)
                hs = set(hom)
                out[(a, b)] = FinPoset(tuple(hom), frozenset((f, g) for f, g in self.order if f in hs and g in hs))
        return out


def whisker_failure(k2: LocallyPosetal2Cat) -> tuple[int, int, int] | None:
    """A triple showing the order is not preserved by pre- or postcomposition."""
    c = k2.base
    for f, g in sorted(k2.order):
        for h in c.out_of(c.cod[f]):
            if not k2.leq(c.comp(h, f), c.comp(h, g)):
                return (f, g, h)
        for k in c.into(c.dom[f]):
            if not k2.leq(c.comp(f, k), c.comp(g, k)):
                return (f, g, k)
    return None


def gamma(rc: RestrictionCat) -> LocallyPosetal2Cat:
    """Forget the bar operator, keeping only the induced hom orders."""
    cached = rc.__dict__.get("_gamma")
    if cached is not None:
        return cached
    k2 = LocallyPosetal2Cat(rc.base, gamma_order(rc), rc)
    if whisker_failure(k2) is not None:
        raise CategoryError("restriction order is not preserved by composition")
    rc.__dict__["_gamma"] = k2
    return k2


@dataclass(frozen=True)
class TwoFunctor:
    functor: FinFunctor
    source: LocallyPosetal2Cat
    target: LocallyPosetal2Cat


def validate_two_functor(F2: TwoFunctor) -> bool:
    if not validate_functor(F2.functor).ok:
        return False
    return all(F2.target.leq(F2.functor.mor_map[f], F2.functor.mor_map[g]) for f, g in F2.source.order)


def gamma_functor(F: FinFunctor) -> TwoFunctor:
    src, tgt = F.source, F.target
    if not isinstance(src, RestrictionCat) or not isinstance(tgt, RestrictionCat):
        raise CategoryError("gamma needs a functor between restriction categories")
    s2, t2 = gamma(src), gamma(tgt)
    F2 = TwoFunctor(FinFunctor(s2.base, t2.base, F.obj_map, F.mor_map), s2, t2)
    if not validate_two_functor(F2):
        raise CategoryError("functor does not preserve the hom orders")
    return F2


def is_discrete_fibration_poset(p: MonotoneMap) -> bool:
    """For each ``e`` and ``b <= p(e)``, exactly one ``e' <= e`` has ``p(e') = b``."""
    return discrete_fibration_failure(p) is None


def discrete_fibration_failure(p: MonotoneMap) -> tuple[int, int] | None:
    S, T = p.source, p.target
    for e in S.elements:
        lows = [x for x in S.elements if S.leq(x, e)]
        for b in T.elements:
            if not T.leq(b, p.mapping[e]):
                continue
            if sum(1 for x in lows if p.mapping[x] == b) != 1:
                return (e, b)
    return None


def hom_component(F2: TwoFunctor, a: int, b: int) -> MonotoneMap:
    F = F2.functor
    src = F2.source.hom_poset(a, b)
    tgt = F2.target.hom_poset(F.obj_map[a], F.obj_map[b])
    return MonotoneMap(src, tgt, {f: F.mor_map[f] for f in src.elements})


def is_local_discrete_fibration(F2: TwoFunctor) -> bool:
    objs = F2.source.base.objects
    return all(is_discrete_fibration_poset(hom_component(F2, a, b)) for a in objs for b in objs)


def postcomposition(k2: LocallyPosetal2Cat, x: int, f: int) -> MonotoneMap:
    c = k2.base
    return MonotoneMap(
        k2.hom_poset(x, c.dom[f]),
        k2.hom_poset(x, c.cod[f]),
        {h: c.comp(f, h) for h in c.hom(x, c.dom[f])},
    )


def is_discrete_fibration_map(k2: LocallyPosetal2Cat, f: int) -> bool:
    return all(is_discrete_fibration_poset(postcomposition(k2, x, f)) for x in k2.base.objects)


def poset_meet(P: FinPoset, a: int, b: int) -> int:
    lows = [x for x in P.elements if P.leq(x, a) and P.leq(x, b)]
    glb = [x for x in lows if all(P.leq(y, x) for y in lows)]
    if len(glb) != 1:
        raise CategoryError(f"{a} and {b} have no meet in the hom poset")
    return glb[0]


def lift_restriction(C2: LocallyPosetal2Cat, F2: TwoFunctor) -> tuple[RestrictionCat, FinFunctor]:
    """Equip ``C2``'s category with the unique restriction structure making
    ``F2`` a restriction functor: ``bar(f)`` is the lift of ``bar(F f)`` below 1."""
    D = F2.target.origin
    if D is None:
        raise CategoryError("target 2-category does not remember its restriction structure")
    if F2.source != C2:
        raise CategoryError("2-functor does not start at the given 2-category")
    if not is_local_discrete_fibration(F2):
        raise CategoryError("2-functor is not a local discrete fibration")
    C = C2.base
    F = F2.functor
    bar = []
    for f in C.morphisms:
        a = C.dom[f]
        one = C.identity[a]
        want = D.bar[F.mor_map[f]]
        lifts = [e for e in C.hom(a, a) if C2.leq(e, one) and F.mor_map[e] == want]
        if len(lifts) != 1:
            raise CategoryError(f"restriction of {f} does not lift uniquely")
        bar.append(lifts[0])
    rc = RestrictionCat.of(C, bar)
    rep = verify_restriction(rc)
    if not rep.ok:
        raise CategoryError(f"lifted structure fails its axioms: {rep.failures}")
    if gamma(rc).order != C2.order:
        raise CategoryError("lifted structure induces a different order")
    Fhat = FinFunctor(rc, D, F.obj_map, F.mor_map)
    if not is_restriction_functor(Fhat):
        raise CategoryError("lifted functor does not preserve restrictions")
    others = restriction_structures_for_order(C2, limit=2)
    if others != [tuple(bar)]:
        raise CategoryError("restriction structure inducing this order is not unique")
    return rc, Fhat


def restriction_structures_for_order(C2: LocallyPosetal2Cat, limit: int | None = None) -> list[tuple[int, ...]]:
    """Every bar operator on ``C2.base`` satisfying R1-R4 whose induced order
    is ``C2.order``. Each ``f`` admits only endomorphisms ``e`` of its domain
    with ``g∘e == f`` exactly for the ``g >= f``; combinations are then checked."""
    C = C2.base
    options: list[list[int]] = []
    for f in C.morphisms:
        a, b = C.dom[f], C.cod[f]
        par = C.hom(a, b)
        one = C.identity[a]
        ok = [e for e in C.hom(a, a)
              if C2.leq(e, one) and all((C.comp(g, e) == f) == C2.leq(f, g) for g in par)]
        if not ok:
            return []
        options.append(ok)
    out = []
    for combo in itertools.product(*options):
        rc = RestrictionCat.of(C, combo)
        if verify_restriction(rc).ok and gamma_order(rc) == C2.order:
            out.append(tuple(combo))
            if limit is not None and len(out) >= limit:
                break
    return out


def gamma_order(rc: RestrictionCat) -> frozenset[tuple[int, int]]:
    return frozenset(
        (f, g) for f in rc.morphisms for g in rc.hom(rc.dom[f], rc.cod[f]) if leq(rc, f, g)
    )
