"""Restriction structure on a finite category: the bar operator, its axioms,
the induced order on homs, total maps and partial inverses."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

from .core import CategoryError, FinCat, FinFunctor, ValidationReport, validate_functor

AXIOMS = ("R1", "R2", "R3", "R4")


@dataclass(frozen=True)
class RestrictionCat(FinCat):
    """A FinCat together with ``bar[f]``, an endomorphism of ``dom(f)``.

    The axioms are not checked on construction; use ``verify_restriction``.
    """

    bar: tuple[int, ...] = ()

    @classmethod
    def of(cls, c: FinCat, bar: Sequence[int]) -> RestrictionCat:
        return cls(c.dom, c.cod, c.identity, c.table, c.obj_labels, c.mor_labels, tuple(bar))

    @cached_property
    def _leq(self) -> dict[int, frozenset[int]]:
        # f -> set of g with f <= g
        ups: dict[int, set[int]] = {f: set() for f in self.morphisms}
        for f in self.morphisms:
            bf = self.bar[f]
            for g in self.hom(self.dom[f], self.cod[f]):
                if self._dense[g][bf] == f:
                    ups[f].add(g)
        return {f: frozenset(s) for f, s in ups.items()}

    @cached_property
    def _downs(self) -> dict[int, tuple[int, ...]]:
        downs: dict[int, list[int]] = {g: [] for g in self.morphisms}
        for f, ups in self._leq.items():
            for g in ups:
                downs[g].append(f)
        return {g: tuple(sorted(v)) for g, v in downs.items()}


@dataclass(frozen=True)
class AxiomReport:
    """Per-axiom verdicts: ``results[name]`` is None when the axiom holds,
    otherwise the first witness found (a tuple of ids)."""

    results: Mapping[str, tuple[int, ...] | None]
    structural: str | None = None

    @property
    def ok(self) -> bool:
        return self.structural is None and all(w is None for w in self.results.values())

    def __bool__(self) -> bool:
        return self.ok

    def failed(self) -> list[str]:
        return [k for k, w in self.results.items() if w is not None]

    @property
    def failures(self) -> tuple[tuple[str, tuple[int, ...]], ...]:
        out = [(k, w) for k, w in self.results.items() if w is not None]
        if self.structural is not None:
            out.insert(0, ("structure." + self.structural, ()))
        return tuple(out)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "structural": self.structural,
            "results": {k: (None if w is None else list(w)) for k, w in sorted(self.results.items())},
        }


def bar_structure_problem(rc: RestrictionCat) -> str | None:
    if len(rc.bar) != rc.n_morphisms:
        return "bar_not_total"
    for f in rc.morphisms:
        b = rc.bar[f]
        if not 0 <= b < rc.n_morphisms:
            return "bar_dangling"
        if rc.dom[b] != rc.dom[f] or rc.cod[b] != rc.dom[f]:
            return "bar_not_endomorphism"
    return None


def verify_restriction(rc: RestrictionCat) -> AxiomReport:
    """Exhaustively check R1-R4. Pairs are quantified exactly as typing allows:
    R2 and R3 over ``f, g`` with a common domain, R4 over ``f: A->B, g: B->C``."""
    problem = bar_structure_problem(rc)
    if problem is not None:
        return AxiomReport({k: None for k in AXIOMS}, problem)
    c, bar = rc._dense, rc.bar
    results: dict[str, tuple[int, ...] | None] = {k: None for k in AXIOMS}
    for f in rc.morphisms:
        if c[f][bar[f]] != f:
            results["R1"] = (f,)
            break
    for f in rc.morphisms:
        if results["R2"] is not None and results["R3"] is not None:
            break
        bf = bar[f]
        for g in rc.out_of(rc.dom[f]):
            bg = bar[g]
            if results["R2"] is None and c[bf][bg] != c[bg][bf]:
                results["R2"] = (f, g)
            if results["R3"] is None and bar[c[g][bf]] != c[bg][bf]:
                results["R3"] = (f, g)
    for f in rc.morphisms:
        if results["R4"] is not None:
            break
        for g in rc.out_of(rc.cod[f]):
            if c[bar[g]][f] != c[f][bar[c[g][f]]]:
                results["R4"] = (f, g)
                break
    return AxiomReport(results)


def _require_parallel(rc: FinCat, f: int, g: int) -> None:
    if not rc.parallel(f, g):
        raise CategoryError(f"morphisms {f} and {g} are not parallel")


def leq(rc: RestrictionCat, f: int, g: int) -> bool:
    """``f <= g`` in the restriction order, i.e. ``g∘bar(f) == f``."""
    _require_parallel(rc, f, g)
    return rc._dense[g][rc.bar[f]] == f


def below(rc: RestrictionCat, g: int) -> tuple[int, ...]:
    """All ``f <= g``, ascending."""
    return rc._downs[g]


def above(rc: RestrictionCat, f: int) -> frozenset[int]:
    return rc._leq[f]


def is_total(rc: RestrictionCat, f: int) -> bool:
    return rc.bar[f] == rc.identity[rc.dom[f]]


def restriction_idempotents(rc: RestrictionCat, a: int) -> frozenset[int]:
    return frozenset(e for e in rc.hom(a, a) if rc.bar[e] == e)


def compatible(rc: RestrictionCat, f: int, g: int) -> bool:
    _require_parallel(rc, f, g)
    c = rc._dense
    return c[f][rc.bar[g]] == c[g][rc.bar[f]]


def partial_inverse(rc: RestrictionCat, x: int) -> int | None:
    """The ``y`` with ``y∘x == bar(x)`` and ``x∘y == bar(y)``, if any."""
    c = rc._dense
    for y in rc.hom(rc.cod[x], rc.dom[x]):
        if c[y][x] == rc.bar[x] and c[x][y] == rc.bar[y]:
            return y
    return None


def is_inverse_category(rc: RestrictionCat) -> bool:
    return all(partial_inverse(rc, x) is not None for x in rc.morphisms)


def trivial_bar(c: FinCat) -> tuple[int, ...]:
    return tuple(c.identity[c.dom[f]] for f in c.morphisms)


def is_restriction_functor(F: FinFunctor) -> bool:
    src, tgt = F.source, F.target
    if not isinstance(src, RestrictionCat) or not isinstance(tgt, RestrictionCat):
        return False
    if not validate_functor(F).ok:
        return False
    return all(F.mor_map[src.bar[f]] == tgt.bar[F.mor_map[f]] for f in src.morphisms)


def validate_restriction_functor(F: FinFunctor) -> ValidationReport:
    rep = validate_functor(F)
    if not rep.ok:
        return rep
    src, tgt = F.source, F.target
    for f in src.morphisms:
        if F.mor_map[src.bar[f]] != tgt.bar[F.mor_map[f]]:
            return ValidationReport((("bar", (f,)),))
    return ValidationReport()


def require_restriction_functor(F: FinFunctor) -> None:
    if not isinstance(F.source, RestrictionCat) or not isinstance(F.target, RestrictionCat):
        raise CategoryError("functor endpoints must be restriction categories")
    rep = validate_restriction_functor(F)
    if not rep.ok:
        raise CategoryError(f"not a restriction functor: {rep.failures[0]}")
