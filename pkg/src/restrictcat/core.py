"""Finite categories given by explicit composition tables, functors between
them, and brute-force utilities (monos, pullbacks, functor search)."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence

ObjId = int
MorId = int


class CategoryError(ValueError):
    """Structurally malformed input: bad typing, dangling ids, wrong arity."""


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a law check. ``failures`` holds ``(law, witness ids)``.

    Laws whose name starts with ``structure`` are structural defects of the
    presentation itself rather than violations of an equational law.
    """

    failures: tuple[tuple[str, tuple[int, ...]], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def structural(self) -> bool:
        return any(name.startswith("structure") for name, _ in self.failures)

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "failures": [[name, list(w)] for name, w in self.failures],
        }


@dataclass(frozen=True)
class FinCat:
    """A finite category.

    Objects are ``0..n-1`` (``n = len(identity)``), morphisms ``0..m-1``.
    ``table[(g, f)]`` is the composite ``g∘f`` and must be present exactly
    for the pairs with ``cod(f) == dom(g)``.
    """

    dom: tuple[int, ...]
    cod: tuple[int, ...]
    identity: tuple[int, ...]
    table: Mapping[tuple[int, int], int]
    obj_labels: tuple[str, ...] = ()
    mor_labels: tuple[str, ...] = ()

    @property
    def n_objects(self) -> int:
        return len(self.identity)

    @property
    def n_morphisms(self) -> int:
        return len(self.dom)

    @property
    def objects(self) -> range:
        return range(self.n_objects)

    @property
    def morphisms(self) -> range:
        return range(self.n_morphisms)

    @property
    def base(self) -> FinCat:
        """The bare category (drops any extra structure carried by subclasses)."""
        if type(self) is FinCat:
            return self
        return FinCat(self.dom, self.cod, self.identity, self.table,
                      self.obj_labels, self.mor_labels)

    @cached_property
    def _dense(self) -> list[list[int]]:
        m = self.n_morphisms
        dense = [[-1] * m for _ in range(m)]
        for (g, f), h in self.table.items():
            if 0 <= g < m and 0 <= f < m:
                dense[g][f] = h
        return dense

    @cached_property
    def _homs(self) -> dict[tuple[int, int], tuple[int, ...]]:
        homs: dict[tuple[int, int], list[int]] = {}
        for m in self.morphisms:
            homs.setdefault((self.dom[m], self.cod[m]), []).append(m)
        return {k: tuple(v) for k, v in homs.items()}

    @cached_property
    def _out(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {a: [] for a in self.objects}
        for m in self.morphisms:
            out.setdefault(self.dom[m], []).append(m)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def _into(self) -> dict[int, tuple[int, ...]]:
        into: dict[int, list[int]] = {a: [] for a in self.objects}
        for m in self.morphisms:
            into.setdefault(self.cod[m], []).append(m)
        return {k: tuple(v) for k, v in into.items()}

    def hom(self, a: ObjId, b: ObjId) -> tuple[MorId, ...]:
        return self._homs.get((a, b), ())

    def out_of(self, a: ObjId) -> tuple[MorId, ...]:
        return self._out.get(a, ())

    def into(self, b: ObjId) -> tuple[MorId, ...]:
        return self._into.get(b, ())

    def comp(self, g: MorId, f: MorId) -> MorId:
        """``g∘f``; raises CategoryError on a non-composable pair."""
        h = self._dense[g][f]
        if h < 0:
            if self.cod[f] != self.dom[g]:
                raise CategoryError(f"cannot compose {g}∘{f}: cod({f}) != dom({g})")
            raise CategoryError(f"composition table has no entry for ({g}, {f})")
        return h

    def chain(self, *ms: MorId) -> MorId:
        """``ms[0]∘ms[1]∘...∘ms[-1]``."""
        out = ms[-1]
        for g in reversed(ms[:-1]):
            out = self.comp(g, out)
        return out

    def is_identity(self, m: MorId) -> bool:
        return self.identity[self.dom[m]] == m

    def parallel(self, f: MorId, g: MorId) -> bool:
        return self.dom[f] == self.dom[g] and self.cod[f] == self.cod[g]

    def composable_pairs(self) -> Iterator[tuple[MorId, MorId]]:
        """All ``(g, f)`` with ``cod(f) == dom(g)``."""
        for f in self.morphisms:
            for g in self.out_of(self.cod[f]):
                yield g, f

    def mor_name(self, m: MorId) -> str:
        if self.mor_labels:
            return self.mor_labels[m]
        return f"m{m}"

    def obj_name(self, a: ObjId) -> str:
        if self.obj_labels:
            return self.obj_labels[a]
        return f"o{a}"


def concrete_category(
    obj_labels: Sequence[str],
    arrows: Sequence[tuple[ObjId, ObjId, Hashable]],
    identities: Sequence[Hashable],
    compose: Callable[[Hashable, Hashable], Hashable],
    mor_label: Callable[[ObjId, ObjId, Hashable], str] | None = None,
) -> tuple[FinCat, dict[tuple[ObjId, ObjId, Hashable], MorId]]:
    """Tabulate a category whose morphisms are concrete values.

    ``arrows`` lists ``(dom, cod, key)``; ``compose(g_key, f_key)`` returns the
    key of ``g∘f``. Returns the category and the ``(dom, cod, key) -> id``
    index. Raises CategoryError when the arrows are not closed under
    composition or an identity is missing.
    """
    index: dict[tuple[ObjId, ObjId, Hashable], MorId] = {}
    for a, b, key in arrows:
        index.setdefault((a, b, key), len(index))
    items = list(index)
    dom = tuple(a for a, _, _ in items)
    cod = tuple(b for _, b, _ in items)
    ident = []
    for a, key in enumerate(identities):
        if (a, a, key) not in index:
            raise CategoryError(f"identity of object {a} is not among the arrows")
        ident.append(index[(a, a, key)])
    by_dom: dict[ObjId, list[MorId]] = {}
    for m, (a, _, _) in enumerate(items):
        by_dom.setdefault(a, []).append(m)
    table: dict[tuple[int, int], int] = {}
    for f, (a, b, fk) in enumerate(items):
        for g in by_dom.get(b, ()):
            _, c, gk = items[g]
            key = (a, c, compose(gk, fk))
            if key not in index:
                raise CategoryError(f"arrows not closed under composition: {key!r}")
            table[(g, f)] = index[key]
    labels: tuple[str, ...] = ()
    if mor_label is not None:
        labels = tuple(mor_label(a, b, k) for a, b, k in items)
    return FinCat(dom, cod, tuple(ident), table, tuple(obj_labels), labels), index


def validate_category(c: FinCat) -> ValidationReport:
    """Check typing of the table, then the unit and associativity laws.

    Only the first witness of each law is kept, and witnesses are found by
    scanning in id order, so they are the lexicographically least ones.
    """
    failures: list[tuple[str, tuple[int, ...]]] = []
    n, m = c.n_objects, c.n_morphisms
    if len(c.cod) != m:
        return ValidationReport((("structure.arity", (len(c.dom), len(c.cod))),))
    for x in c.morphisms:
        if not (0 <= c.dom[x] < n and 0 <= c.cod[x] < n):
            return ValidationReport((("structure.dangling_object", (x,)),))
    for a, i in enumerate(c.identity):
        if not (0 <= i < m) or c.dom[i] != a or c.cod[i] != a:
            return ValidationReport((("structure.identity", (a,)),))
    for (g, f), h in c.table.items():
        if not (0 <= g < m and 0 <= f < m and 0 <= h < m):
            return ValidationReport((("structure.dangling_morphism", (g, f, h)),))
        if c.cod[f] != c.dom[g]:
            return ValidationReport((("structure.uncomposable_entry", (g, f)),))
        if c.dom[h] != c.dom[f] or c.cod[h] != c.cod[g]:
            failures.append(("structure.composite_typing", (g, f, h)))
            return ValidationReport(tuple(failures))
    for g, f in c.composable_pairs():
        if (g, f) not in c.table:
            return ValidationReport((("structure.missing_composite", (g, f)),))

    for f in c.morphisms:
        if c.comp(c.identity[c.cod[f]], f) != f:
            failures.append(("left_unit", (f,)))
            break
    for f in c.morphisms:
        if c.comp(f, c.identity[c.dom[f]]) != f:
            failures.append(("right_unit", (f,)))
            break
    assoc = _first_assoc_failure(c)
    if assoc is not None:
        failures.append(("associativity", assoc))
    return ValidationReport(tuple(failures))


def _first_assoc_failure(c: FinCat) -> tuple[int, int, int] | None:
    d = c._dense
    for f in c.morphisms:
        for g in c.out_of(c.cod[f]):
            gf = d[g][f]
            for h in c.out_of(c.cod[g]):
                if d[h][gf] != d[d[h][g]][f]:
                    return (h, g, f)
    return None


@dataclass(frozen=True)
class FinFunctor:
    """A functor between finite categories, given by its object and morphism maps."""

    source: FinCat
    target: FinCat
    obj_map: tuple[int, ...]
    mor_map: tuple[int, ...]

    def __call__(self, m: MorId) -> MorId:
        return self.mor_map[m]

    def on_object(self, a: ObjId) -> ObjId:
        return self.obj_map[a]


def functors_equal(F: "FinFunctor", G: "FinFunctor") -> bool:
    """Same object and morphism assignments (endpoints are not compared)."""
    return F.obj_map == G.obj_map and F.mor_map == G.mor_map


def identity_functor(c: FinCat) -> FinFunctor:
    return FinFunctor(c, c, tuple(c.objects), tuple(c.morphisms))


def compose_functors(g: FinFunctor, f: FinFunctor) -> FinFunctor:
    """``g∘f``. The middle categories must agree."""
    if f.target != g.source:
        raise CategoryError("functors are not composable")
    return FinFunctor(
        f.source,
        g.target,
        tuple(g.obj_map[x] for x in f.obj_map),
        tuple(g.mor_map[x] for x in f.mor_map),
    )


def validate_functor(F: FinFunctor) -> ValidationReport:
    src, tgt = F.source, F.target
    if len(F.obj_map) != src.n_objects or len(F.mor_map) != src.n_morphisms:
        return ValidationReport((("structure.not_total", (len(F.obj_map), len(F.mor_map))),))
    if any(not 0 <= x < tgt.n_objects for x in F.obj_map):
        return ValidationReport((("structure.dangling_object", ()),))
    if any(not 0 <= x < tgt.n_morphisms for x in F.mor_map):
        return ValidationReport((("structure.dangling_morphism", ()),))
    failures: list[tuple[str, tuple[int, ...]]] = []
    for m in src.morphisms:
        fm = F.mor_map[m]
        if tgt.dom[fm] != F.obj_map[src.dom[m]] or tgt.cod[fm] != F.obj_map[src.cod[m]]:
            failures.append(("typing", (m,)))
            return ValidationReport(tuple(failures))
    for a in src.objects:
        if F.mor_map[src.identity[a]] != tgt.identity[F.obj_map[a]]:
            failures.append(("identity", (src.identity[a],)))
            break
    for g, f in src.composable_pairs():
        if F.mor_map[src.comp(g, f)] != tgt.comp(F.mor_map[g], F.mor_map[f]):
            failures.append(("composition", (g, f)))
            break
    return ValidationReport(tuple(failures))


@dataclass(frozen=True)
class Span:
    apex: ObjId
    left: MorId
    right: MorId


def is_mono(c: FinCat, m: MorId) -> bool:
    a = c.dom[m]
    for x in c.objects:
        seen: set[int] = set()
        for u in c.hom(x, a):
            mu = c.comp(m, u)
            if mu in seen:
                return False
            seen.add(mu)
    return True


def is_iso(c: FinCat, m: MorId) -> bool:
    return inverse_of(c, m) is not None


def inverse_of(c: FinCat, m: MorId) -> MorId | None:
    a, b = c.dom[m], c.cod[m]
    for v in c.hom(b, a):
        if c.comp(v, m) == c.identity[a] and c.comp(m, v) == c.identity[b]:
            return v
    return None


def _cones(c: FinCat, f: MorId, m: MorId) -> list[tuple[int, int, int]]:
    out = []
    for p in c.objects:
        for u in c.hom(p, c.dom[f]):
            fu = c.comp(f, u)
            for v in c.hom(p, c.dom[m]):
                if c.comp(m, v) == fu:
                    out.append((p, u, v))
    return out


def pullback(c: FinCat, f: MorId, m: MorId) -> Span | None:
    """Pullback of ``f`` and ``m`` by exhaustive cone search.

    The result's ``left`` leg lies over ``dom(f)`` and its ``right`` leg over
    ``dom(m)``. Among all universal cones the lexicographically least
    ``(apex, left, right)`` is returned; ``None`` if no cone is universal.
    """
    if c.cod[f] != c.cod[m]:
        raise CategoryError(f"pullback needs a cospan: cod({f}) != cod({m})")
    cones = _cones(c, f, m)
    for p, u, v in cones:
        if all(
            sum(1 for w in c.hom(q, p) if c.comp(u, w) == u2 and c.comp(v, w) == v2) == 1
            for q, u2, v2 in cones
        ):
            return Span(p, u, v)
    return None


def span_isomorphism(c: FinCat, s: Span, t: Span) -> MorId | None:
    """An iso ``w: s.apex -> t.apex`` with ``t.left∘w == s.left`` and ``t.right∘w == s.right``."""
    for w in c.hom(s.apex, t.apex):
        if c.comp(t.left, w) == s.left and c.comp(t.right, w) == s.right and is_iso(c, w):
            return w
    return None


def relabel(c: FinCat, obj_perm: Sequence[int], mor_perm: Sequence[int]) -> tuple[FinCat, FinFunctor]:
    """Renumber ``c`` so that object ``a`` becomes ``obj_perm[a]`` and morphism
    ``m`` becomes ``mor_perm[m]``. Returns the copy and the iso ``c -> copy``."""
    m = c.n_morphisms
    inv = [0] * m
    for old, new in enumerate(mor_perm):
        inv[new] = old
    oinv = [0] * c.n_objects
    for old, new in enumerate(obj_perm):
        oinv[new] = old
    dom = tuple(obj_perm[c.dom[inv[k]]] for k in range(m))
    cod = tuple(obj_perm[c.cod[inv[k]]] for k in range(m))
    ident = tuple(mor_perm[c.identity[oinv[a]]] for a in range(c.n_objects))
    table = {(mor_perm[g], mor_perm[f]): mor_perm[h] for (g, f), h in c.table.items()}
    ol = tuple(c.obj_labels[oinv[a]] for a in range(c.n_objects)) if c.obj_labels else ()
    ml = tuple(c.mor_labels[inv[k]] for k in range(m)) if c.mor_labels else ()
    d = FinCat(dom, cod, ident, table, ol, ml)
    return d, FinFunctor(c, d, tuple(obj_perm), tuple(mor_perm))


def search_functors(
    source: FinCat,
    target: FinCat,
    obj_map: Sequence[int],
    candidates: Mapping[int, Iterable[int]] | None = None,
    *,
    injective: bool = False,
    restriction: bool = False,
    limit: int | None = None,
) -> Iterator[FinFunctor]:
    """Enumerate every functor ``source -> target`` with the given object map.

    ``candidates`` optionally narrows the allowed images per morphism. With
    ``restriction=True`` both categories must carry ``bar`` and images must
    satisfy ``F(bar f) == bar(F f)``. Backtracking with forward propagation
    of forced composites; every solution is fully re-validated.
    """
    n = source.n_morphisms
    doms: list[set[int]] = []
    for x in source.morphisms:
        allowed = set(target.hom(obj_map[source.dom[x]], obj_map[source.cod[x]]))
        if candidates is not None and x in candidates:
            allowed &= set(candidates[x])
        if source.is_identity(x):
            allowed &= {target.identity[obj_map[source.dom[x]]]}
        doms.append(allowed)
    if any(not d for d in doms):
        return

    triples_of: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
    for g, f in source.composable_pairs():
        t = (g, f, source.comp(g, f))
        for v in set(t):
            triples_of[v].append(t)
    sbar = getattr(source, "bar", None) if restriction else None
    tbar = getattr(target, "bar", None) if restriction else None
    if restriction and (sbar is None or tbar is None):
        raise CategoryError("restriction search needs restriction categories")
    bar_users: list[list[int]] = [[] for _ in range(n)]
    if sbar is not None:
        for x in source.morphisms:
            bar_users[sbar[x]].append(x)

    assign: list[int] = [-1] * n
    used: set[int] = set()
    tcomp = target._dense
    found = 0
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 10 * n + 1000))

    def consistent_set(x: int, v: int, trail: list[int]) -> bool:
        # assign x := v and propagate consequences; record assigned vars in trail
        stack = [(x, v)]
        while stack:
            x, v = stack.pop()
            if assign[x] >= 0:
                if assign[x] != v:
                    return False
                continue
            if v not in doms[x] or (injective and v in used):
                return False
            assign[x] = v
            trail.append(x)
            if injective:
                used.add(v)
            for g, f, gf in triples_of[x]:
                ag, af, agf = assign[g], assign[f], assign[gf]
                if ag >= 0 and af >= 0:
                    want = tcomp[ag][af]
                    if agf >= 0:
                        if agf != want:
                            return False
                    else:
                        stack.append((gf, want))
            if sbar is not None:
                stack.append((sbar[x], tbar[v]))
                for y in bar_users[x]:
                    if assign[y] >= 0 and tbar[assign[y]] != v:
                        return False
        return True

    def undo(trail: list[int]) -> None:
        for x in trail:
            if injective:
                used.discard(assign[x])
            assign[x] = -1

    def rec() -> Iterator[tuple[int, ...]]:
        best, best_size = -1, None
        for x in range(n):
            if assign[x] < 0:
                size = len(doms[x])
                if best_size is None or size < best_size:
                    best, best_size = x, size
        if best < 0:
            yield tuple(assign)
            return
        for v in sorted(doms[best]):
            trail: list[int] = []
            if consistent_set(best, v, trail):
                yield from rec()
            undo(trail)

    try:
        # identities are forced
        trail0: list[int] = []
        ok = True
        for a in source.objects:
            if not consistent_set(source.identity[a], target.identity[obj_map[a]], trail0):
                ok = False
                break
        if not ok:
            return
        for mm in rec():
            F = FinFunctor(source, target, tuple(obj_map), mm)
            if not validate_functor(F).ok:
                continue
            if sbar is not None and any(tbar[mm[x]] != mm[sbar[x]] for x in source.morphisms):
                continue
            yield F
            found += 1
            if limit is not None and found >= limit:
                return
    finally:
        sys.setrecursionlimit(old_limit)


def _object_bijections(c: FinCat, d: FinCat) -> Iterator[tuple[int, ...]]:
    n = c.n_objects
    sig_c = [sorted(len(c.hom(a, b)) for b in c.objects) + [len(c.hom(a, a))] for a in c.objects]
    sig_d = [sorted(len(d.hom(a, b)) for b in d.objects) + [len(d.hom(a, a))] for a in d.objects]
    perm = [-1] * n
    used = [False] * n

    def rec(i: int) -> Iterator[tuple[int, ...]]:
        if i == n:
            yield tuple(perm)
            return
        for j in range(n):
            if used[j] or sig_c[i] != sig_d[j]:
                continue
            if any(len(c.hom(i, k)) != len(d.hom(j, perm[k])) or
                   len(c.hom(k, i)) != len(d.hom(perm[k], j)) for k in range(i)):
                continue
            perm[i] = j
            used[j] = True
            yield from rec(i + 1)
            used[j] = False
            perm[i] = -1

    yield from rec(0)


def find_isomorphism(c: FinCat, d: FinCat, *, restriction: bool = False) -> FinFunctor | None:
    """Search for an isomorphism ``c -> d`` (restriction-preserving if asked)."""
    if c.n_objects != d.n_objects or c.n_morphisms != d.n_morphisms:
        return None
    for objs in _object_bijections(c, d):
        for F in search_functors(c, d, objs, injective=True, restriction=restriction, limit=1):
            return F
    return None


def is_isomorphism(F: FinFunctor) -> bool:
    return (
        validate_functor(F).ok
        and sorted(F.obj_map) == list(F.target.objects)
        and sorted(F.mor_map) == list(F.target.morphisms)
    )
