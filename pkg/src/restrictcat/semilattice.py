"""Finite meet-semilattices with top, stable maps between them, open maps
and their local left adjoints, frames, Beck-Chevalley squares, and finite
fragments of the opposite of the category of semilattices and stable maps."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .core import CategoryError, FinFunctor, ValidationReport, concrete_category
from .restriction import RestrictionCat


@dataclass(frozen=True)
class MeetSemilattice:
    """Elements are ``0..n-1``; ``le[a][b]`` is ``a <= b``; ``meet[a][b]`` is the meet."""

    le: tuple[tuple[bool, ...], ...]
    meet: tuple[tuple[int, ...], ...]
    top: int
    labels: tuple[str, ...] = field(default=(), compare=False)

    @property
    def size(self) -> int:
        return len(self.le)

    @property
    def elements(self) -> range:
        return range(self.size)

    def leq(self, a: int, b: int) -> bool:
        return self.le[a][b]

    def meet_all(self, xs: Iterable[int]) -> int:
        out = self.top
        for x in xs:
            out = self.meet[out][x]
        return out

    @cached_property
    def bottom(self) -> int:
        return self.meet_all(self.elements)

    def downset(self, b: int) -> tuple[int, ...]:
        return tuple(x for x in self.elements if self.le[x][b])

    def upper_bounds(self, xs: Iterable[int]) -> tuple[int, ...]:
        xs = tuple(xs)
        return tuple(u for u in self.elements if all(self.le[x][u] for x in xs))

    def join(self, a: int, b: int) -> int:
        """Least upper bound; always exists in a finite semilattice with top."""
        return self.meet_all(self.upper_bounds((a, b)))

    def join_all(self, xs: Iterable[int]) -> int:
        return self.meet_all(self.upper_bounds(xs))

    def name(self, a: int) -> str:
        return self.labels[a] if self.labels else str(a)


def from_order(le: Sequence[Sequence[bool]], labels: Sequence[str] = ()) -> MeetSemilattice:
    """Build a semilattice from its order, computing meets as greatest lower bounds."""
    n = len(le)
    le_t = tuple(tuple(bool(x) for x in row) for row in le)
    tops = [t for t in range(n) if all(le_t[a][t] for a in range(n))]
    if len(tops) != 1:
        raise CategoryError("order has no unique top element")
    meet = []
    for a in range(n):
        row = []
        for b in range(n):
            lbs = [x for x in range(n) if le_t[x][a] and le_t[x][b]]
            glb = [x for x in lbs if all(le_t[y][x] for y in lbs)]
            if len(glb) != 1:
                raise CategoryError(f"elements {a} and {b} have no meet")
            row.append(glb[0])
        meet.append(tuple(row))
    return MeetSemilattice(le_t, tuple(meet), tops[0], tuple(labels))


def chain(n: int) -> MeetSemilattice:
    """``0 < 1 < ... < n-1``."""
    if n < 1:
        raise CategoryError("a chain needs at least one element")
    return from_order([[a <= b for b in range(n)] for a in range(n)])


def powerset(k: int) -> MeetSemilattice:
    """Subsets of a ``k``-set; element ``i`` is the subset with bitmask ``i``."""
    n = 1 << k
    labels = ["{" + ",".join(str(j) for j in range(k) if i >> j & 1) + "}" for i in range(n)]
    return from_order([[(a & b) == a for b in range(n)] for a in range(n)], labels)


def m3() -> MeetSemilattice:
    """The diamond: bottom 0, atoms 1, 2, 3, top 4."""
    rel = {(0, x) for x in range(5)} | {(x, 4) for x in range(5)} | {(x, x) for x in range(5)}
    return from_order([[(a, b) in rel for b in range(5)] for a in range(5)])


def n5() -> MeetSemilattice:
    """The pentagon: 0 < 1 < 2 < 4 and 0 < 3 < 4."""
    cover = {(0, 1), (1, 2), (2, 4), (0, 3), (3, 4)}
    return from_order(_closure(5, cover))


def _closure(n: int, rel: set[tuple[int, int]]) -> list[list[bool]]:
    le = [[a == b or (a, b) in rel for b in range(n)] for a in range(n)]
    for k in range(n):
        for i in range(n):
            if le[i][k]:
                for j in range(n):
                    if le[k][j]:
                        le[i][j] = True
    return le


def downset_lattice(L: MeetSemilattice, b: int) -> tuple[MeetSemilattice, tuple[int, ...]]:
    """``L/b`` as a semilattice with top ``b``, plus the embedding into ``L``."""
    elems = L.downset(b)
    sub = [[L.le[x][y] for y in elems] for x in elems]
    labels = tuple(L.name(x) for x in elems) if L.labels else ()
    return from_order(sub, labels), elems


def _canonical_form(le: Sequence[Sequence[bool]]) -> tuple:
    n = len(le)
    return min(
        tuple(le[p[i]][p[j]] for i in range(n) for j in range(n))
        for p in itertools.permutations(range(n))
    )


def all_lattices(n: int) -> list[MeetSemilattice]:
    """Every lattice with ``n`` elements up to isomorphism (practical for n <= 7)."""
    if n < 1:
        return []
    if n == 1:
        return [chain(1)]
    inner = n - 2
    pairs = [(i, j) for i in range(inner) for j in range(i + 1, inner)]
    seen: set[tuple] = set()
    out = []
    for bits in range(1 << len(pairs)):
        rel = {(i + 1, j + 1) for k, (i, j) in enumerate(pairs) if bits >> k & 1}
        rel |= {(0, x) for x in range(n)} | {(x, n - 1) for x in range(n)}
        le = [[a == b or (a, b) in rel for b in range(n)] for a in range(n)]
        if le != _closure(n, rel):
            continue
        try:
            L = from_order(le)
        except CategoryError:
            continue
        key = _canonical_form(le)
        if key in seen:
            continue
        seen.add(key)
        out.append(L)
    return out


def validate_semilattice(L: MeetSemilattice) -> ValidationReport:
    n = L.size
    failures: list[tuple[str, tuple[int, ...]]] = []
    if any(len(r) != n for r in L.le) or len(L.meet) != n or any(len(r) != n for r in L.meet):
        return ValidationReport((("structure.shape", ()),))
    if not 0 <= L.top < n or any(not 0 <= x < n for r in L.meet for x in r):
        return ValidationReport((("structure.dangling_element", ()),))

    def first(name: str, it: Iterator[tuple[int, ...]]) -> None:
        w = next(it, None)
        if w is not None:
            failures.append((name, w))

    el = range(n)
    first("reflexive", ((a,) for a in el if not L.le[a][a]))
    first("antisymmetric", ((a, b) for a in el for b in el if a != b and L.le[a][b] and L.le[b][a]))
    first("transitive", ((a, b, c) for a in el for b in el for c in el
                         if L.le[a][b] and L.le[b][c] and not L.le[a][c]))
    first("top", ((a,) for a in el if not L.le[a][L.top]))

    def not_glb(a: int, b: int) -> bool:
        m = L.meet[a][b]
        if not (L.le[m][a] and L.le[m][b]):
            return True
        return any(L.le[x][a] and L.le[x][b] and not L.le[x][m] for x in el)

    first("meet", ((a, b) for a in el for b in el if not_glb(a, b)))
    return ValidationReport(tuple(failures))


@dataclass(frozen=True)
class StableMap:
    """A monotone map preserving binary meets; the top need not be preserved."""

    source: MeetSemilattice
    target: MeetSemilattice
    mapping: tuple[int, ...]

    def __call__(self, a: int) -> int:
        return self.mapping[a]

    @property
    def top_image(self) -> int:
        return self.mapping[self.source.top]

    @property
    def is_total(self) -> bool:
        return self.top_image == self.target.top


def identity_map(L: MeetSemilattice) -> StableMap:
    return StableMap(L, L, tuple(L.elements))


def compose_maps(g: StableMap, f: StableMap) -> StableMap:
    """``g∘f`` as functions."""
    return StableMap(f.source, g.target, tuple(g.mapping[f.mapping[a]] for a in f.source.elements))


def meet_with(L: MeetSemilattice, c: int) -> StableMap:
    """``a -> a ∧ c``."""
    return StableMap(L, L, tuple(L.meet[a][c] for a in L.elements))


def validate_stable(h: StableMap) -> ValidationReport:
    L, M = h.source, h.target
    if len(h.mapping) != L.size or any(not 0 <= x < M.size for x in h.mapping):
        return ValidationReport((("structure.mapping", ()),))
    failures: list[tuple[str, tuple[int, ...]]] = []
    for a in L.elements:
        bad = next((b for b in L.elements if L.le[a][b] and not M.le[h(a)][h(b)]), None)
        if bad is not None:
            failures.append(("monotone", (a, bad)))
            break
    for a in L.elements:
        bad = next((b for b in L.elements if h(L.meet[a][b]) != M.meet[h(a)][h(b)]), None)
        if bad is not None:
            failures.append(("meet", (a, bad)))
            break
    return ValidationReport(tuple(failures))


def stable_maps(L: MeetSemilattice, M: MeetSemilattice, top_preserving: bool = False) -> list[StableMap]:
    """All stable maps ``L -> M``, in lexicographic order of their tables."""
    n = L.size
    # assign in an order where each element comes after everything above it,
    # so monotonicity and meets can be checked as soon as both ends are known
    order = sorted(L.elements, key=lambda a: -sum(L.le[a]))
    pos = {a: i for i, a in enumerate(order)}
    checks: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for a in L.elements:
        for b in L.elements:
            last = max(pos[a], pos[b], pos[L.meet[a][b]])
            checks[last].append((a, b))
    h = [-1] * n
    out: list[tuple[int, ...]] = []

    def rec(i: int) -> None:
        if i == n:
            out.append(tuple(h))
            return
        a = order[i]
        choices = [M.top] if (top_preserving and a == L.top) else M.elements
        for v in choices:
            h[a] = v
            if all(h[L.meet[x][y]] == M.meet[h[x]][h[y]] for x, y in checks[i]):
                rec(i + 1)
        h[a] = -1

    rec(0)
    return [StableMap(L, M, t) for t in sorted(out)]


def stab_op_bar(h: StableMap) -> StableMap:
    """Restriction of ``h`` read as an arrow of the opposite category: the
    endomap ``a -> a ∧ h(top)`` of ``h``'s target semilattice."""
    return meet_with(h.target, h.top_image)


def is_order_isomorphism(h: StableMap) -> bool:
    L, M = h.source, h.target
    if L.size != M.size or len(set(h.mapping)) != L.size:
        return False
    return all(L.le[a][b] == M.le[h(a)][h(b)] for a in L.elements for b in L.elements)


@dataclass(frozen=True)
class LocalAdjoint:
    """Left adjoint ``f: M/g(top) -> L`` of a stable map ``g: L -> M``.

    ``mapping[b]`` is defined exactly for ``b <= g(top)``.
    """

    of: StableMap
    mapping: Mapping[int, int]
    frobenius: bool

    def __call__(self, b: int) -> int:
        return self.mapping[b]

    @property
    def domain(self) -> tuple[int, ...]:
        return tuple(sorted(self.mapping))


def _adjunction_holds(g: StableMap, f: Mapping[int, int]) -> bool:
    L, M = g.source, g.target
    return all(L.le[f[b]][a] == M.le[b][g(a)] for b in f for a in L.elements)


def _frobenius_holds(g: StableMap, f: Mapping[int, int]) -> bool:
    L, M = g.source, g.target
    return all(
        f[M.meet[g(a)][b]] == L.meet[a][f[b]]
        for a in L.elements for b in f
    )


def local_left_adjoint(g: StableMap) -> LocalAdjoint | None:
    """Candidate ``f(b) = meet{a | b <= g(a)}`` on ``M/g(top)``; returned only
    when it really is left adjoint. ``frobenius`` then reports reciprocity."""
    L, M = g.source, g.target
    t = g.top_image
    f = {b: L.meet_all(a for a in L.elements if M.le[b][g(a)]) for b in M.downset(t)}
    if not _adjunction_holds(g, f):
        return None
    return LocalAdjoint(g, f, _frobenius_holds(g, f))


def all_local_left_adjoints(g: StableMap) -> list[dict[int, int]]:
    """Every monotone ``f: M/g(top) -> L`` satisfying the adjunction, found by
    testing each candidate value independently (no meet formula involved)."""
    L, M = g.source, g.target
    dom = M.downset(g.top_image)
    options = []
    for b in dom:
        ok = [x for x in L.elements
              if all(L.le[x][a] == M.le[b][g(a)] for a in L.elements)]
        options.append(ok)
    out = []
    for combo in itertools.product(*options):
        f = dict(zip(dom, combo))
        if all(L.le[f[b]][f[c]] for b in dom for c in dom if M.le[b][c]):
            out.append(f)
    return out


def is_open(g: StableMap) -> bool:
    adj = local_left_adjoint(g)
    return adj is not None and adj.frobenius


def is_frame(L: MeetSemilattice) -> bool:
    """Finite case: bottom exists (always) and binary meets distribute over joins."""
    el = L.elements
    return all(
        L.meet[a][L.join(b, c)] == L.join(L.meet[a][b], L.meet[a][c])
        for a in el for b in el for c in el
    )


def join_failure(h: StableMap) -> tuple[int, ...] | None:
    """First subset ``S`` (as a tuple) with ``h(join S) != join h(S)``."""
    L, M = h.source, h.target
    if not (is_frame(L) and is_frame(M)):
        raise CategoryError("join preservation is only defined between frames")
    for r in range(0, L.size + 1):
        for S in itertools.combinations(L.elements, r):
            if h(L.join_all(S)) != M.join_all(h(x) for x in S):
                return S
    return None


def preserves_joins(h: StableMap) -> bool:
    return join_failure(h) is None


@dataclass(frozen=True)
class StabSquare:
    """A square of stable maps::

        A --top--> B
        |          |
       left      right
        v          v
        C -bottom-> D
    """

    top: StableMap
    left: StableMap
    right: StableMap
    bottom: StableMap

    def commutes(self) -> bool:
        return compose_maps(self.right, self.top) == compose_maps(self.bottom, self.left)


def beck_chevalley_failure(sq: StabSquare) -> str | None:
    """Reason the square is not Beck-Chevalley, or None if it is."""
    if not sq.commutes():
        raise CategoryError("square does not commute")
    if not sq.left.is_total:
        return "left_not_total"
    if not sq.right.is_total:
        return "right_not_total"
    h_adj = local_left_adjoint(sq.top)
    if h_adj is None or not h_adj.frobenius:
        return "top_not_open"
    k_adj = local_left_adjoint(sq.bottom)
    if k_adj is None or not k_adj.frobenius:
        return "bottom_not_open"
    # mate: left∘top_! == bottom_!∘right on B/top(⊤)
    for b in h_adj.domain:
        if sq.left(h_adj(b)) != k_adj(sq.right(b)):
            return "mate"
    return None


def beck_chevalley(sq: StabSquare) -> bool:
    return beck_chevalley_failure(sq) is None


def compose_squares_horizontal(first: StabSquare, second: StabSquare) -> StabSquare:
    """Paste ``second`` to the right of ``first`` (``first.right == second.left``)."""
    if first.right != second.left:
        raise CategoryError("squares do not share a vertical edge")
    return StabSquare(
        compose_maps(second.top, first.top),
        first.left,
        second.right,
        compose_maps(second.bottom, first.bottom),
    )


# ---------------------------------------------------------------------------
# finite fragments of Stab^op


@dataclass(frozen=True)
class StabOpCat(RestrictionCat):
    """A finite restriction category whose arrow ``m: X -> Y`` is the stable
    map ``maps[m]: lattices[Y] -> lattices[X]``; bar is ``a -> a ∧ m(top)``."""

    lattices: tuple[MeetSemilattice, ...] = ()
    maps: tuple[StableMap, ...] = ()

    @cached_property
    def _index(self) -> dict[tuple[int, int, tuple[int, ...]], int]:
        return {(self.dom[m], self.cod[m], self.maps[m].mapping): m for m in self.morphisms}

    def find(self, x: int, y: int, mapping: Sequence[int]) -> int | None:
        return self._index.get((x, y, tuple(mapping)))

    def arrow(self, x: int, y: int, mapping: Sequence[int]) -> int:
        m = self.find(x, y, mapping)
        if m is None:
            raise CategoryError(f"stable map {tuple(mapping)} not in fragment hom({x}, {y})")
        return m


def stab_op_category(
    lattices: Sequence[MeetSemilattice],
    arrows: Iterable[tuple[int, int, Sequence[int]]],
    labels: Sequence[str] = (),
    *,
    close: bool = True,
) -> StabOpCat:
    """Finite sub-restriction-category of Stab^op on ``lattices``.

    ``arrows`` are ``(x, y, mapping)`` with ``mapping: lattices[y] -> lattices[x]``.
    Identities are added, and with ``close`` the set is closed under
    composition and bar.
    """
    lattices = tuple(lattices)
    keys: set[tuple[int, int, tuple[int, ...]]] = set()
    for x, L in enumerate(lattices):
        keys.add((x, x, tuple(L.elements)))
    for x, y, mp in arrows:
        mp = tuple(mp)
        if len(mp) != lattices[y].size or any(not 0 <= v < lattices[x].size for v in mp):
            raise CategoryError(f"mapping for arrow {x}->{y} has the wrong shape")
        keys.add((x, y, mp))

    def bar_key(k):
        x, _, mp = k
        L = lattices[x]
        t = mp[lattices[k[1]].top]
        return (x, x, tuple(L.meet[a][t] for a in L.elements))

    def comp_key(gk, fk):
        # f: x->y (L_y -> L_x), g: y->z (L_z -> L_y); g∘f is L_z -> L_x
        fx, _, fm = fk
        _, gz, gm = gk
        return (fx, gz, tuple(fm[v] for v in gm))

    if close:
        frontier = list(keys)
        while frontier:
            new = set()
            for k in frontier:
                b = bar_key(k)
                if b not in keys:
                    new.add(b)
            by_dom: dict[int, list] = {}
            by_cod: dict[int, list] = {}
            for k in keys | new:
                by_dom.setdefault(k[0], []).append(k)
                by_cod.setdefault(k[1], []).append(k)
            for k in frontier:
                for g in by_dom.get(k[1], ()):
                    c = comp_key(g, k)
                    if c not in keys:
                        new.add(c)
                for f in by_cod.get(k[0], ()):
                    c = comp_key(k, f)
                    if c not in keys:
                        new.add(c)
            new -= keys
            keys |= new
            frontier = list(new)
    ordered = sorted(keys)
    idents = [tuple(L.elements) for L in lattices]
    obj_labels = tuple(labels) if labels else tuple(f"L{x}" for x in range(len(lattices)))
    cat, index = concrete_category(
        obj_labels,
        ordered,
        idents,
        lambda g, f: tuple(f[v] for v in g),
        lambda x, y, mp: f"{obj_labels[x]}<-{obj_labels[y]}:" + ",".join(map(str, mp)),
    )
    bar = [index[bar_key(k)] for k in ordered]
    maps = tuple(StableMap(lattices[y], lattices[x], mp) for x, y, mp in ordered)
    return StabOpCat(cat.dom, cat.cod, cat.identity, cat.table, cat.obj_labels,
                     cat.mor_labels, tuple(bar), lattices, maps)


def full_stab_op(lattices: Sequence[MeetSemilattice], *, joins_only: bool = False) -> StabOpCat:
    """All stable maps between the given semilattices (join-preserving ones
    only, if asked, for frames)."""
    arrows = []
    for x, Lx in enumerate(lattices):
        for y, Ly in enumerate(lattices):
            for h in stable_maps(Ly, Lx):
                if joins_only and not preserves_joins(h):
                    continue
                arrows.append((x, y, h.mapping))
    return stab_op_category(lattices, arrows, close=False)


def retarget(F: FinFunctor, target: StabOpCat, embed: Sequence[int] | None = None) -> FinFunctor:
    """Re-express a functor into a Stab^op fragment as a functor into a larger
    fragment ``target``. ``embed[x]`` is the object of ``target`` standing for
    object ``x`` of the old target (default: same numbering)."""
    old = F.target
    if not isinstance(old, StabOpCat):
        raise CategoryError("functor target is not a Stab^op fragment")
    emb = tuple(embed) if embed is not None else tuple(old.objects)
    for x in old.objects:
        if target.lattices[emb[x]] != old.lattices[x]:
            raise CategoryError(f"object {x} is not carried to an equal semilattice")
    mors = tuple(
        target.arrow(emb[old.dom[m]], emb[old.cod[m]], old.maps[m].mapping) for m in F.mor_map
    )
    return FinFunctor(F.source, target, tuple(emb[x] for x in F.obj_map), mors)
