"""Constructors for standard restriction categories and a seeded generator
of random sub-restriction-categories."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import (
    CategoryError,
    FinCat,
    FinFunctor,
    concrete_category,
    is_iso,
    is_mono,
    pullback,
    validate_category,
)
from .restriction import RestrictionCat, trivial_bar, verify_restriction
from .semilattice import MeetSemilattice, StabOpCat, full_stab_op, is_frame

MAX_SET_SIZE = 4
MAX_MORPHISMS = 2000
MAX_LATTICE_SIZE = 6
MAX_LATTICES = 3


@dataclass(frozen=True)
class Built:
    """Builder output. ``data[m]`` is the concrete value behind morphism ``m``
    (e.g. a partial function's graph), when there is one."""

    rc: RestrictionCat
    join: object | None = None
    range: object | None = None
    data: tuple = ()
    inclusion: FinFunctor | None = None


def _check(rc: RestrictionCat) -> RestrictionCat:
    rep = validate_category(rc)
    if not rep.ok:
        raise CategoryError(f"builder produced an invalid category: {rep.failures}")
    ax = verify_restriction(rc)
    if not ax.ok:
        raise CategoryError(f"builder produced an invalid restriction structure: {ax.failures}")
    return rc


# ---------------------------------------------------------------------------
# partial functions


def partial_functions(m: int, n: int) -> list[tuple[int, ...]]:
    """Graphs of partial functions ``m -> n``; ``-1`` marks undefined."""
    return [tuple(t) for t in itertools.product(range(-1, n), repeat=m)]


def compose_partial(g: Sequence[int], f: Sequence[int]) -> tuple[int, ...]:
    return tuple(-1 if x < 0 else g[x] for x in f)


def domain_of(f: Sequence[int]) -> tuple[int, ...]:
    return tuple(i if x >= 0 else -1 for i, x in enumerate(f))


def image_of(f: Sequence[int], n: int) -> tuple[int, ...]:
    im = set(x for x in f if x >= 0)
    return tuple(j if j in im else -1 for j in range(n))


def union_of(f: Sequence[int], g: Sequence[int]) -> tuple[int, ...]:
    return tuple(a if a >= 0 else b for a, b in zip(f, g))


def set_p_estimate(sizes: Sequence[int]) -> int:
    return sum((n + 1) ** m for m in sizes for n in sizes)


def _partial_category(sizes: Sequence[int], injective: bool, prefix: str):
    arrows = []
    for a, m in enumerate(sizes):
        for b, n in enumerate(sizes):
            for f in partial_functions(m, n):
                vals = [x for x in f if x >= 0]
                if injective and len(vals) != len(set(vals)):
                    continue
                arrows.append((a, b, f))
    idents = [tuple(range(m)) for m in sizes]
    labels = tuple(f"{prefix}{a}" for a in range(len(sizes)))

    def label(a, b, f):
        return "[" + ",".join("-" if x < 0 else str(x) for x in f) + "]" + f":{a}>{b}"

    cat, index = concrete_category(labels, arrows, idents, compose_partial, label)
    keys = sorted(index, key=index.get)
    return cat, index, keys


def build_set_p(sizes: Sequence[int]) -> Built:
    """Finite sets of the given sizes and all partial functions, with union
    joins and image ranges."""
    from .join import JoinStructure
    from .ranges import RangeStructure

    sizes = list(sizes)
    if not sizes:
        raise CategoryError("need at least one object")
    if any(s < 0 or s > MAX_SET_SIZE for s in sizes):
        raise CategoryError(f"set sizes must lie in 0..{MAX_SET_SIZE}")
    est = set_p_estimate(sizes)
    if est > MAX_MORPHISMS:
        raise CategoryError(f"too large: {est} morphisms (limit {MAX_MORPHISMS})")
    cat, index, keys = _partial_category(sizes, False, "S")
    bar = [index[(a, a, domain_of(f))] for a, _, f in keys]
    rc = _check(RestrictionCat.of(cat, bar))
    hat = tuple(index[(b, b, image_of(f, sizes[b]))] for _, b, f in keys)
    pairs = {}
    for (a, b, f) in keys:
        for g in rc.hom(a, b):
            gf = keys[g][2]
            if all(x < 0 or y < 0 or x == y for x, y in zip(f, gf)):
                pairs[(index[(a, b, f)], g)] = index[(a, b, union_of(f, gf))]
    bottoms = {(a, b): index[(a, b, (-1,) * sizes[a])] for a in rc.objects for b in rc.objects}
    return Built(rc, JoinStructure(rc, pairs, bottoms), RangeStructure(rc, hat),
                 tuple(f for _, _, f in keys))


def build_inverse_symmetric(n: int) -> Built:
    """One object; all partial injections of an ``n``-set."""
    from .ranges import RangeStructure

    if not 0 <= n <= MAX_SET_SIZE:
        raise CategoryError(f"n must lie in 0..{MAX_SET_SIZE}")
    cat, index, keys = _partial_category([n], True, "I")
    bar = [index[(0, 0, domain_of(f))] for _, _, f in keys]
    hat = tuple(index[(0, 0, image_of(f, n))] for _, _, f in keys)
    rc = _check(RestrictionCat.of(cat, bar))
    return Built(rc, None, RangeStructure(rc, hat), tuple(f for _, _, f in keys))


# ---------------------------------------------------------------------------
# total functions and spans


def build_finset(sizes: Sequence[int]) -> tuple[FinCat, tuple]:
    """Finite sets and total functions; returns the category and the graphs."""
    arrows = []
    for a, m in enumerate(sizes):
        for b, n in enumerate(sizes):
            for f in itertools.product(range(n), repeat=m):
                arrows.append((a, b, tuple(f)))
    idents = [tuple(range(m)) for m in sizes]
    labels = tuple(f"F{a}" for a in range(len(sizes)))
    cat, index = concrete_category(
        labels, arrows, idents, compose_partial,
        lambda a, b, f: "(" + ",".join(map(str, f)) + f"):{a}>{b}",
    )
    keys = sorted(index, key=index.get)
    return cat, tuple(f for _, _, f in keys)


def injective_morphisms(c: FinCat) -> frozenset[int]:
    return frozenset(m for m in c.morphisms if is_mono(c, m))


def _check_mono_class(D: FinCat, M: frozenset[int]) -> None:
    for a in D.objects:
        if D.identity[a] not in M:
            raise CategoryError(f"class misses the identity of object {a}")
    for m in sorted(M):
        if not is_mono(D, m):
            raise CategoryError(f"morphism {m} is not monic")
    for f in sorted(M):
        for g in sorted(M):
            if D.cod[f] == D.dom[g] and D.comp(g, f) not in M:
                raise CategoryError(f"class not closed under composition: {g}∘{f}")
    for m in sorted(M):
        for f in D.into(D.cod[m]):
            pb = pullback(D, f, m)
            if pb is None or pb.left not in M:
                raise CategoryError(f"pullback of {m} along {f} missing or not in class")


def build_par(D: FinCat, M: Iterable[int]) -> Built:
    """Partial maps in ``D`` with domains in ``M``: iso classes of spans
    ``(m, g)`` with ``m`` in ``M``, composed by pullback."""
    M = frozenset(M)
    if D.n_morphisms > 400:
        raise CategoryError("ambient category too large")
    _check_mono_class(D, M)

    spans: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
    for m in sorted(M):
        for g in D.out_of(D.dom[m]):
            spans.setdefault((D.cod[m], D.cod[g]), []).append((D.dom[m], m, g))
    canon: dict[tuple[int, int, int], tuple[int, int, int]] = {}
    for (a, b), lst in spans.items():
        lst.sort()
        for s in lst:
            if s in canon:
                continue
            canon[s] = s
            x, m, g = s
            for t in lst:
                if t in canon:
                    continue
                y, m2, g2 = t
                if any(D.comp(m, w) == m2 and D.comp(g, w) == g2 and is_iso(D, w) for w in D.hom(y, x)):
                    canon[t] = s
    reps = sorted({(D.cod[m], D.cod[g], s) for s in set(canon.values()) for (_, m, g) in [s]})

    def compose(second, first):
        _, m, g = first
        _, n, h = second
        pb = pullback(D, g, n)
        if pb is None:
            raise CategoryError(f"no pullback of {n} along {g}")
        s = (pb.apex, D.comp(m, pb.left), D.comp(h, pb.right))
        return canon[s]

    idents = [canon[(a, D.identity[a], D.identity[a])] for a in D.objects]
    cat, index = concrete_category(
        tuple(D.obj_name(a) for a in D.objects),
        reps,
        idents,
        compose,
        lambda a, b, s: f"({D.mor_name(s[1])},{D.mor_name(s[2])})",
    )
    bar = [index[(a, a, canon[(s[0], s[1], s[1])])] for a, _, s in reps]
    rc = _check(RestrictionCat.of(cat, bar))
    return Built(rc, None, None, tuple(s for _, _, s in reps))


# ---------------------------------------------------------------------------
# semilattices, trivial structures, groups


def build_stab_op(lattices: Sequence[MeetSemilattice], join: bool = False) -> Built:
    """All stable maps between the given semilattices, read contravariantly.
    With ``join`` (all lattices must be frames) only join-preserving maps are
    kept and pointwise joins are attached."""
    from .join import stab_join_structure

    if len(lattices) > MAX_LATTICES or any(L.size > MAX_LATTICE_SIZE for L in lattices):
        raise CategoryError(f"at most {MAX_LATTICES} lattices of at most {MAX_LATTICE_SIZE} elements")
    if join and not all(is_frame(L) for L in lattices):
        raise CategoryError("join structure needs every lattice to be a frame")
    stab = full_stab_op(lattices, joins_only=join)
    _check(stab)
    js = stab_join_structure(stab) if join else None
    return Built(stab, js, None, tuple(stab.maps))


def build_trivial(c: FinCat) -> Built:
    """Every map total."""
    rep = validate_category(c)
    if not rep.ok:
        raise CategoryError(f"invalid category: {rep.failures}")
    rc = _check(RestrictionCat.of(c, trivial_bar(c)))
    return Built(rc)


def monoid_category(table: Sequence[Sequence[int]], unit: int = 0) -> FinCat:
    """One-object category from a multiplication table ``table[g][f] = g∘f``."""
    n = len(table)
    return FinCat((0,) * n, (0,) * n, (unit,),
                  {(g, f): table[g][f] for g in range(n) for f in range(n)},
                  ("*",), tuple(f"x{i}" for i in range(n)))


def group_category(n: int) -> FinCat:
    """The cyclic group of order ``n`` as a one-object category."""
    return monoid_category([[(g + f) % n for f in range(n)] for g in range(n)])


def point_category() -> FinCat:
    return FinCat((0,), (0,), (0,), {(0, 0): 0}, ("*",), ("1",))


# ---------------------------------------------------------------------------
# substructures


def generated_subcategory(
    rc: RestrictionCat,
    generators: Iterable[int],
    objects: Iterable[int] = (),
    *,
    max_morphisms: int | None = None,
) -> tuple[RestrictionCat, FinFunctor]:
    """Smallest sub-restriction-category containing the generators and the
    identities of ``objects``; returns it with its inclusion."""
    gens = set(generators)
    objs = set(objects)
    for g in gens:
        objs.add(rc.dom[g])
        objs.add(rc.cod[g])
    mors = {rc.identity[a] for a in objs} | gens
    frontier = list(mors)
    while frontier:
        new = set()
        for f in frontier:
            if rc.bar[f] not in mors:
                new.add(rc.bar[f])
        for f in frontier:
            for g in list(mors | new):
                if rc.cod[f] == rc.dom[g]:
                    h = rc.comp(g, f)
                    if h not in mors:
                        new.add(h)
                if rc.cod[g] == rc.dom[f]:
                    h = rc.comp(f, g)
                    if h not in mors:
                        new.add(h)
        new -= mors
        mors |= new
        frontier = list(new)
        if max_morphisms is not None and len(mors) > max_morphisms:
            raise CategoryError("closure exceeds the morphism bound")
    return restrict_to(rc, sorted(objs), sorted(mors))


def restrict_to(rc: RestrictionCat, objs: Sequence[int], mors: Sequence[int]) -> tuple[RestrictionCat, FinFunctor]:
    """Sub-restriction-category on given ids (assumed closed); renumbered densely."""
    opos = {a: i for i, a in enumerate(objs)}
    mpos = {m: i for i, m in enumerate(mors)}
    dom = tuple(opos[rc.dom[m]] for m in mors)
    cod = tuple(opos[rc.cod[m]] for m in mors)
    ident = tuple(mpos[rc.identity[a]] for a in objs)
    table = {}
    for f in mors:
        for g in mors:
            if rc.cod[f] == rc.dom[g]:
                table[(mpos[g], mpos[f])] = mpos[rc.comp(g, f)]
    ol = tuple(rc.obj_labels[a] for a in objs) if rc.obj_labels else ()
    ml = tuple(rc.mor_labels[m] for m in mors) if rc.mor_labels else ()
    bar = tuple(mpos[rc.bar[m]] for m in mors)
    sub = RestrictionCat(dom, cod, ident, table, ol, ml, bar)
    return sub, FinFunctor(sub, rc, tuple(objs), tuple(mors))


@dataclass(frozen=True)
class Bounds:
    max_objects: int = 2
    max_set_size: int = 2
    max_generators: int = 3
    max_morphisms: int = 40
    ambient: str = "set_p"


def random_restriction_category(seed: int, bounds: Bounds = Bounds()) -> Built:
    """Deterministic per ``(seed, bounds)``: picks a set_p (or par) ambient,
    a few random generators, and returns the closed sub-restriction-category
    they generate together with its inclusion."""
    rng = random.Random(seed)
    k = rng.randint(1, bounds.max_objects)
    sizes = [rng.randint(0, bounds.max_set_size) for _ in range(k)]
    if bounds.ambient == "par":
        fs, _ = build_finset(sorted(set(sizes) | {0}))
        amb = build_par(fs, injective_morphisms(fs))
    else:
        amb = build_set_p(sizes)
    rc = amb.rc
    chosen = sorted(rng.sample(list(rc.objects), rng.randint(1, rc.n_objects)))
    pool = [m for m in rc.morphisms if rc.dom[m] in chosen and rc.cod[m] in chosen]
    n_gen = rng.randint(0, bounds.max_generators)
    while True:
        gens = rng.sample(pool, min(n_gen, len(pool)))
        try:
            sub, inc = generated_subcategory(rc, gens, chosen, max_morphisms=bounds.max_morphisms)
            break
        except CategoryError:
            if n_gen == 0:
                raise
            n_gen -= 1
    _check(sub)
    return Built(sub, None, None, (), inc)
