"""The fundamental functor into Stab^op, total natural transformations, the
hyperconnected and localic classes of restriction functors, their
factorisation, and the two filler constructions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .config import exhaustive_limit
from .core import (
    CategoryError,
    FinCat,
    FinFunctor,
    ValidationReport,
    compose_functors,
    functors_equal,
    concrete_category,
    inverse_of,
    search_functors,
    validate_category,
)
from .restriction import (
    RestrictionCat,
    below,
    is_restriction_functor,
    is_total,
    leq,
    require_restriction_functor,
    restriction_idempotents,
    verify_restriction,
)
from .semilattice import (
    MeetSemilattice,
    StabOpCat,
    StableMap,
    compose_maps,
    is_order_isomorphism,
    retarget,
    stab_op_category,
    stable_maps,
)


@dataclass(frozen=True)
class TotalNatTransf:
    """``components[A]: source(A) -> target(A)`` in the common target category."""

    source: FinFunctor
    target: FinFunctor
    components: tuple[int, ...]


def validate_transformation(t: TotalNatTransf) -> ValidationReport:
    S, T = t.source, t.target
    if S.source != T.source or S.target != T.target:
        return ValidationReport((("structure.not_parallel", ()),))
    C, D = S.source, S.target
    if len(t.components) != C.n_objects:
        return ValidationReport((("structure.components", (len(t.components),)),))
    failures: list[tuple[str, tuple[int, ...]]] = []
    for a in C.objects:
        c = t.components[a]
        if D.dom[c] != S.obj_map[a] or D.cod[c] != T.obj_map[a]:
            return ValidationReport((("structure.component_typing", (a,)),))
    for a in C.objects:
        if not isinstance(D, RestrictionCat) or not is_total(D, t.components[a]):
            failures.append(("total", (a,)))
            break
    for f in C.morphisms:
        a, b = C.dom[f], C.cod[f]
        if D.comp(t.components[b], S.mor_map[f]) != D.comp(T.mor_map[f], t.components[a]):
            failures.append(("naturality", (f,)))
            break
    return ValidationReport(tuple(failures))


def is_invertible(t: TotalNatTransf) -> bool:
    """Each component is an isomorphism. In a Stab^op fragment this is judged
    on the underlying stable map, since the inverse may lie outside the fragment."""
    D = t.source.target
    if isinstance(D, StabOpCat):
        return all(is_order_isomorphism(D.maps[c]) for c in t.components)
    return all(inverse_of(D, c) is not None for c in t.components)


# ---------------------------------------------------------------------------
# fundamental functor


@dataclass(frozen=True)
class FundamentalResult:
    """``lattice_of[A]`` has element ``i`` standing for ``idempotents[A][i]``."""

    stab: StabOpCat
    functor: FinFunctor
    lattice_of: tuple[MeetSemilattice, ...]
    idempotents: tuple[tuple[int, ...], ...]

    def element(self, a: int, e: int) -> int:
        return self.idempotents[a].index(e)

    def idempotent(self, a: int, i: int) -> int:
        return self.idempotents[a][i]


def idempotent_lattice(rc: RestrictionCat, a: int) -> tuple[MeetSemilattice, tuple[int, ...]]:
    """``O(A)`` ordered by ``e <= e'`` iff ``e'∘e == e``, meet by composition."""
    idem = tuple(sorted(restriction_idempotents(rc, a)))
    pos = {e: i for i, e in enumerate(idem)}
    le = tuple(tuple(rc.comp(f, e) == e for f in idem) for e in idem)
    meet = tuple(tuple(pos[rc.comp(e, f)] for f in idem) for e in idem)
    labels = tuple(rc.mor_name(e) for e in idem)
    return MeetSemilattice(le, meet, pos[rc.identity[a]], labels), idem


def fundamental_functor(rc: RestrictionCat) -> FundamentalResult:
    lattices, idems = [], []
    for a in rc.objects:
        L, idem = idempotent_lattice(rc, a)
        lattices.append(L)
        idems.append(idem)
    pos = [{e: i for i, e in enumerate(idem)} for idem in idems]
    keys = []
    for f in rc.morphisms:
        a, b = rc.dom[f], rc.cod[f]
        keys.append((a, b, tuple(pos[a][rc.bar[rc.comp(e, f)]] for e in idems[b])))
    labels = tuple(rc.obj_name(a) for a in rc.objects)
    stab = stab_op_category(lattices, keys, labels)
    F = FinFunctor(rc, stab, tuple(rc.objects), tuple(stab.arrow(*k) for k in keys))
    if not is_restriction_functor(F):
        raise CategoryError("fundamental functor failed to be a restriction functor")
    return FundamentalResult(stab, F, tuple(lattices), tuple(idems))


def pullback_map(rc: RestrictionCat, fund: FundamentalResult, f: int) -> StableMap:
    """``f*: O(B) -> O(A)``, ``e -> bar(e∘f)``, as a stable map."""
    return fund.stab.maps[fund.functor.mor_map[f]]


# ---------------------------------------------------------------------------
# hyperconnected and localic functors


def hyperconnected_failure(F: FinFunctor) -> int | None:
    """First object where ``e -> F(e)`` is not a bijection of idempotents."""
    require_restriction_functor(F)
    C, D = F.source, F.target
    for a in C.objects:
        src = restriction_idempotents(C, a)
        image = {F.mor_map[e] for e in src}
        if len(image) != len(src) or image != set(restriction_idempotents(D, F.obj_map[a])):
            return a
    return None


def is_hyperconnected(F: FinFunctor) -> bool:
    return hyperconnected_failure(F) is None


def _bijective_on_objects(F: FinFunctor) -> bool:
    return sorted(F.obj_map) == list(F.target.objects)


def localic_failure(F: FinFunctor) -> tuple[str, tuple[int, ...]] | None:
    """Why ``F`` is not localic: ``("objects", ())``, ``("empty", (x, y, g))``
    or ``("directed", (g, f1, f2))``; None if it is localic."""
    require_restriction_functor(F)
    C, D = F.source, F.target
    if not _bijective_on_objects(F):
        return ("objects", ())
    for x in C.objects:
        for y in C.objects:
            homC = C.hom(x, y)
            for g in D.hom(F.obj_map[x], F.obj_map[y]):
                S = [f for f in homC if leq(D, g, F.mor_map[f])]
                if not S:
                    return ("empty", (x, y, g))
                Sset = set(S)
                for i, f1 in enumerate(S):
                    for f2 in S[i + 1:]:
                        if not any(h in Sset and leq(C, h, f2) for h in below(C, f1)):
                            return ("directed", (g, f1, f2))
    return None


def is_localic(F: FinFunctor) -> bool:
    return localic_failure(F) is None


# ---------------------------------------------------------------------------
# factorisation


@dataclass(frozen=True)
class Factorization:
    H: FinFunctor
    E: RestrictionCat
    K: FinFunctor


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller id wins so representatives are canonical
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def factorize(F: FinFunctor, check: bool = True) -> Factorization:
    """Split a restriction functor as a localic ``H`` followed by a
    hyperconnected ``K``. Morphisms of the middle category are classes of pairs
    ``(f, g)`` with ``g <= F f``; two pairs with the same ``g`` are identified
    when they share such a lower bound, closed transitively."""
    require_restriction_functor(F)
    C, D = F.source, F.target
    uf = _UnionFind()
    lists: dict[tuple[int, int, int], list[int]] = {}
    for f in C.morphisms:
        x, y = C.dom[f], C.cod[f]
        for g in below(D, F.mor_map[f]):
            lists.setdefault((x, y, g), []).append(f)
    for (x, y, g), fs in lists.items():
        fset = set(fs)
        for low in fs:
            uf.find((g, low))
            for f in fs:
                if f != low and f in fset and leq(C, low, f):
                    uf.union((g, low), (g, f))

    def key(x: int, y: int, f: int, g: int) -> tuple[int, int, int, int]:
        return (x, y, uf.find((g, f))[1], g)

    arrows = [key(x, y, f, g) for (x, y, g), fs in lists.items() for f in fs]
    arrows = sorted(set(arrows))
    idents = []
    for x in C.objects:
        i = C.identity[x]
        idents.append(key(x, x, i, D.identity[F.obj_map[x]])[2:])

    def compose(gk, fk):
        f2, g2 = gk
        f1, g1 = fk
        f = C.comp(f2, f1)
        g = D.comp(g2, g1)
        return key(C.dom[f], C.cod[f], f, g)[2:]

    cat, index = concrete_category(
        tuple(C.obj_name(x) for x in C.objects),
        [(x, y, (f, g)) for x, y, f, g in arrows],
        idents,
        compose,
        lambda x, y, k: f"[{C.mor_name(k[0])},{D.mor_name(k[1])}]",
    )
    bar = []
    for x, y, f, g in arrows:
        bg = D.bar[g]
        bar.append(index[(x, x, key(x, x, C.identity[x], bg)[2:])])
    E = RestrictionCat.of(cat, bar)
    H = FinFunctor(C, E, tuple(C.objects),
                   tuple(index[(C.dom[f], C.cod[f], key(C.dom[f], C.cod[f], f, F.mor_map[f])[2:])]
                         for f in C.morphisms))
    K = FinFunctor(E, D, F.obj_map, tuple(g for _, _, _, g in arrows))
    result = Factorization(H, E, K)
    if check:
        _check_factorization(F, result)
    return result


def _check_factorization(F: FinFunctor, fac: Factorization) -> None:
    if not validate_category(fac.E).ok or not verify_restriction(fac.E).ok:
        raise CategoryError("middle category of the factorisation is not a restriction category")
    KH = compose_functors(fac.K, fac.H)
    if KH.obj_map != F.obj_map or KH.mor_map != F.mor_map:
        raise CategoryError("K∘H differs from F")
    if not is_localic(fac.H):
        raise CategoryError("left factor is not localic")
    if not is_hyperconnected(fac.K):
        raise CategoryError("right factor is not hyperconnected")


# ---------------------------------------------------------------------------
# terminality of the fundamental functor


def _combined(parts: Sequence[tuple[StabOpCat, int]], extra: list, labels: Sequence[str]) -> StabOpCat:
    lattices: list[MeetSemilattice] = []
    arrows = list(extra)
    for cat, offset in parts:
        lattices.extend(cat.lattices)
        for m in cat.morphisms:
            arrows.append((cat.dom[m] + offset, cat.cod[m] + offset, cat.maps[m].mapping))
    return stab_op_category(lattices, arrows, labels)


def _require_stab_target(F: FinFunctor) -> StabOpCat:
    if not isinstance(F.target, StabOpCat):
        raise CategoryError("target is not a Stab^op fragment")
    require_restriction_functor(F)
    return F.target


def terminal_components(F: FinFunctor, fund: FundamentalResult) -> list[StableMap]:
    """``gamma_A: O(A) -> F(A)``, ``e -> F(e)(top)``."""
    T = F.target
    out = []
    for a in F.source.objects:
        LF = T.lattices[F.obj_map[a]]
        vals = tuple(T.maps[F.mor_map[e]].mapping[LF.top] for e in fund.idempotents[a])
        out.append(StableMap(fund.lattice_of[a], LF, vals))
    return out


def terminal_transformation(F: FinFunctor, *, check_unique: bool = True) -> TotalNatTransf:
    """The total natural transformation ``F => O`` into the fundamental functor.

    Both functors are re-expressed in one Stab^op fragment holding their
    images and the components. Below the exhaustive limit, uniqueness is
    confirmed by enumerating every total natural ``F => O``.
    """
    T = _require_stab_target(F)
    C = F.source
    fund = fundamental_functor(C)
    comps = terminal_components(F, fund)
    nT = T.n_objects
    extra = [(F.obj_map[a], nT + a, comps[a].mapping) for a in C.objects]
    labels = tuple(T.obj_name(x) for x in T.objects) + tuple(f"O({C.obj_name(a)})" for a in C.objects)
    D = _combined([(T, 0), (fund.stab, nT)], extra, labels)
    Fd = retarget(F, D)
    Od = retarget(fund.functor, D, [nT + a for a in C.objects])
    gamma = TotalNatTransf(Fd, Od, tuple(D.arrow(*k) for k in extra))
    rep = validate_transformation(gamma)
    if not rep.ok:
        raise CategoryError(f"terminal transformation failed: {rep.failures}")
    if check_unique and C.n_morphisms <= exhaustive_limit():
        n = count_transformations_to_fundamental(F, fund, stop_after=2)
        if n != 1:
            raise CategoryError(f"expected a unique transformation, found {n}")
    return gamma


def transformations_to_fundamental(F: FinFunctor, fund: FundamentalResult | None = None) -> Iterator[list[StableMap]]:
    """Enumerate all families of top-preserving stable maps
    ``O(A) -> F(A)`` natural in ``A``, by backtracking over objects."""
    T = _require_stab_target(F)
    C = F.source
    if fund is None:
        fund = fundamental_functor(C)
    cands = [stable_maps(fund.lattice_of[a], T.lattices[F.obj_map[a]], top_preserving=True)
             for a in C.objects]
    fstar = [pullback_map(C, fund, f) for f in C.morphisms]
    Fmap = [T.maps[F.mor_map[f]] for f in C.morphisms]
    chosen: list[StableMap | None] = [None] * C.n_objects

    def natural_so_far(a: int) -> bool:
        for f in C.morphisms:
            x, y = C.dom[f], C.cod[f]
            if max(x, y) != a:
                continue
            # F(f)∘gamma_y == gamma_x∘f*, as maps O(y) -> F(x)
            if compose_maps(Fmap[f], chosen[y]) != compose_maps(chosen[x], fstar[f]):
                return False
        return True

    def rec(a: int) -> Iterator[list[StableMap]]:
        if a == C.n_objects:
            yield list(chosen)  # type: ignore[arg-type]
            return
        for g in cands[a]:
            chosen[a] = g
            if natural_so_far(a):
                yield from rec(a + 1)
        chosen[a] = None

    yield from rec(0)


def count_transformations_to_fundamental(F: FinFunctor, fund: FundamentalResult | None = None,
                                         stop_after: int | None = None) -> int:
    n = 0
    for _ in transformations_to_fundamental(F, fund):
        n += 1
        if stop_after is not None and n >= stop_after:
            break
    return n


# ---------------------------------------------------------------------------
# comparison transformation


@dataclass(frozen=True)
class Comparison:
    """``phi``, with its stable-map components ``O_C(A) -> O_D(FA)``."""

    transformation: TotalNatTransf
    maps: tuple[StableMap, ...]
    source_fundamental: FundamentalResult
    target_fundamental: FundamentalResult


def comparison(F: FinFunctor) -> Comparison:
    """Components ``e -> F(e)``. In Stab^op the transformation runs from
    ``O_D∘F`` to ``O_C``."""
    require_restriction_functor(F)
    C, D = F.source, F.target
    fc, fd = fundamental_functor(C), fundamental_functor(D)
    nC = C.n_objects
    maps = []
    for a in C.objects:
        fa = F.obj_map[a]
        vals = tuple(fd.element(fa, F.mor_map[e]) for e in fc.idempotents[a])
        maps.append(StableMap(fc.lattice_of[a], fd.lattice_of[fa], vals))
    extra = [(nC + F.obj_map[a], a, maps[a].mapping) for a in C.objects]
    labels = tuple(f"O({C.obj_name(a)})" for a in C.objects) + tuple(f"O({D.obj_name(b)})" for b in D.objects)
    X = _combined([(fc.stab, 0), (fd.stab, nC)], extra, labels)
    Oc = retarget(fc.functor, X)
    Od = retarget(fd.functor, X, [nC + b for b in D.objects])
    OdF = compose_functors(Od, F)
    phi = TotalNatTransf(OdF, Oc, tuple(X.arrow(*k) for k in extra))
    rep = validate_transformation(phi)
    if not rep.ok:
        raise CategoryError(f"comparison transformation failed: {rep.failures}")
    return Comparison(phi, tuple(maps), fc, fd)


def comparison_phi(F: FinFunctor) -> TotalNatTransf:
    return comparison(F).transformation


# ---------------------------------------------------------------------------
# fillers


_same = functors_equal


def _object_preimages(F: FinFunctor) -> list[int]:
    tilde = [0] * F.target.n_objects
    for a, x in enumerate(F.obj_map):
        tilde[x] = a
    return tilde


def _cover_choice(F: FinFunctor, f: int, tilde: Sequence[int]) -> int:
    C, D = F.source, F.target
    for h in C.hom(tilde[D.dom[f]], tilde[D.cod[f]]):
        if leq(D, f, F.mor_map[h]):
            return h
    raise CategoryError(f"no morphism of the source lies over {f}")


def diagonal_filler(H: FinFunctor, F: FinFunctor, K: FinFunctor, G: FinFunctor,
                    *, check_unique: bool = True) -> FinFunctor:
    """The unique ``J: D -> E`` with ``J∘F == H`` and ``G∘J == K`` for a square
    ``G∘H == K∘F`` with ``F`` localic and ``G`` hyperconnected."""
    for X in (H, F, K, G):
        require_restriction_functor(X)
    if not _same(compose_functors(G, H), compose_functors(K, F)):
        raise CategoryError("square does not commute")
    if not is_localic(F):
        raise CategoryError("left edge is not localic")
    if not is_hyperconnected(G):
        raise CategoryError("right edge is not hyperconnected")
    D, E, Fc = F.target, H.target, K.target
    tilde = _object_preimages(F)
    obj = tuple(H.obj_map[tilde[x]] for x in D.objects)
    lift_idem: list[dict[int, int]] = []
    for x in D.objects:
        lift_idem.append({G.mor_map[e]: e for e in restriction_idempotents(E, obj[x])})
    mors = []
    for f in D.morphisms:
        e = lift_idem[D.dom[f]][Fc.bar[K.mor_map[f]]]
        h = _cover_choice(F, f, tilde)
        mors.append(E.comp(H.mor_map[h], e))
    J = FinFunctor(D, E, obj, tuple(mors))
    if not is_restriction_functor(J):
        raise CategoryError("filler is not a restriction functor")
    if not _same(compose_functors(J, F), H) or not _same(compose_functors(G, J), K):
        raise CategoryError("filler does not make both triangles commute")
    if check_unique and D.n_morphisms + E.n_morphisms <= exhaustive_limit():
        n = count_diagonal_fillers(H, F, K, G, stop_after=2)
        if n != 1:
            raise CategoryError(f"expected a unique filler, found {n}")
    return J


def diagonal_fillers(H: FinFunctor, F: FinFunctor, K: FinFunctor, G: FinFunctor) -> Iterator[FinFunctor]:
    """Every restriction functor ``J`` with ``J∘F == H`` and ``G∘J == K``."""
    D, E = F.target, H.target
    tilde = _object_preimages(F)
    obj = [H.obj_map[tilde[x]] for x in D.objects]
    cands: dict[int, set[int]] = {}
    for f in D.morphisms:
        cands[f] = {j for j in E.hom(obj[D.dom[f]], obj[D.cod[f]]) if G.mor_map[j] == K.mor_map[f]}
    for m in F.source.morphisms:
        cands[F.mor_map[m]] &= {H.mor_map[m]}
    for J in search_functors(D, E, obj, cands, restriction=True):
        if _same(compose_functors(J, F), H) and _same(compose_functors(G, J), K):
            yield J


def count_diagonal_fillers(H, F, K, G, stop_after: int | None = None) -> int:
    n = 0
    for _ in diagonal_fillers(H, F, K, G):
        n += 1
        if stop_after is not None and n >= stop_after:
            break
    return n


def lax_filler(alpha: TotalNatTransf, F: FinFunctor, G: FinFunctor,
               *, check_unique: bool = True) -> tuple[FinFunctor, TotalNatTransf]:
    """Given total ``alpha: H => G∘F`` with ``F`` localic, the unique
    ``J`` and total ``beta: J => G`` with ``J∘F == H`` and ``beta F == alpha``."""
    H = alpha.source
    for X in (H, F, G):
        require_restriction_functor(X)
    if not validate_transformation(alpha).ok:
        raise CategoryError("alpha is not a total natural transformation")
    if not _same(alpha.target, compose_functors(G, F)) or F.source != H.source:
        raise CategoryError("alpha must run from H to G∘F")
    if not is_localic(F):
        raise CategoryError("F is not localic")
    D, E = F.target, H.target
    tilde = _object_preimages(F)
    obj = tuple(H.obj_map[tilde[x]] for x in D.objects)
    beta = tuple(alpha.components[tilde[x]] for x in D.objects)
    mors = []
    for f in D.morphisms:
        e = E.bar[E.comp(G.mor_map[f], beta[D.dom[f]])]
        h = _cover_choice(F, f, tilde)
        mors.append(E.comp(H.mor_map[h], e))
    J = FinFunctor(D, E, obj, tuple(mors))
    if not is_restriction_functor(J):
        raise CategoryError("lax filler is not a restriction functor")
    if not _same(compose_functors(J, F), H):
        raise CategoryError("J∘F differs from H")
    b = TotalNatTransf(J, G, beta)
    if not validate_transformation(b).ok:
        raise CategoryError("beta is not a total natural transformation")
    if any(b.components[F.obj_map[a]] != alpha.components[a] for a in F.source.objects):
        raise CategoryError("beta F differs from alpha")
    if check_unique and D.n_morphisms + E.n_morphisms <= exhaustive_limit():
        n = count_lax_fillers(alpha, F, G, stop_after=2)
        if n != 1:
            raise CategoryError(f"expected a unique lax filler, found {n}")
    return J, b


def count_lax_fillers(alpha: TotalNatTransf, F: FinFunctor, G: FinFunctor,
                      stop_after: int | None = None) -> int:
    """Count pairs ``(J, beta)``. Since ``F`` is bijective on objects, ``beta``
    is forced by ``beta F == alpha``; ``J`` is then searched exhaustively."""
    H = alpha.source
    D, E = F.target, H.target
    tilde = _object_preimages(F)
    obj = [H.obj_map[tilde[x]] for x in D.objects]
    beta = [alpha.components[tilde[x]] for x in D.objects]
    cands: dict[int, set[int]] = {}
    for f in D.morphisms:
        x, y = D.dom[f], D.cod[f]
        target = E.comp(G.mor_map[f], beta[x])
        cands[f] = {j for j in E.hom(obj[x], obj[y]) if E.comp(beta[y], j) == target}
    for m in F.source.morphisms:
        cands[F.mor_map[m]] &= {H.mor_map[m]}
    n = 0
    for J in search_functors(D, E, obj, cands, restriction=True):
        if _same(compose_functors(J, F), H):
            n += 1
            if stop_after is not None and n >= stop_after:
                break
    return n
