"""Seeded property sweep over random restriction categories."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .builders import Bounds, random_restriction_category
from .config import RANGE_ENUMERATION_LIMIT
from .core import compose_functors, functors_equal, validate_category
from .fibration import gamma, gamma_functor, is_discrete_fibration_map, is_local_discrete_fibration
from .fundamental import factorize, fundamental_functor, is_hyperconnected, is_localic
from .io import load, serialize
from .ranges import derive_range, enumerate_range_operators
from .restriction import is_total, verify_restriction

CHECKS = (
    "category_laws",
    "restriction_axioms",
    "fundamental_hyperconnected",
    "hyperconnected_iff_local_discrete_fibration",
    "total_iff_discrete_fibration",
    "factorization",
    "range_uniqueness",
    "round_trip",
)


@dataclass(frozen=True)
class CaseResult:
    seed: int
    n_morphisms: int
    failures: tuple[tuple[str, str], ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def run_case(seed: int) -> CaseResult:
    ambient = "par" if seed % 4 == 3 else "set_p"
    built = random_restriction_category(seed, Bounds(ambient=ambient))
    rc, F = built.rc, built.inclusion
    bad: list[tuple[str, str]] = []

    rep = validate_category(rc)
    if not rep.ok:
        bad.append(("category_laws", str(rep.failures)))
    rep = verify_restriction(rc)
    if not rep.ok:
        bad.append(("restriction_axioms", str(rep.failures)))
    if not is_hyperconnected(fundamental_functor(rc).functor):
        bad.append(("fundamental_hyperconnected", ""))
    if is_hyperconnected(F) != is_local_discrete_fibration(gamma_functor(F)):
        bad.append(("hyperconnected_iff_local_discrete_fibration", ""))
    k2 = gamma(rc)
    for f in rc.morphisms:
        if is_total(rc, f) != is_discrete_fibration_map(k2, f):
            bad.append(("total_iff_discrete_fibration", f"morphism {f}"))
            break
    fac = factorize(F, check=False)
    if not (functors_equal(compose_functors(fac.K, fac.H), F) and is_localic(fac.H)
            and is_hyperconnected(fac.K) and verify_restriction(fac.E).ok):
        bad.append(("factorization", ""))
    if rc.n_morphisms <= RANGE_ENUMERATION_LIMIT:
        found = enumerate_range_operators(rc)
        derived = derive_range(rc)
        if len(found) > 1 or (derived is not None and found != [derived]):
            bad.append(("range_uniqueness", f"{len(found)} operators"))
    text = serialize(rc)
    if serialize(load(text)) != text:
        bad.append(("round_trip", ""))
    return CaseResult(seed, rc.n_morphisms, tuple(bad))


def run_selftest(seed: int = 0, cases: int = 20, workers: int = 1) -> list[CaseResult]:
    """Results are ordered by case seed whatever the worker count."""
    seeds = [seed + i for i in range(cases)]
    if workers <= 1:
        return [run_case(s) for s in seeds]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_case, seeds))
