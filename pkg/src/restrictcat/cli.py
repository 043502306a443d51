"""Command line front end. Every verdict is a library predicate applied to the
parsed document; this module only routes, formats and sets exit codes.

Exit codes: 0 all checks pass, 1 a check found a counterexample, 2 usage,
parse or structural error.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from typing import Any, Callable

from .builders import (
    build_finset,
    build_inverse_symmetric,
    build_par,
    build_set_p,
    build_stab_op,
    build_trivial,
    group_category,
    injective_morphisms,
    point_category,
    random_restriction_category,
)
from .core import CategoryError, FinFunctor, compose_functors, functors_equal, validate_category
from .fibration import (
    discrete_fibration_failure,
    gamma,
    gamma_functor,
    hom_component,
    is_local_discrete_fibration,
    lift_restriction,
)
from .fundamental import (
    count_diagonal_fillers,
    diagonal_filler,
    factorize,
    fundamental_functor,
    hyperconnected_failure,
    localic_failure,
)
from .io import FunctorSquare, Report, read_file, serialize, write_file
from .join import JoinStructure, verify_join
from .ranges import RangeStructure, bc_failure, derive, verify_range
from .restriction import RestrictionCat, verify_restriction
from .config import exhaustive_limit
from .semilattice import StabSquare, beck_chevalley_failure, chain, m3, n5, powerset
from .selftest import run_selftest

PASS, FAIL = 0, 1
USAGE = 2


class UsageError(Exception):
    pass


# helpers

def _restriction_of(x: Any) -> RestrictionCat:
    if isinstance(x, (JoinStructure, RangeStructure)):
        x = x.host
    if not isinstance(x, RestrictionCat):
        raise UsageError("expected a restriction, join, range or stab_op document")
    return x


def _want(x: Any, cls: type, what: str):
    if not isinstance(x, cls):
        raise UsageError(f"expected a {what} document")
    return x


def _witness(w: Any) -> Any:
    if w is None:
        return None
    if isinstance(w, tuple):
        return [_witness(v) for v in w]
    return w


def _emit(report: Report, as_json: bool, out=None) -> int:
    out = out or sys.stdout
    if as_json:
        out.write(json.dumps({"kind": "report", "command": report.command, "verdict": report.verdict,
                              "checks": report.checks, "details": report.details}, sort_keys=True) + "\n")
    else:
        width = max((len(k) for k in report.checks), default=0)
        for name, w in report.checks.items():
            status = "PASS" if w is None else "FAIL"
            line = f"{name.ljust(width)}  {status}"
            if w is not None:
                line += f"  witness: {json.dumps(w, ensure_ascii=False)}"
            out.write(line + "\n")
        for k, v in report.details.items():
            out.write(f"{k}: {json.dumps(v, ensure_ascii=False)}\n")
        out.write(f"verdict: {report.verdict}\n")
    return PASS if report.verdict == "pass" else FAIL


def _report(command: str, checks: dict, details: dict | None = None) -> Report:
    verdict = "pass" if all(w is None for w in checks.values()) else "fail"
    return Report(command, verdict, dict(checks), dict(details or {}))


# build

_LATTICE_RE = re.compile(r"(chain|powerset)(\d+)|m3|n5")


def _lattice(name: str):
    m = _LATTICE_RE.fullmatch(name)
    if not m:
        raise UsageError(f"unknown lattice {name!r} (use chainN, powersetK, m3, n5)")
    if name == "m3":
        return m3()
    if name == "n5":
        return n5()
    return chain(int(m.group(2))) if m.group(1) == "chain" else powerset(int(m.group(2)))


def _ints(params: list[str], what: str) -> list[int]:
    try:
        return [int(p) for p in params]
    except ValueError:
        raise UsageError(f"{what} parameters must be integers") from None


def _build(variant: str, params: list[str], join: bool = False):
    if variant == "set_p":
        return build_set_p(_ints(params, variant))
    if variant == "inverse":
        (n,) = _ints(params, variant) or [None]
        if n is None:
            raise UsageError("inverse takes one size")
        return build_inverse_symmetric(n)
    if variant == "par":
        fs, _ = build_finset(_ints(params, variant))
        return build_par(fs, injective_morphisms(fs))
    if variant == "stab_op":
        return build_stab_op([_lattice(p) for p in params], join=join)
    if variant == "trivial":
        if params[:1] == ["point"]:
            return build_trivial(point_category())
        if params[:1] == ["group"] and len(params) == 2:
            return build_trivial(group_category(_ints(params[1:], variant)[0]))
        raise UsageError("trivial takes 'point' or 'group N'")
    if variant == "random":
        (seed,) = _ints(params, variant) or [0]
        return random_restriction_category(seed)
    raise UsageError(f"unknown variant {variant!r}")


def cmd_build(a) -> int:
    built = _build(a.variant, a.params, a.join)
    if a.kind == "restriction":
        doc = built.rc
    elif a.kind == "join":
        if built.join is None:
            raise UsageError(f"{a.variant} carries no join structure")
        doc = built.join
    else:
        if built.range is None:
            raise UsageError(f"{a.variant} carries no range structure")
        doc = built.range
    write_file(a.output, doc)
    rep = verify_restriction(built.rc)
    return _emit(_report("build", {"restriction_axioms": _failures(rep)},
                         {"morphisms": built.rc.n_morphisms, "objects": built.rc.n_objects}), a.json)


def _failures(rep) -> Any:
    return None if rep.ok else [[name, list(w)] for name, w in rep.failures]


# checks

def cmd_check(a) -> int:
    x = read_file(a.file)
    rc = _restriction_of(x)
    cat = validate_category(rc)
    checks: dict[str, Any] = {"category_laws": _failures(cat)}
    rep = verify_restriction(rc)
    for name in sorted(rep.results):
        checks[name] = _witness(rep.results[name])
    if rep.structural:
        raise CategoryError(f"malformed restriction: {rep.structural}")
    if a.structure == "join":
        js = _want(x, JoinStructure, "join")
        jr = verify_join(js)
        if jr.structural:
            raise CategoryError(f"malformed join structure: {jr.structural}")
        for name, w in jr.results.items():
            checks[name] = _witness(w)
    elif a.structure == "range":
        rs = _want(x, RangeStructure, "range")
        rr = verify_range(rs)
        if rr.structural:
            raise CategoryError(f"malformed range structure: {rr.structural}")
        for name in sorted(rr.results):
            checks[name] = _witness(rr.results[name])
    return _emit(_report(f"check {a.structure}", checks), a.json)


def cmd_fundamental(a) -> int:
    rc = _restriction_of(read_file(a.file))
    fund = fundamental_functor(rc)
    if a.output:
        write_file(a.output, fund.functor)
    bad = hyperconnected_failure(fund.functor)
    return _emit(_report("fundamental", {"hyperconnected": bad},
                         {"lattice_sizes": [L.size for L in fund.lattice_of],
                          "target_morphisms": fund.stab.n_morphisms}), a.json)


def _functor(path: str) -> FinFunctor:
    return _want(read_file(path), FinFunctor, "functor")


def cmd_factorize(a) -> int:
    F = _functor(a.file)
    fac = factorize(F, check=False)
    os.makedirs(a.output, exist_ok=True)
    for name, obj in (("H", fac.H), ("E", fac.E), ("K", fac.K)):
        write_file(os.path.join(a.output, f"{name}.doc"), obj)
    checks = {
        "composite_equals_input": None if functors_equal(compose_functors(fac.K, fac.H), F) else [],
        "middle_restriction_axioms": _failures(verify_restriction(fac.E)),
        "left_localic": _witness(localic_failure(fac.H)),
        "right_hyperconnected": _witness(hyperconnected_failure(fac.K)),
    }
    return _emit(_report("factorize", checks, {"middle_morphisms": fac.E.n_morphisms}), a.json)


def cmd_hyperconnected(a) -> int:
    return _emit(_report("hyperconnected", {"hyperconnected": hyperconnected_failure(_functor(a.file))}), a.json)


def cmd_localic(a) -> int:
    return _emit(_report("localic", {"localic": _witness(localic_failure(_functor(a.file)))}), a.json)


def cmd_filler(a) -> int:
    sq = _want(read_file(a.file), FunctorSquare, "square")
    H, F, G, K = sq.top, sq.left, sq.right, sq.bottom
    checks = {
        "commutes": None if functors_equal(compose_functors(G, H), compose_functors(K, F)) else [],
        "left_localic": _witness(localic_failure(F)),
        "right_hyperconnected": _witness(hyperconnected_failure(G)),
    }
    details: dict[str, Any] = {}
    if all(w is None for w in checks.values()):
        J = diagonal_filler(H, F, K, G, check_unique=False)
        details["filler_obj_map"] = list(J.obj_map)
        details["filler_mor_map"] = list(J.mor_map)
        if F.target.n_morphisms + H.target.n_morphisms <= exhaustive_limit():
            n = count_diagonal_fillers(H, F, K, G, stop_after=2)
            checks["filler_unique"] = None if n == 1 else [n]
        if a.output:
            write_file(a.output, J)
    return _emit(_report("filler", checks, details), a.json)


def _ldf_witness(F2) -> Any:
    objs = F2.source.base.objects
    for x in objs:
        for y in objs:
            w = discrete_fibration_failure(hom_component(F2, x, y))
            if w is not None:
                return [x, y, *w]
    return None


def cmd_lift(a) -> int:
    F = _functor(a.file)
    F2 = gamma_functor(F)
    checks: dict[str, Any] = {"local_discrete_fibration": _ldf_witness(F2)}
    if is_local_discrete_fibration(F2):
        rc, _ = lift_restriction(gamma(F.source), F2)
        checks["reproduces_restriction"] = (
            None if rc.bar == F.source.bar else [f for f in rc.morphisms if rc.bar[f] != F.source.bar[f]][:1])
        if a.output:
            write_file(a.output, rc)
    return _emit(_report("lift", checks), a.json)


def cmd_derive_range(a) -> int:
    rc = _restriction_of(read_file(a.file))
    d = derive(rc)
    checks = {"all_pullbacks_open": None if d.structure is not None else [d.first_non_open]}
    if d.structure is not None and a.output:
        write_file(a.output, d.structure)
    details = {"hat": list(d.structure.hat)} if d.structure is not None else {}
    return _emit(_report("derive-range", checks, details), a.json)


def cmd_beck_chevalley(a) -> int:
    x = read_file(a.file)
    if isinstance(x, StabSquare):
        if not x.commutes():
            raise CategoryError("square does not commute")
        why = beck_chevalley_failure(x)
        checks = {"beck_chevalley": None if why is None else [why]}
    elif isinstance(x, FinFunctor):
        w = bc_failure(x)
        checks = {"comparison_squares_beck_chevalley": None if w is None else list(w)}
    else:
        raise UsageError("expected a stab_square or functor document")
    return _emit(_report("beck-chevalley", checks), a.json)


def cmd_selftest(a) -> int:
    results = run_selftest(a.seed, a.cases, a.workers)
    checks: dict[str, Any] = {}
    for r in results:
        for name, why in r.failures:
            checks.setdefault(name, [r.seed, why])
    from .selftest import CHECKS

    ordered = {name: checks.get(name) for name in CHECKS}
    return _emit(_report("selftest", ordered, {"cases": len(results), "seed": a.seed}), a.json)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="restrictcat", description="Finite restriction category toolkit.")
    p.add_argument("--json", action="store_true", help="print a machine-readable report")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable, help: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("build", cmd_build, "build a standard example")
    sp.add_argument("variant", help="set_p | inverse | par | stab_op | trivial | random")
    sp.add_argument("params", nargs="*")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--kind", choices=("restriction", "join", "range"), default="restriction")
    sp.add_argument("--join", action="store_true", help="stab_op: keep join-preserving maps only")

    sp = add("check", cmd_check, "verify axioms of a document")
    sp.add_argument("structure", choices=("restriction", "join", "range"))
    sp.add_argument("file")

    sp = add("fundamental", cmd_fundamental, "fundamental functor into Stab^op")
    sp.add_argument("file")
    sp.add_argument("-o", "--output")

    sp = add("factorize", cmd_factorize, "localic/hyperconnected factorisation")
    sp.add_argument("file")
    sp.add_argument("-o", "--output", required=True, help="directory for H.doc, E.doc, K.doc")

    for name, fn in (("hyperconnected", cmd_hyperconnected), ("localic", cmd_localic)):
        sp = add(name, fn, f"is the functor {name}")
        sp.add_argument("file")

    sp = add("filler", cmd_filler, "diagonal filler of a square")
    sp.add_argument("file")
    sp.add_argument("-o", "--output")

    sp = add("lift", cmd_lift, "lift restriction structure along a functor")
    sp.add_argument("file")
    sp.add_argument("-o", "--output")

    sp = add("derive-range", cmd_derive_range, "range operator from open pullback maps")
    sp.add_argument("file")
    sp.add_argument("-o", "--output")

    sp = add("beck-chevalley", cmd_beck_chevalley, "Beck-Chevalley condition")
    sp.add_argument("file")

    sp = add("selftest", cmd_selftest, "seeded property sweep")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--cases", type=int, default=20)
    sp.add_argument("--workers", type=int, default=1)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else PASS
    try:
        return args.fn(args)
    except (UsageError, CategoryError, OSError) as e:
        sys.stderr.write(f"error: {e}\n")
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
