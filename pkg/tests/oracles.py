"""Independent reference computations on concrete data (graphs of partial
functions, subsets), written without the library's category machinery."""

from __future__ import annotations

import itertools


def pf_compose(g, f):
    return tuple(-1 if x < 0 else g[x] for x in f)


def pf_domain(f):
    return frozenset(i for i, x in enumerate(f) if x >= 0)


def pf_image(f):
    return frozenset(x for x in f if x >= 0)


def pf_graph(f):
    return frozenset((i, x) for i, x in enumerate(f) if x >= 0)


def pf_partial_identity(subset, n):
    return tuple(i if i in subset else -1 for i in range(n))


def count_partial_functions(m, n):
    return (n + 1) ** m


def count_partial_injections(n):
    from math import comb, factorial
    return sum(comb(n, k) ** 2 * factorial(k) for k in range(n + 1))


def fiber_product(f, g):
    """Set-theoretic pullback of total functions given as tuples."""
    return [(i, j) for i in range(len(f)) for j in range(len(g)) if f[i] == g[j]]


def subsets(n):
    return [frozenset(s) for k in range(n + 1) for s in itertools.combinations(range(n), k)]
