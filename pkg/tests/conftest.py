import functools

import pytest

from luciopt import Instance, build_patch, default_diagram


@functools.lru_cache(maxsize=None)
def instance(d: int) -> Instance:
    return Instance.from_config(d)


@functools.lru_cache(maxsize=None)
def canonical(d: int):
    return default_diagram(instance(d))


def pauli_image(basis: str, support, layers) -> set:
    """Push a CSS Pauli through CNOT layers (test-side oracle, sets only)."""
    s = set(support)
    for layer in layers:
        for c, t in layer:
            if basis == "X" and c in s:
                s ^= {t}
            if basis == "Z" and t in s:
                s ^= {c}
    return s


@pytest.fixture(scope="session")
def d3():
    return instance(3)


@pytest.fixture(scope="session")
def d5():
    return instance(5)


def shape_oracle(basis: str, support) -> set:
    """Every two-layer CNOT circuit on diagonal couplers that folds the
    operator onto one of its qubits with |support| - 1 gates."""
    from itertools import combinations

    sup = sorted(support)
    edges = [(a, b) for a in sup for b in sup
             if a != b and abs(a[0] - b[0]) == 1 and abs(a[1] - b[1]) == 1]

    def matchings(k):
        for sub in combinations(edges, k):
            qs = [q for g in sub for q in g]
            if len(qs) == len(set(qs)):
                yield sub

    n = len(sup) - 1
    found = set()
    for k1 in range(n + 1):
        for l1 in matchings(k1):
            for l2 in matchings(n - k1):
                img = pauli_image(basis, sup, (l1, l2))
                if len(img) == 1:
                    found.add((next(iter(img)), frozenset(l1), frozenset(l2)))
    return found


def small_instance(seed: int, T: int = 2, max_primary: int = 12):
    """A few neighbouring d=3 operators with trimmed catalogs, so that
    T * (number of shapes) stays within exhaustive reach."""
    import numpy as np

    from luciopt.gauge import build_gauge_code, drop_operators
    from luciopt.shapes import ShapeCatalog, build_catalog

    rng = np.random.default_rng(seed)
    gc = build_gauge_code(3)
    ops = gc.operators
    first = ops[int(rng.integers(len(ops)))]
    near = sorted(ops, key=lambda o: min(abs(a[0] - b[0]) + abs(a[1] - b[1])
                                         for a in o.support for b in first.support))
    k = int(rng.integers(2, 4))
    keep = {o.id for o in near[:k]}
    code, id_map = drop_operators(gc, [o.id for o in ops if o.id not in keep])
    full = build_catalog(code)
    budget = max_primary // T
    shapes = {}
    left = budget
    for n, (i, lst) in enumerate(sorted(full.items())):
        room = left - (len(full) - n - 1)
        take = int(rng.integers(1, max(1, min(len(lst), room)) + 1))
        idx = sorted(rng.choice(len(lst), size=take, replace=False))
        shapes[i] = tuple(lst[j] for j in idx)
        left -= take
    return Instance(code, ShapeCatalog(shapes))
