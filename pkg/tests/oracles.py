"""Independent reference implementations used only by the tests.

Each is deliberately naive: plain recursion, linear scans and explicit walk
enumeration, sharing no code paths with the package beyond data types.
"""
from __future__ import annotations

import itertools


def recursive_value(instance, node: int = 1) -> int:
    shape = instance.shape
    first = shape.d * (node - 1) + 2
    if first > shape.n_nodes:
        return instance.leaves[node - shape.n_internal - 1]
    args = [recursive_value(instance, c) for c in range(first, first + shape.d)]
    idx = 0
    for a in args:
        idx = idx * instance.k + (a - 1)
    return instance.tables[node - 1][idx]


def recursive_node_values(instance) -> list[int]:
    return [recursive_value(instance, i) for i in range(1, instance.shape.n_nodes + 1)]


def linear_scan_min_states(count, required: int, limit: int = 10**4) -> int:
    for s in range(1, limit + 1):
        if count(s) >= required:
            return s
    raise AssertionError("answer above the scan limit")


def flat_values(shape, k, xs) -> list[int]:
    """Node values from a flat input vector, index 0 unused."""
    n_int = shape.n_internal
    per = k**shape.d
    vals = [0] * (shape.n_nodes + 1)
    for i in range(shape.n_nodes, 0, -1):
        if i > n_int:
            vals[i] = xs[n_int * per + (i - n_int - 1)]
        else:
            first = shape.d * (i - 1) + 2
            idx = 0
            for c in range(first, first + shape.d):
                idx = idx * k + (vals[c] - 1)
            vals[i] = xs[(i - 1) * per + idx]
    return vals


def variable_position(shape, k, var) -> int:
    if hasattr(var, "args"):
        idx = 0
        for a in var.args:
            idx = idx * k + (a - 1)
        return (var.node - 1) * k**shape.d + idx
    return shape.n_internal * k**shape.d + (var.node - shape.n_internal - 1)


def walk_thrifty(bp, shape, xs) -> bool:
    """Thrift over bounded-length walks.

    Every walk from the start along activated edges of length at most
    ``|states| * |R| * 2`` that ends in a final state must only query
    function entries at the children's true values.  The walks are unrolled
    layer by layer: ``fwd[a]`` holds the states some walk of exactly ``a``
    steps reaches, ``bwd[b]`` the states with a walk of exactly ``b`` steps
    into a final; a state lies on a short accepting walk iff it sits in
    ``fwd[a]`` and ``bwd[b]`` with ``a + b <= limit``.
    """
    vals = flat_values(shape, bp.k, xs)
    limit = bp.size * len(bp.output_range) * 2

    def succ(s):
        q = bp.queries[s]
        if q is None:
            return ()
        return bp.edges[s][xs[variable_position(shape, bp.k, q)] - 1]

    fwd = [{bp.start}]
    for _ in range(limit):
        fwd.append({t for s in fwd[-1] for t in succ(s)})
    bwd = [{s for s in range(bp.size) if bp.queries[s] is None}]
    for _ in range(limit):
        bwd.append({s for s in range(bp.size) if any(t in bwd[-1] for t in succ(s))})

    on_walk = set()
    for a in range(limit + 1):
        for b in range(limit + 1 - a):
            on_walk |= fwd[a] & bwd[b]

    for s in on_walk:
        q = bp.queries[s]
        if hasattr(q, "args"):
            first = shape.d * (q.node - 1) + 2
            if tuple(q.args) != tuple(vals[first:first + shape.d]):
                return False
    return True


def all_inputs(shape, k):
    return itertools.product(range(1, k + 1), repeat=shape.variable_count(k))
