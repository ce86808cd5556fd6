"""Tree evaluation instances, the reference evaluator, and instance generation.

Nodes are heap-numbered from 1: the children of node ``i`` in a ``d``-ary
tree are ``d*(i-1)+2 .. d*i+1``.  Values live in ``[k] = {1..k}``.

A function table for an internal node is stored row-major over child
tuples in lexicographic order, so ``f_i(x_1..x_d)`` sits at index
``sum((x_j - 1) * k**(d-1-j))``.
"""
from __future__ import annotations

import enum
import itertools
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

DEFAULT_ENUM_CAP = 10**6


class ProblemKind(enum.Enum):
    FUNCTION = "function"
    BOOLEAN = "boolean"


class InstanceCountError(OverflowError):
    pass


@dataclass(frozen=True)
class TreeShape:
    d: int
    h: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"degree must be >= 2, got {self.d}")
        if self.h < 2:
            raise ValueError(f"height must be >= 2, got {self.h}")

    @property
    def n_internal(self) -> int:
        return (self.d ** (self.h - 1) - 1) // (self.d - 1)

    @property
    def n_leaves(self) -> int:
        return self.d ** (self.h - 1)

    @property
    def n_nodes(self) -> int:
        return (self.d**self.h - 1) // (self.d - 1)

    def children(self, i: int) -> range:
        if self.is_leaf(i):
            return range(0)
        return range(self.d * (i - 1) + 2, self.d * i + 2)

    def parent(self, i: int) -> int | None:
        if i == 1:
            return None
        return (i - 2) // self.d + 1

    def is_leaf(self, i: int) -> bool:
        return i > self.n_internal

    def internal_nodes(self) -> range:
        return range(1, self.n_internal + 1)

    def leaves(self) -> range:
        return range(self.n_internal + 1, self.n_nodes + 1)

    def nodes(self) -> range:
        return range(1, self.n_nodes + 1)

    def height_of(self, i: int) -> int:
        """Number of levels in the subtree rooted at ``i`` (a leaf has height 1)."""
        depth = 0
        while i != 1:
            i = self.parent(i)
            depth += 1
        return self.h - depth

    def variable_count(self, k: int) -> int:
        return self.n_internal * k**self.d + self.n_leaves


def table_index(args: Sequence[int], k: int) -> int:
    idx = 0
    for x in args:
        idx = idx * k + (x - 1)
    return idx


@dataclass(frozen=True)
class TepInstance:
    """A labelled tree: one table per internal node, one value per leaf."""

    shape: TreeShape
    k: int
    tables: tuple[tuple[int, ...], ...]
    leaves: tuple[int, ...]

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        s = self.shape
        if len(self.tables) != s.n_internal:
            raise ValueError(f"expected {s.n_internal} tables, got {len(self.tables)}")
        if len(self.leaves) != s.n_leaves:
            raise ValueError(f"expected {s.n_leaves} leaf values, got {len(self.leaves)}")
        size = self.k**s.d
        for i, t in enumerate(self.tables, start=1):
            if len(t) != size:
                raise ValueError(f"table of node {i} has {len(t)} entries, expected {size}")
            if not all(1 <= x <= self.k for x in t):
                raise ValueError(f"table of node {i} has entries outside [1..{self.k}]")
        if not all(1 <= x <= self.k for x in self.leaves):
            raise ValueError(f"leaf values outside [1..{self.k}]")

    @property
    def d(self) -> int:
        return self.shape.d

    @property
    def h(self) -> int:
        return self.shape.h

    def f(self, i: int, args: Sequence[int]) -> int:
        return self.tables[i - 1][table_index(args, self.k)]

    def leaf(self, i: int) -> int:
        return self.leaves[i - 1 - self.shape.n_internal]

    def variables(self) -> tuple[int, ...]:
        """Flat variable tuple: tables in node order, then leaves."""
        return tuple(itertools.chain.from_iterable(self.tables)) + self.leaves

    @classmethod
    def from_variables(cls, shape: TreeShape, k: int, values: Sequence[int]) -> TepInstance:
        size = k**shape.d
        n = shape.n_internal
        if len(values) != shape.variable_count(k):
            raise ValueError("wrong number of variables")
        tables = tuple(tuple(values[j * size:(j + 1) * size]) for j in range(n))
        return cls(shape, k, tables, tuple(values[n * size:]))

    def with_entry(self, i: int, args: Sequence[int], value: int) -> TepInstance:
        tables = list(self.tables)
        row = list(tables[i - 1])
        row[table_index(args, self.k)] = value
        tables[i - 1] = tuple(row)
        return TepInstance(self.shape, self.k, tuple(tables), self.leaves)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "h": self.h,
            "k": self.k,
            "leaves": list(self.leaves),
            "tables": {str(i): list(t) for i, t in enumerate(self.tables, start=1)},
        }

    @classmethod
    def from_json(cls, data: dict) -> TepInstance:
        shape = TreeShape(int(data["d"]), int(data["h"]))
        tables = tuple(tuple(data["tables"][str(i)]) for i in shape.internal_nodes())
        return cls(shape, int(data["k"]), tables, tuple(data["leaves"]))


def load_instance(path: str | Path) -> TepInstance:
    with open(path) as fh:
        return TepInstance.from_json(json.load(fh))


def save_instance(instance: TepInstance, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(instance.to_json(), fh)


def evaluate(instance: TepInstance, kind: ProblemKind = ProblemKind.FUNCTION) -> int | bool:
    """Root value, computed by a depth-first walk with an explicit stack.

    Each stack frame holds a node and the child values collected so far,
    so the stack never grows past ``h`` frames.
    """
    shape = instance.shape
    stack: list[tuple[int, list[int]]] = [(1, [])]
    result = None
    while stack:
        node, acc = stack[-1]
        if shape.is_leaf(node):
            value = instance.leaf(node)
        elif len(acc) < shape.d:
            stack.append((shape.children(node)[len(acc)], []))
            continue
        else:
            value = instance.f(node, acc)
        stack.pop()
        if stack:
            stack[-1][1].append(value)
        else:
            result = value
    if kind is ProblemKind.BOOLEAN:
        return result == 1
    return result


def node_values(instance: TepInstance) -> tuple[int, ...]:
    """All node values ``v_1..v_N`` (index ``i-1``), bottom-up."""
    shape = instance.shape
    vals = [0] * shape.n_nodes
    for i in reversed(shape.nodes()):
        if shape.is_leaf(i):
            vals[i - 1] = instance.leaf(i)
        else:
            vals[i - 1] = instance.f(i, [vals[c - 1] for c in shape.children(i)])
    return tuple(vals)


def count_instances(shape: TreeShape, k: int) -> int:
    return k ** shape.variable_count(k)


def enumerate_instances(shape: TreeShape, k: int, cap: int = DEFAULT_ENUM_CAP) -> Iterator[TepInstance]:
    """Every instance exactly once.

    Order: lexicographic over the flat variable tuple (tables in node order,
    row-major, then leaves) with the last variable varying fastest.  The first
    instance has every entry equal to 1.
    """
    total = count_instances(shape, k)
    if total > cap:
        raise InstanceCountError(f"{total} instances exceeds the cap of {cap}")
    for values in itertools.product(range(1, k + 1), repeat=shape.variable_count(k)):
        yield TepInstance.from_variables(shape, k, values)


def random_instance(shape: TreeShape, k: int, seed: int) -> TepInstance:
    rng = random.Random(seed)
    m = shape.variable_count(k)
    return TepInstance.from_variables(shape, k, [rng.randint(1, k) for _ in range(m)])


# --- single shared node function --------------------------------------------


def encode_pair(node: int, x: int, k: int) -> int:
    """<node, x> as an element of [N*k]; <1,1> encodes 1."""
    return (node - 1) * k + x


def decode_pair(value: int, k: int) -> tuple[int, int]:
    q, r = divmod(value - 1, k)
    return q + 1, r + 1


@dataclass(frozen=True)
class SharedFunctionInstance:
    """Instance over [N*k] where every internal node uses one table."""

    shape: TreeShape
    k: int  # alphabet of the original instance
    table: tuple[int, ...]
    leaves: tuple[int, ...]

    @property
    def alphabet(self) -> int:
        return self.shape.n_nodes * self.k

    def as_instance(self) -> TepInstance:
        # every node references the same tuple object
        return TepInstance(self.shape, self.alphabet, (self.table,) * self.shape.n_internal, self.leaves)


def to_single_function(instance: TepInstance, default: int = 1) -> SharedFunctionInstance:
    shape, k = instance.shape, instance.k
    big = shape.n_nodes * k
    table = [default] * big**shape.d
    for j in shape.internal_nodes():
        kids = list(shape.children(j))
        for xs in itertools.product(range(1, k + 1), repeat=shape.d):
            args = [encode_pair(c, x, k) for c, x in zip(kids, xs)]
            table[table_index(args, big)] = encode_pair(j, instance.f(j, xs), k)
    leaves = tuple(encode_pair(i, instance.leaf(i), k) for i in shape.leaves())
    return SharedFunctionInstance(shape, k, tuple(table), leaves)
