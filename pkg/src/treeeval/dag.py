"""Pebbling targets: DAGs with child lists, trees as a special case, and the
split-node constructions G_{d,h} and G'_{d,h}."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .tree import TreeShape


@dataclass(frozen=True)
class PebbleDag:
    """Nodes are ``1..n``; ``children[i-1]`` lists the in-neighbours of ``i``.

    Edges point child -> parent.  Roots default to the sinks (nodes with no
    parent) and every one of them must be black-pebbled at some point.
    """

    n: int
    children: tuple[tuple[int, ...], ...]
    roots: tuple[int, ...] = ()
    labels: tuple[str, ...] = ()
    shape: TreeShape | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.children) != self.n:
            raise ValueError("children list length must equal node count")
        for i, kids in enumerate(self.children, start=1):
            for c in kids:
                if not 1 <= c <= self.n or c == i:
                    raise ValueError(f"bad edge {c} -> {i}")
        if not self.roots:
            object.__setattr__(self, "roots", self.sinks)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(1, self.n + 1)))
        self._check_acyclic()
        reach = set(self.roots)
        stack = list(self.roots)
        while stack:
            for c in self.children[stack.pop() - 1]:
                if c not in reach:
                    reach.add(c)
                    stack.append(c)
        if len(reach) != self.n:
            raise ValueError("some node reaches no root")

    def _check_acyclic(self):
        state = [0] * (self.n + 1)
        for start in range(1, self.n + 1):
            if state[start]:
                continue
            stack = [(start, iter(self.children[start - 1]))]
            state[start] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    state[node] = 2
                    stack.pop()
                elif state[nxt] == 1:
                    raise ValueError("graph has a cycle")
                elif state[nxt] == 0:
                    state[nxt] = 1
                    stack.append((nxt, iter(self.children[nxt - 1])))

    @cached_property
    def parents(self) -> tuple[tuple[int, ...], ...]:
        ps: list[list[int]] = [[] for _ in range(self.n)]
        for i, kids in enumerate(self.children, start=1):
            for c in kids:
                ps[c - 1].append(i)
        return tuple(tuple(p) for p in ps)

    @property
    def sinks(self) -> tuple[int, ...]:
        has_parent = {c for kids in self.children for c in kids}
        return tuple(i for i in range(1, self.n + 1) if i not in has_parent)

    def is_source(self, i: int) -> bool:
        return not self.children[i - 1]

    def nodes(self) -> range:
        return range(1, self.n + 1)

    @classmethod
    def from_tree(cls, shape: TreeShape) -> PebbleDag:
        kids = tuple(tuple(shape.children(i)) for i in shape.nodes())
        return cls(shape.n_nodes, kids, (1,), shape=shape)

    # edge-list text format ------------------------------------------------

    def to_text(self) -> str:
        lines = [f"nodes {self.n}", "roots " + " ".join(map(str, self.roots))]
        for i, lab in enumerate(self.labels, start=1):
            if lab != str(i):
                lines.append(f"label {i} {lab}")
        for i, kids in enumerate(self.children, start=1):
            for c in kids:
                lines.append(f"{c} {i}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> PebbleDag:
        n = None
        roots: tuple[int, ...] = ()
        labels: dict[int, str] = {}
        edges: list[tuple[int, int]] = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "nodes":
                n = int(parts[1])
            elif parts[0] == "roots":
                roots = tuple(int(x) for x in parts[1:])
            elif parts[0] == "label":
                labels[int(parts[1])] = " ".join(parts[2:])
            elif len(parts) == 2:
                edges.append((int(parts[0]), int(parts[1])))
            else:
                raise ValueError(f"cannot parse DAG line: {raw!r}")
        if n is None:
            raise ValueError("missing 'nodes' line")
        kids: list[list[int]] = [[] for _ in range(n)]
        for c, p in edges:
            kids[p - 1].append(c)
        lab = tuple(labels.get(i, str(i)) for i in range(1, n + 1))
        return cls(n, tuple(tuple(k) for k in kids), roots, lab)


def as_dag(target: TreeShape | PebbleDag) -> PebbleDag:
    if isinstance(target, PebbleDag):
        return target
    return PebbleDag.from_tree(target)


def _copy_id(v: int, i: int, c: int) -> int:
    return (v - 1) * c + i


def _split_children(shape: TreeShape, c: int, keep) -> PebbleDag:
    n_tree = shape.n_nodes
    n = n_tree * c + 1
    kids: list[tuple[int, ...]] = [()] * n
    labels = [""] * n
    for v in shape.nodes():
        ordered = [_copy_id(u, j, c) for u in shape.children(v) for j in range(1, c + 1)]
        for i in range(1, c + 1):
            node = _copy_id(v, i, c)
            labels[node - 1] = f"{v}[{i}]"
            kids[node - 1] = tuple(keep(ordered, i))
    kids[n - 1] = tuple(_copy_id(1, i, c) for i in range(1, c + 1))
    labels[n - 1] = "top"
    return PebbleDag(n, tuple(kids), (n,), tuple(labels))


def build_G(d: int, h: int, c: int) -> PebbleDag:
    """Each tree node becomes ``c`` copies; each tree edge a complete
    bipartite graph; one extra root sits over the copies of the tree root."""
    return _split_children(TreeShape(d, h), c, lambda ordered, i: ordered)


def build_Gprime(d: int, h: int, c: int) -> PebbleDag:
    """G_{d,h} with copy ``v[i]`` losing its ``i-1`` smallest and ``c-i``
    largest children, leaving ``c(d-1)+1`` children per internal copy.

    Children are ordered by tree position (left to right) then copy index.
    """
    def keep(ordered, i):
        return ordered[i - 1:len(ordered) - (c - i)] if ordered else []

    return _split_children(TreeShape(d, h), c, keep)
