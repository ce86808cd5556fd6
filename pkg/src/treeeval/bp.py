"""k-way branching programs over tree-evaluation inputs.

A program is a list of states.  A non-final state queries one input
variable and has, for each label ``x`` in ``1..k``, a tuple of target
states (one target per label when deterministic, any number otherwise).
A final state carries an output from the range ``R``.

Inputs are flat variable vectors in the order of
:meth:`TepInstance.variables` (tables node by node, row-major, then leaves).
"""
from __future__ import annotations

import itertools
import json
import math
import random
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .tree import ProblemKind, TepInstance, TreeShape, table_index


class FuncVar(NamedTuple):
    node: int
    args: tuple[int, ...]


class LeafVar(NamedTuple):
    node: int


VarId = FuncVar | LeafVar


class CapExceeded(OverflowError):
    pass


class DegenerateSeries(ValueError):
    pass


def var_index(shape: TreeShape, k: int, var: VarId) -> int:
    """Position of ``var`` in the flat variable vector."""
    if isinstance(var, FuncVar):
        if shape.is_leaf(var.node) or len(var.args) != shape.d:
            raise ValueError(f"bad function variable {var}")
        return (var.node - 1) * k**shape.d + table_index(var.args, k)
    if not shape.is_leaf(var.node):
        raise ValueError(f"bad leaf variable {var}")
    return shape.n_internal * k**shape.d + var.node - 1 - shape.n_internal


def all_variables(shape: TreeShape, k: int) -> list[VarId]:
    out: list[VarId] = []
    for i in shape.internal_nodes():
        out += [FuncVar(i, xs) for xs in itertools.product(range(1, k + 1), repeat=shape.d)]
    out += [LeafVar(i) for i in shape.leaves()]
    return out


@dataclass(frozen=True)
class Output:
    value: object


@dataclass(frozen=True)
class Abort:
    state: int


@dataclass(frozen=True)
class Diverge:
    state: int


RunOutcome = Output | Abort | Diverge


@dataclass(frozen=True)
class BranchingProgram:
    k: int
    start: int
    queries: tuple  # VarId or None (final) per state
    edges: tuple  # per state: tuple over labels 1..k of tuples of targets
    outputs: tuple  # output per final state, None otherwise
    output_range: tuple
    deterministic: bool
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.queries)
        if not (len(self.edges) == len(self.outputs) == n):
            raise ValueError("per-state lists differ in length")
        if not 0 <= self.start < n:
            raise ValueError("start state out of range")
        for s in range(n):
            if self.queries[s] is None:
                if self.outputs[s] is None or any(self.edges[s]):
                    raise ValueError(f"final state {s} must have an output and no edges")
                continue
            if self.outputs[s] is not None:
                raise ValueError(f"state {s} queries a variable and has an output")
            if len(self.edges[s]) != self.k:
                raise ValueError(f"state {s} needs one edge list per label")
            for ts in self.edges[s]:
                for t in ts:
                    if not 0 <= t < n:
                        raise ValueError(f"edge from {s} to missing state {t}")
            if self.deterministic and any(len(ts) != 1 for ts in self.edges[s]):
                raise ValueError(f"deterministic state {s} must have exactly {self.k} outedges")
        finals = [o for o in self.outputs if o is not None]
        if sorted(map(repr, finals)) != sorted(map(repr, self.output_range)):
            raise ValueError("need exactly one final state per output")

    @property
    def size(self) -> int:
        return len(self.queries)

    def finals(self) -> dict:
        return {o: s for s, o in enumerate(self.outputs) if o is not None}

    def bind(self, shape: TreeShape) -> list:
        """Flat variable index per state (None for finals)."""
        return [None if q is None else var_index(shape, self.k, q) for q in self.queries]

    # --- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        states = []
        for q, es, o in zip(self.queries, self.edges, self.outputs):
            if q is None:
                states.append({"output": o})
            else:
                qd = {"node": q.node, "args": list(q.args)} if isinstance(q, FuncVar) else {"leaf": q.node}
                states.append({"query": qd, "edges": {str(x): list(ts) for x, ts in enumerate(es, 1) if ts}})
        return {"k": self.k, "start": self.start, "deterministic": self.deterministic,
                "range": list(self.output_range), "states": states}

    @classmethod
    def from_json(cls, data: dict) -> BranchingProgram:
        k = int(data["k"])
        queries, edges, outputs = [], [], []
        for st in data["states"]:
            if "output" in st:
                queries.append(None)
                edges.append(((),) * 0)
                outputs.append(st["output"])
                continue
            q = st["query"]
            queries.append(FuncVar(q["node"], tuple(q["args"])) if "args" in q else LeafVar(q["leaf"]))
            es = st.get("edges", {})
            edges.append(tuple(tuple(es.get(str(x), ())) for x in range(1, k + 1)))
            outputs.append(None)
        return cls(k, int(data["start"]), tuple(queries), tuple(edges), tuple(outputs),
                   tuple(data["range"]), bool(data["deterministic"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def single_final(value, k: int, output_range: Sequence) -> BranchingProgram:
    """The one-state program whose start is the final labelled ``value``."""
    others = [r for r in output_range if r != value]
    outputs = (value,) + tuple(others)
    n = len(outputs)
    return BranchingProgram(k, 0, (None,) * n, ((),) * n, outputs, tuple(output_range), True)


def output_range(kind: ProblemKind, k: int) -> tuple:
    return tuple(range(1, k + 1)) if kind is ProblemKind.FUNCTION else (True, False)


# --- execution -----------------------------------------------------------------


def _vector(shape, inp) -> Sequence[int]:
    return inp.variables() if isinstance(inp, TepInstance) else inp


def run_deterministic(bp: BranchingProgram, instance, shape: TreeShape | None = None,
                      bound: list | None = None) -> RunOutcome:
    shape = shape or instance.shape
    xs = _vector(shape, instance)
    idx = bound if bound is not None else bp.bind(shape)
    s = bp.start
    seen = set()
    while bp.queries[s] is not None:
        if s in seen:
            return Diverge(s)
        seen.add(s)
        ts = bp.edges[s][xs[idx[s]] - 1]
        if not ts:
            return Abort(s)
        s = ts[0]
    return Output(bp.outputs[s])


def _activated(bp, xs, idx):
    def succ(s):
        if bp.queries[s] is None:
            return ()
        return bp.edges[s][xs[idx[s]] - 1]
    return succ


def reachable_states(bp: BranchingProgram, xs: Sequence[int], idx: list) -> set[int]:
    succ = _activated(bp, xs, idx)
    seen = {bp.start}
    stack = [bp.start]
    while stack:
        for t in succ(stack.pop()):
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return seen


def reachable_finals(bp: BranchingProgram, instance, shape: TreeShape | None = None,
                     bound: list | None = None) -> set:
    shape = shape or instance.shape
    xs = _vector(shape, instance)
    idx = bound if bound is not None else bp.bind(shape)
    return {bp.outputs[s] for s in reachable_states(bp, xs, idx) if bp.queries[s] is None}


# --- fast reference values from flat vectors ---------------------------------


def flat_node_values(shape: TreeShape, k: int, xs: Sequence[int]) -> list[int]:
    """``v_i`` at index ``i`` (index 0 unused), computed bottom-up."""
    d = shape.d
    size = k**d
    n_int = shape.n_internal
    base_leaf = n_int * size - n_int - 1
    vals = [0] * (shape.n_nodes + 1)
    for i in range(shape.n_nodes, 0, -1):
        if i > n_int:
            vals[i] = xs[base_leaf + i]
        else:
            pos = 0
            for c in range(d * (i - 1) + 2, d * i + 2):
                pos = pos * k + vals[c] - 1
            vals[i] = xs[(i - 1) * size + pos]
    return vals


def expected_output(kind: ProblemKind, vals: list[int]):
    return vals[1] if kind is ProblemKind.FUNCTION else vals[1] == 1


# --- verification ----------------------------------------------------------------


@dataclass
class CheckReport:
    ok: bool
    checked: int
    failures: int = 0
    counterexample: tuple | None = None
    detail: str = ""

    def summary(self) -> str:
        good = self.checked - self.failures
        return f"{good}/{self.checked} inputs OK"

    def to_json(self) -> dict:
        return {"ok": self.ok, "checked": self.checked, "failures": self.failures,
                "counterexample": list(self.counterexample) if self.counterexample else None,
                "detail": self.detail}


DEFAULT_EXHAUSTIVE_CAP = 1 << 20


def inputs(shape: TreeShape, k: int, mode: str = "exhaustive", samples: int = 10_000,
           seed: int = 0, cap: int = DEFAULT_EXHAUSTIVE_CAP) -> Iterable[tuple[int, ...]]:
    m = shape.variable_count(k)
    if mode == "exhaustive":
        if k**m > cap:
            raise CapExceeded(f"{k}^{m} inputs exceeds the exhaustive cap of {cap}")
        return itertools.product(range(1, k + 1), repeat=m)
    if mode == "sampled":
        rng = random.Random(seed)
        return (tuple(rng.randint(1, k) for _ in range(m)) for _ in range(samples))
    raise ValueError(f"unknown mode {mode!r}")


def check_correct(bp: BranchingProgram, shape: TreeShape, kind: ProblemKind,
                  mode: str = "exhaustive", samples: int = 10_000, seed: int = 0,
                  cap: int = DEFAULT_EXHAUSTIVE_CAP, stop_at_first: bool = True) -> CheckReport:
    """Deterministic programs must output ``g(x)``; nondeterministic ones
    must reach exactly the final ``g(x)``."""
    k = bp.k
    idx = bp.bind(shape)
    rep = CheckReport(True, 0)
    for xs in inputs(shape, k, mode, samples, seed, cap):
        rep.checked += 1
        want = expected_output(kind, flat_node_values(shape, k, xs))
        if bp.deterministic:
            got = run_deterministic(bp, xs, shape, idx)
            good = got == Output(want)
        else:
            got = reachable_finals(bp, xs, shape, idx)
            good = got == {want}
        if not good:
            rep.failures += 1
            if rep.ok:
                rep.ok = False
                rep.counterexample = tuple(xs)
                rep.detail = f"expected {want!r}, got {got!r}"
            if stop_at_first:
                break
    return rep


def _unthrifty(var, vals) -> bool:
    if not isinstance(var, FuncVar):
        return False
    d = len(var.args)
    first = d * (var.node - 1) + 2
    return any(var.args[j] != vals[first + j] for j in range(d))


def check_thrifty(bp: BranchingProgram, shape: TreeShape, mode: str = "exhaustive",
                  samples: int = 10_000, seed: int = 0, cap: int = DEFAULT_EXHAUSTIVE_CAP) -> CheckReport:
    """Every function query on a computation that ends in a final state must
    use the children's true values.

    Deterministic: the single computation path.  Nondeterministic: every
    state both reachable from the start and co-reachable to a final state in
    the activated subgraph.
    """
    k = bp.k
    idx = bp.bind(shape)
    func_states = [s for s, q in enumerate(bp.queries) if isinstance(q, FuncVar)]
    rep = CheckReport(True, 0)
    for xs in inputs(shape, k, mode, samples, seed, cap):
        rep.checked += 1
        vals = flat_node_values(shape, k, xs)
        bad = None
        if bp.deterministic:
            s, seen = bp.start, set()
            while bp.queries[s] is not None and s not in seen:
                seen.add(s)
                if _unthrifty(bp.queries[s], vals):
                    bad = s
                    break
                ts = bp.edges[s][xs[idx[s]] - 1]
                if not ts:
                    break
                s = ts[0]
        else:
            suspects = [s for s in func_states if _unthrifty(bp.queries[s], vals)]
            if suspects:
                live = live_states(bp, xs, idx)
                bad = next((s for s in suspects if s in live), None)
        if bad is not None:
            rep.failures += 1
            rep.ok = False
            rep.counterexample = tuple(xs)
            rep.detail = f"state {bad} queries {bp.queries[bad]} off the children's values"
            break
    return rep


def live_states(bp: BranchingProgram, xs: Sequence[int], idx: list) -> set[int]:
    """States on some computation from the start that ends in a final."""
    fwd = reachable_states(bp, xs, idx)
    rev: dict[int, list[int]] = {}
    succ = _activated(bp, xs, idx)
    for s in fwd:
        for t in succ(s):
            rev.setdefault(t, []).append(s)
    finals = [s for s in fwd if bp.queries[s] is None]
    live = set(finals)
    stack = list(finals)
    while stack:
        for p in rev.get(stack.pop(), ()):
            if p not in live:
                live.add(p)
                stack.append(p)
    return live


# --- metrics -----------------------------------------------------------------------


@dataclass(frozen=True)
class BpMetrics:
    states: int
    finals: int
    per_node: dict

    @classmethod
    def of(cls, bp: BranchingProgram) -> BpMetrics:
        per: dict[int, int] = {}
        for q in bp.queries:
            if q is not None:
                per[q.node] = per.get(q.node, 0) + 1
        return cls(bp.size, sum(q is None for q in bp.queries), dict(sorted(per.items())))


def growth_exponent(series: Sequence[tuple[int, int]]) -> float:
    """Least-squares slope of log(states) against log(k)."""
    import numpy as np

    if len(series) < 3:
        raise DegenerateSeries("need at least three points")
    ks = [k for k, _ in series]
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise DegenerateSeries("k must be strictly increasing")
    if any(s <= 0 or k <= 0 for k, s in series):
        raise DegenerateSeries("values must be positive")
    x = np.log([float(k) for k in ks])
    y = np.log([float(s) for _, s in series])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def to_boolean(bp: BranchingProgram) -> BranchingProgram:
    """Merge the finals of a function-problem program: output 1 becomes
    ``True`` and every other output ``False``."""
    finals = bp.finals()
    if 1 not in finals:
        raise ValueError("program has no final labelled 1")
    keep_false = next((s for o, s in sorted(finals.items(), key=lambda p: repr(p[0])) if o != 1), None)
    remap: dict[int, int] = {}
    new_ids: dict[int, int] = {}
    order = []
    for s in range(bp.size):
        o = bp.outputs[s]
        if o is not None and o != 1 and s != keep_false:
            continue
        new_ids[s] = len(order)
        order.append(s)
    for s in range(bp.size):
        o = bp.outputs[s]
        remap[s] = new_ids[s] if s in new_ids else new_ids[keep_false]
    queries, edges, outputs = [], [], []
    for s in order:
        o = bp.outputs[s]
        queries.append(bp.queries[s])
        edges.append(tuple(tuple(remap[t] for t in ts) for ts in bp.edges[s]))
        outputs.append(None if o is None else (o == 1))
    return BranchingProgram(bp.k, remap[bp.start], tuple(queries), tuple(edges), tuple(outputs),
                            (True, False), bp.deterministic)


# --- DOT export ------------------------------------------------------------------


def _var_text(q) -> str:
    if isinstance(q, FuncVar):
        return f"f{q.node}(" + ",".join(map(str, q.args)) + ")"
    return f"leaf{q.node}"


def export_dot(bp: BranchingProgram) -> str:
    rng = " ".join(json.dumps(r) for r in bp.output_range)
    lines = [
        "digraph bp {",
        f'  graph [k={bp.k}, start={bp.start}, deterministic={str(bp.deterministic).lower()}, range="{rng.replace(chr(34), "")}"];',
    ]
    for s in range(bp.size):
        q = bp.queries[s]
        if q is None:
            lines.append(f'  s{s} [label="out {json.dumps(bp.outputs[s])}", shape=doublecircle];')
        else:
            lines.append(f'  s{s} [label="{_var_text(q)}"];')
    for s in range(bp.size):
        for x, ts in enumerate(bp.edges[s], 1):
            for t in ts:
                lines.append(f'  s{s} -> s{t} [label="{x}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


_GRAPH = re.compile(r'graph \[k=(\d+), start=(\d+), deterministic=(true|false), range="([^"]*)"\]')
_NODE = re.compile(r'^s(\d+) \[label="([^"]*)"(, shape=doublecircle)?\];$')
_EDGE = re.compile(r'^s(\d+) -> s(\d+) \[label="(\d+)"\];$')
_FUNC = re.compile(r"^f(\d+)\(([\d,]*)\)$")


def parse_dot(text: str) -> BranchingProgram:
    """Inverse of :func:`export_dot`."""
    m = _GRAPH.search(text)
    if not m:
        raise ValueError("missing graph attribute line")
    k, start, det = int(m.group(1)), int(m.group(2)), m.group(3) == "true"
    rng = tuple(json.loads(tok) for tok in m.group(4).split())
    labels: dict[int, str] = {}
    finals: set[int] = set()
    edge_list = []
    for raw in text.splitlines():
        line = raw.strip()
        nm = _NODE.match(line)
        if nm:
            labels[int(nm.group(1))] = nm.group(2)
            if nm.group(3):
                finals.add(int(nm.group(1)))
            continue
        em = _EDGE.match(line)
        if em:
            edge_list.append((int(em.group(1)), int(em.group(2)), int(em.group(3))))
    n = len(labels)
    queries, outputs = [], []
    for s in range(n):
        lab = labels[s]
        if s in finals:
            queries.append(None)
            outputs.append(json.loads(lab[len("out "):]))
        elif lab.startswith("leaf"):
            queries.append(LeafVar(int(lab[4:])))
            outputs.append(None)
        else:
            fm = _FUNC.match(lab)
            if not fm:
                raise ValueError(f"cannot parse state label {lab!r}")
            queries.append(FuncVar(int(fm.group(1)), tuple(int(a) for a in fm.group(2).split(","))))
            outputs.append(None)
    edges = [[[] for _ in range(k)] if queries[s] is not None else [] for s in range(n)]
    for s, t, x in edge_list:
        edges[s][x - 1].append(t)
    return BranchingProgram(k, start, tuple(queries), tuple(tuple(tuple(ts) for ts in es) for es in edges),
                            tuple(outputs), rng, det)


# --- builder used by the compilers ---------------------------------------------


class ProgramBuilder:
    """Builds a program from hashable state descriptors.

    ``expand(desc)`` returns ``(var, targets)`` where ``targets[x-1]`` is a
    list of descriptors reached on label ``x``.  Final descriptors are
    ``("final", r)``; finals get the first ids, in range order.
    """

    def __init__(self, k: int, out_range: Sequence, deterministic: bool):
        self.k = k
        self.out_range = tuple(out_range)
        self.deterministic = deterministic
        self.ids: dict = {}
        self.descs: list = []
        for r in self.out_range:
            self._id(("final", r))

    def _id(self, desc) -> int:
        i = self.ids.get(desc)
        if i is None:
            i = self.ids[desc] = len(self.descs)
            self.descs.append(desc)
        return i

    def build(self, start, expand, extra: Iterable = ()) -> BranchingProgram:
        start_id = self._id(start)
        for desc in extra:
            self._id(desc)
        queries: list = []
        edges: list = []
        outputs: list = []
        pos = 0
        while pos < len(self.descs):
            desc = self.descs[pos]
            pos += 1
            if desc[0] == "final":
                queries.append(None)
                edges.append(())
                outputs.append(desc[1])
                continue
            var, targets = expand(desc)
            queries.append(var)
            edges.append(tuple(tuple(dict.fromkeys(self._id(t) for t in ts)) for ts in targets))
            outputs.append(None)
        return BranchingProgram(self.k, start_id, tuple(queries), tuple(edges), tuple(outputs),
                                self.out_range, self.deterministic)


def log2_ceil_ratio(num: int, den: int, k: int) -> int:
    """``ceil((num/den) * log2 k)`` computed exactly: the least ``n`` with
    ``2**(n*den) >= k**num``."""
    if num <= 0:
        return 0
    target = k**num
    n = max(0, math.floor(num * math.log2(k) / den) - 1)
    while 2 ** (n * den) < target:
        n += 1
    while n > 0 and 2 ** ((n - 1) * den) >= target:
        n -= 1
    return n
