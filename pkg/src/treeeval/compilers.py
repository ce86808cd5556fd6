"""Compiling pebbling strategies into k-way branching programs.

``compile_black_det``
    deterministic thrifty program from a black pebbling; one state per
    (query step, values held by the pebbles).
``compile_fractional_nondet``
    nondeterministic thrifty program for the Boolean problem from a
    fractional pebbling; each node keeps ``ceil(b*log2 k)`` verified and
    ``ceil(w*log2 k)`` conjectured bits of its value.
``compile_boolean_logsave``
    the four-phase deterministic Boolean program that trades a block of
    candidate values for ``2**m`` subsets; it is not thrifty when blocks
    hold more than one value.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .bp import (
    BranchingProgram,
    FuncVar,
    LeafVar,
    ProgramBuilder,
    log2_ceil_ratio,
    output_range,
)
from .pebbling import (
    DecreaseBlack,
    Finish,
    IncreaseWhite,
    PebbleSequence,
    PebblingError,
    Variant,
    validate_sequence,
)
from .strategies import strategy_black, strategy_fractional
from .tree import ProblemKind, TreeShape


class InvalidSequence(ValueError):
    pass


class InvalidBlockSize(ValueError):
    pass


@dataclass
class CompilationReport:
    compiler: str
    d: int
    h: int
    k: int
    states: int
    source_cost: Fraction | None = None
    layout: str = ""
    states_per_step: list = field(default_factory=list)
    max_bits: int | None = None
    bit_bound: float | None = None
    phase_states: dict = field(default_factory=dict)
    block_size: int | None = None
    start_values: tuple | None = None  # pebble values held by the start state

    def to_json(self) -> dict:
        out = {
            "compiler": self.compiler, "d": self.d, "h": self.h, "k": self.k,
            "states": self.states,
        }
        if self.source_cost is not None:
            out["source_cost"] = str(self.source_cost)
        if self.layout:
            out["layout"] = self.layout
        if self.states_per_step:
            out["states_per_step"] = self.states_per_step
        if self.max_bits is not None:
            out["max_bits"] = self.max_bits
            out["bit_bound"] = self.bit_bound
        if self.phase_states:
            out["phase_states"] = self.phase_states
        if self.block_size is not None:
            out["block_size"] = self.block_size
        if self.start_values is not None:
            out["start_values"] = list(self.start_values)
        return out


def _tree_of(seq: PebbleSequence) -> TreeShape:
    shape = seq.target.shape
    if shape is None:
        raise InvalidSequence("compilers need a tree target")
    return shape


def _check(seq: PebbleSequence, variant: Variant) -> Fraction:
    try:
        return validate_sequence(seq, variant)
    except PebblingError as exc:
        raise InvalidSequence(str(exc)) from exc


def _count_by_tag(bp_descs) -> dict:
    out: dict = {}
    for desc in bp_descs:
        out[desc[0]] = out.get(desc[0], 0) + 1
    return out


# --- deterministic, from black pebbling ----------------------------------------


@dataclass(frozen=True)
class _QueryStep:
    node: int
    dropped: tuple[int, ...]  # nodes whose pebble is gone before the next query
    is_root_done: bool


def _black_steps(seq: PebbleSequence) -> list[_QueryStep]:
    """One entry per finishing move that places a new pebble; pebble removals
    up to the next such move are folded into it."""
    pebbled: set[int] = set()
    steps: list[list] = []
    root_seen = False
    for mv in seq.moves:
        if isinstance(mv, Finish):
            gone = [c for c, a in mv.decreases if a]
            if mv.node in pebbled:
                if steps:
                    steps[-1][1] += gone
                pebbled -= set(gone)
                continue
            pebbled -= set(gone)
            pebbled.add(mv.node)
            steps.append([mv.node, gone, False])
            if mv.node == 1 and not root_seen:
                root_seen = True
                steps[-1][2] = True
                break
        elif isinstance(mv, DecreaseBlack):
            pebbled.discard(mv.node)
            if steps:
                steps[-1][1].append(mv.node)
        else:
            raise InvalidSequence(f"unexpected move in a black pebbling: {mv}")
    return [_QueryStep(n, tuple(g), r) for n, g, r in steps]


def compile_black_det(seq: PebbleSequence, k: int, kind: ProblemKind = ProblemKind.FUNCTION,
                      layout: str = "full") -> tuple[BranchingProgram, CompilationReport]:
    """Deterministic thrifty program computing the root value.

    ``layout="full"``: every query step owns all ``k**p`` assignments of
    values to the ``p`` pebbles (a pebble off the tree holds 1).
    ``layout="reachable"``: only states some input actually visits.
    """
    cost = _check(seq, Variant.BLACK)
    shape = _tree_of(seq)
    steps = _black_steps(seq)
    p = int(cost)
    R = output_range(kind, k)

    def final(x):
        return ("final", x if kind is ProblemKind.FUNCTION else x == 1)

    # slot bookkeeping: slot_of[j] maps node -> pebble slot before step j
    slot_of: list[dict[int, int]] = []
    placed_slot: list[int] = []
    cur: dict[int, int] = {}
    for st in steps:
        slot_of.append(dict(cur))
        free = set(range(p)) - set(cur.values())
        # children that lose their pebble in the finishing move give up their slot first
        for c in st.dropped:
            if c in cur and c in shape.children(st.node):
                free.add(cur.pop(c))
        cur[st.node] = min(free)
        placed_slot.append(cur[st.node])
        for c in st.dropped:
            if c != st.node:
                cur.pop(c, None)
    # slots freed at step j are reset to 1 in the next state
    reset: list[tuple[int, ...]] = []
    for j, st in enumerate(steps):
        before = set(slot_of[j].values())
        after = set(slot_of[j + 1].values()) if j + 1 < len(steps) else set()
        reset.append(tuple(sorted(before - after - {placed_slot[j]})))

    def query_for(j, value_of):
        node = steps[j].node
        if shape.is_leaf(node):
            return LeafVar(node)
        return FuncVar(node, tuple(value_of(c) for c in shape.children(node)))

    builder = ProgramBuilder(k, R, deterministic=True)

    if layout == "full":
        def expand(desc):
            _, j, vals = desc
            var = query_for(j, lambda c: vals[slot_of[j][c]])
            targets = []
            for x in range(1, k + 1):
                if steps[j].is_root_done:
                    targets.append([final(x)])
                    continue
                nv = list(vals)
                for s in reset[j]:
                    nv[s] = 1
                nv[placed_slot[j]] = x
                targets.append([("q", j + 1, tuple(nv))])
            return var, targets

        start = ("q", 0, (1,) * p)
        extra = [("q", j, vals) for j in range(len(steps))
                 for vals in itertools.product(range(1, k + 1), repeat=p)]
        bp = builder.build(start, expand, extra)
    elif layout == "reachable":
        def expand(desc):
            _, j, vals = desc
            held = dict(vals)
            var = query_for(j, held.__getitem__)
            node = steps[j].node
            targets = []
            for x in range(1, k + 1):
                if steps[j].is_root_done:
                    targets.append([final(x)])
                    continue
                nh = dict(held)
                nh[node] = x
                for c in steps[j].dropped:
                    nh.pop(c, None)
                targets.append([("q", j + 1, tuple(sorted(nh.items())))])
            return var, targets

        start = ("q", 0, ())
        bp = builder.build(start, expand)
    else:
        raise ValueError(f"unknown layout {layout!r}")

    per_step: dict[int, int] = {}
    for desc in builder.descs:
        if desc[0] == "q":
            per_step[desc[1]] = per_step.get(desc[1], 0) + 1
    rep = CompilationReport("black", shape.d, shape.h, k, bp.size, cost, layout,
                            [per_step.get(j, 0) for j in range(len(steps))],
                            start_values=start[2] if layout == "full" else ())
    return bp, rep


def compile_black_default(d: int, h: int, k: int, kind: ProblemKind = ProblemKind.FUNCTION,
                          layout: str = "full"):
    return compile_black_det(strategy_black(d, h), k, kind, layout)


# --- nondeterministic, from fractional pebbling ----------------------------------


def value_bits(k: int) -> int:
    return max(1, (k - 1).bit_length())


def weight_bits(q: Fraction, k: int) -> int:
    """``ceil(q * log2 k)`` capped at the number of bits in a value."""
    q = Fraction(q)
    return min(value_bits(k), log2_ceil_ratio(q.numerator, q.denominator, k))


class _Knowledge:
    """Bits held for one node: ``{position: (bit, verified)}``; position 0 is
    the most significant bit of ``v - 1``."""

    @staticmethod
    def consistent(known: dict, L: int, k: int) -> bool:
        return any(all(((v >> (L - 1 - pos)) & 1) == bit for pos, (bit, _) in known.items())
                   for v in range(k))

    @staticmethod
    def value(known: dict, L: int) -> int:
        v = 0
        for pos in range(L):
            v = (v << 1) | known[pos][0]
        return v + 1


def compile_fractional_nondet(seq: PebbleSequence, k: int,
                              variant: Variant = Variant.FRACTIONAL) -> tuple[BranchingProgram, CompilationReport]:
    """Nondeterministic thrifty program deciding whether the root value is 1."""
    cost = _check(seq, variant)
    if any(not isinstance(m, (DecreaseBlack, IncreaseWhite, Finish)) for m in seq.moves):
        raise InvalidSequence("only decrease, white and finish moves can be compiled")
    shape = _tree_of(seq)
    L = value_bits(k)
    configs = list(seq.configs(variant))
    moves = seq.moves
    tau = len(moves)
    guess_var = LeafVar(shape.n_internal + 1)

    def sizes(cfg, i):
        nv = weight_bits(cfg.b(i), k)
        nw = min(weight_bits(cfg.w(i), k), L - nv)
        return nv, nw

    bit_counts = [sum(weight_bits(c.b(i), k) + weight_bits(c.w(i), k) for i in shape.nodes()) for c in configs]
    bound = float(cost) * math.log2(k) + 2 * shape.n_nodes

    def freeze(info: dict) -> tuple:
        return tuple(sorted((i, tuple(sorted(kn.items()))) for i, kn in info.items() if kn))

    def thaw(frozen: tuple) -> dict:
        return {i: dict(kn) for i, kn in frozen}

    def shrink_black(kn: dict, nv: int, nw: int) -> dict:
        V = sorted(p for p, (_, ver) in kn.items() if ver)
        W = sorted(p for p, (_, ver) in kn.items() if not ver)
        keep_v, dropped = V[:nv], V[nv:]
        need = nw - len(W)
        out = {p: kn[p] for p in keep_v}
        for p in W:
            out[p] = kn[p]
        for p in dropped[:max(0, need)]:
            out[p] = (kn[p][0], False)
        return out

    def advance(t: int, info: dict, flag):
        """Apply bookkeeping moves from ``t`` on; return the next descriptor."""
        while t < tau:
            mv = moves[t]
            before, after = configs[t], configs[t + 1]
            if isinstance(mv, Finish):
                return ("s", t, freeze(info), flag)
            i = mv.node
            kn = info.get(i, {})
            nv, nw = sizes(after, i)
            if isinstance(mv, DecreaseBlack):
                info[i] = shrink_black(kn, nv, nw)
            else:  # IncreaseWhite
                cur_w = sum(1 for _, ver in kn.values() if not ver)
                if nw > cur_w:
                    return ("s", t, freeze(info), flag)
            t += 1
        return ("final", bool(flag))

    def expand(desc):
        _, t, frozen, flag = desc
        mv = moves[t]
        info = thaw(frozen)
        before, after = configs[t], configs[t + 1]
        i = mv.node
        if isinstance(mv, IncreaseWhite):
            kn = info.get(i, {})
            nv, nw = sizes(after, i)
            cur_w = sum(1 for _, ver in kn.values() if not ver)
            free = [p for p in range(L) if p not in kn][: nw - cur_w]
            outs = []
            for bits in itertools.product((0, 1), repeat=len(free)):
                nk = dict(kn)
                for p, bit in zip(free, bits):
                    nk[p] = (bit, False)
                if not _Knowledge.consistent(nk, L, k):
                    continue
                ni = dict(info)
                ni[i] = nk
                outs.append(advance(t + 1, ni, flag))
            return guess_var, [outs] * k
        # Finish: every child has value 1, so all of its bits are held
        if shape.is_leaf(i):
            var = LeafVar(i)
        else:
            var = FuncVar(i, tuple(_Knowledge.value(info[c], L) for c in shape.children(i)))
        targets = []
        for x in range(1, k + 1):
            kn = info.get(i, {})
            if any(((x - 1) >> (L - 1 - p)) & 1 != bit for p, (bit, _) in kn.items()):
                targets.append([])  # a conjectured bit was wrong: abort
                continue
            ni = dict(info)
            nv, nw = sizes(after, i)
            ni[i] = {p: (((x - 1) >> (L - 1 - p)) & 1, p < nv) for p in range(nv + nw)}
            for c, a in mv.decreases:
                if a:
                    cv, cw = sizes(after, c)
                    ni[c] = shrink_black(ni.get(c, {}), cv, cw)
            nflag = flag
            if i == 1 and after.b(1) == 1:
                nflag = x == 1
            targets.append([advance(t + 1, ni, nflag)])
        return var, targets

    builder = ProgramBuilder(k, (True, False), deterministic=False)
    start = advance(0, {}, None)
    if start[0] == "final":
        raise InvalidSequence("sequence never queries anything")
    bp = builder.build(start, expand)
    per_step: dict[int, int] = {}
    for desc in builder.descs:
        if desc[0] == "s":
            per_step[desc[1]] = per_step.get(desc[1], 0) + 1
    rep = CompilationReport("fractional", shape.d, shape.h, k, bp.size, cost, "reachable",
                            [per_step.get(t, 0) for t in range(tau)], max(bit_counts), bound)
    return bp, rep


def compile_fractional_default(d: int, h: int, k: int):
    return compile_fractional_nondet(strategy_fractional(d, h), k)


# --- four-phase Boolean program ------------------------------------------------


def default_block_size(d: int, k: int) -> int:
    lk = (d - 1) * math.log2(k)
    m = math.ceil(lk - math.log2(lk)) if lk > 0 else 1
    return max(1, min(k, m))


def _subtree_steps(shape: TreeShape, r: int) -> list[tuple[int, tuple[int, ...]]]:
    """Black-pebbling order for the subtree under ``r``: (node, children)."""
    out: list = []

    def rec(v):
        kids = tuple(shape.children(v))
        for c in kids:
            rec(c)
        out.append((v, kids))

    rec(r)
    return out


def compile_boolean_logsave(d: int, h: int, k: int, m: int | None = None) -> tuple[BranchingProgram, CompilationReport]:
    """Deterministic program deciding ``v_1 == 1``.

    1. compute ``v_2`` and keep its block number (blocks of ``m`` values);
    2. compute ``v_3 .. v_{d+1}`` with the block number held;
    3. for each ``a`` in the block query ``f_1(a, v_3, ..)`` and keep the set
       of offsets where it equals 1;
    4. drop everything but that set, compute ``v_2`` again and accept iff its
       offset is in the set.
    """
    shape = TreeShape(d, h)
    if m is None:
        m = default_block_size(d, k)
    if not 1 <= m <= k:
        raise InvalidBlockSize(f"block size must be in 1..{k}, got {m}")
    sub = {r: _subtree_steps(shape, r) for r in shape.children(1)}

    def sub_query(r, j, held):
        node, kids = sub[r][j]
        if not kids:
            return LeafVar(node)
        return FuncVar(node, tuple(held[c] for c in kids))

    def sub_next(r, j, held, x):
        """(done, value or new held)"""
        node, kids = sub[r][j]
        if j == len(sub[r]) - 1:
            return True, x
        nh = dict(held)
        for c in kids:
            nh.pop(c)
        nh[node] = x
        return False, tuple(sorted(nh.items()))

    def after_v2_first(x):
        return ("p2", (x - 1) // m, (), 3, 0, ())

    def after_p2(block, got):
        if len(got) < d - 1:
            return ("p2", block, got, 3 + len(got), 0, ())
        return ("p3", block, got, 0, ())

    def expand(desc):
        tag = desc[0]
        if tag == "p1":
            _, j, held = desc
            held_d = dict(held)
            var = sub_query(2, j, held_d)
            targets = []
            for x in range(1, k + 1):
                done, res = sub_next(2, j, held_d, x)
                targets.append([after_v2_first(res) if done else ("p1", j + 1, res)])
            return var, targets
        if tag == "p2":
            _, block, got, r, j, held = desc
            held_d = dict(held)
            var = sub_query(r, j, held_d)
            targets = []
            for x in range(1, k + 1):
                done, res = sub_next(r, j, held_d, x)
                if done:
                    targets.append([after_p2(block, got + (res,))])
                else:
                    targets.append([("p2", block, got, r, j + 1, res)])
            return var, targets
        if tag == "p3":
            _, block, got, idx, S = desc
            a = block * m + idx + 1
            var = FuncVar(1, (a,) + got)
            targets = []
            for x in range(1, k + 1):
                nS = S + (idx,) if x == 1 else S
                if idx + 1 < m and a + 1 <= k:
                    targets.append([("p3", block, got, idx + 1, nS)])
                else:
                    targets.append([("p4", nS, 0, ())])
            return var, targets
        if tag == "p4":
            _, S, j, held = desc
            held_d = dict(held)
            var = sub_query(2, j, held_d)
            targets = []
            for x in range(1, k + 1):
                done, res = sub_next(2, j, held_d, x)
                if done:
                    targets.append([("final", ((res - 1) % m) in S)])
                else:
                    targets.append([("p4", S, j + 1, res)])
            return var, targets
        raise AssertionError(desc)

    builder = ProgramBuilder(k, (True, False), deterministic=True)
    bp = builder.build(("p1", 0, ()), expand)
    phases = _count_by_tag(builder.descs)
    phases.pop("final", None)
    rep = CompilationReport("logsave", d, h, k, bp.size, None, "reachable", [], None, None,
                            {f"phase{t[1]}": n for t, n in sorted(phases.items())}, m)
    return bp, rep
