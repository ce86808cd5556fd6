"""Exact minimum-pebble search over discretized configuration graphs.

Weights are multiples of ``1/c``.  A configuration is stored as a tuple of
per-node codes ``b_units * (c + 1) + w_units`` followed by a bitmask of the
roots that have already held a whole black pebble.

The move set explored is a reduced but cost-equivalent version of the full
game:

* black decreases and white increases go one unit at a time (any larger
  step passes through the same or lower totals when split up);
* a finishing move always drops ``w(i)`` to 0 (a partial drop equals a full
  drop followed by a white increase);
* child decreases ride along with a finishing move only when it raises
  ``b(i)`` (otherwise they can be done afterwards at lower cost);
* outside the white-sliding game, leaves never carry white weight (a white
  unit on a leaf behaves exactly like a black unit there);
* outside the white-sliding game, white weight is only added right before
  a finishing move, topping each child up to value 1.  Postponing a white
  increase to that point is always legal and never raises any total, and
  the configuration just before the finish still counts toward the budget;
* for trees, configurations are identified up to reordering sibling
  subtrees.

The minimum is computed as a minimax path problem with a bucket queue (the
label of a configuration is the largest total on the best path to it).
:func:`feasible` is the plain budget-restricted reachability probe and
``method="binary"`` runs a binary search over it.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator

from .dag import PebbleDag, as_dag
from .pebbling import (
    ZERO,
    DecreaseBlack,
    Finish,
    IncreaseWhite,
    PebbleSequence,
    Variant,
    WhiteSlide,
)
from .tree import TreeShape

DEFAULT_STATE_CAP = 3_000_000


class SearchError(Exception):
    pass


class BudgetCapExceeded(SearchError):
    pass


class StateSpaceTooLarge(SearchError):
    pass


@dataclass(frozen=True)
class SearchResult:
    cost: Fraction
    witness: PebbleSequence
    states_explored: int
    granularity: int = 1

    def to_json(self) -> dict:
        from .pebbling import format_move

        return {
            "cost": str(self.cost),
            "states_explored": self.states_explored,
            "granularity": self.granularity,
            "witness": [format_move(m) for m in self.witness.moves],
        }


class _Space:
    """Successor generation and canonical forms for one search problem."""

    def __init__(self, target, variant: Variant, c: int, symmetry: bool = True, bundle: bool = True):
        if variant.whole and c != 1:
            raise ValueError("whole pebbling games use granularity 1")
        if c < 1:
            raise ValueError("granularity must be positive")
        self.dag: PebbleDag = as_dag(target)
        self.variant = variant
        self.c = c
        self.base = c + 1
        self.n = self.dag.n
        self.kids = [tuple(x - 1 for x in k) for k in self.dag.children]
        self.roots = [r - 1 for r in self.dag.roots]
        self.full_mask = (1 << len(self.roots)) - 1
        self.slide = variant is Variant.FRACTIONAL_WHITE_SLIDE
        self.white = variant is not Variant.BLACK
        # leaves never need white outside the sliding game
        self.white_ok = [self.white and (self.slide or bool(k)) for k in self.kids]
        # whites only as top-ups right before a finishing move (not with sliding)
        self.bundle = bundle and self.white and not self.slide
        shape = self.dag.shape
        self.tree: TreeShape | None = shape if symmetry and shape is not None else None

    # codes ------------------------------------------------------------------

    def bw(self, code: int) -> tuple[int, int]:
        return divmod(code, self.base)

    def units(self, code: int) -> int:
        b, w = divmod(code, self.base)
        return b + w

    def total(self, state: tuple) -> int:
        base = self.base
        return sum(x // base + x % base for x in state[:-1])

    def empty(self) -> tuple:
        return (0,) * self.n + (0,)

    def is_goal(self, state: tuple) -> bool:
        # takes a concrete state, not a key
        return state[-1] == self.full_mask and not any(state[:-1])

    # canonical form -------------------------------------------------------

    def canonical(self, state: tuple):
        """Hashable key equal for configurations related by reordering
        sibling subtrees (plain state for DAGs)."""
        t = self.tree
        if t is None:
            return state
        d = t.d
        key = list(state[:-1])  # leaves keep their plain code
        for i in range(t.n_internal - 1, -1, -1):
            f = d * i + 1
            if d == 2:
                x, y = key[f], key[f + 1]
                key[i] = (state[i], x, y) if x <= y else (state[i], y, x)
            else:
                key[i] = (state[i],) + tuple(sorted(key[f:f + d]))
        return (key[0], state[-1])

    # successors -----------------------------------------------------------

    def successors(self, state: tuple) -> Iterator[tuple[tuple, tuple, int]]:
        """``(move descriptor, next state, extra)`` in (kind, node, amount)
        order.  ``extra`` is how far an intermediate configuration inside a
        bundled move rises above the current total (0 for single moves)."""
        base, c = self.base, self.c
        codes = list(state[:-1])
        mask = state[-1]
        n = self.n
        roots = self.roots

        # rule (i): unit black decrease
        for i in range(n):
            if codes[i] >= base:
                nc = codes.copy()
                nc[i] -= base
                yield ("dec", i + 1), tuple(nc) + (mask,), 0
        # rule (ii) on its own; otherwise white only arrives bundled below
        if self.white and not self.bundle:
            for i in range(n):
                if self.white_ok[i] and self.units(codes[i]) < c:
                    nc = codes.copy()
                    nc[i] += 1
                    yield ("white", i + 1), tuple(nc) + (mask,), 0
        # rule (iii), optionally preceded by white top-ups of the children
        for i in range(n):
            kids = self.kids[i]
            tops = []
            ok = True
            for j in kids:
                gap = c - self.units(codes[j])
                if gap:
                    if not (self.bundle and self.white_ok[j]):
                        ok = False
                        break
                    tops.append((j, gap))
            if not ok:
                continue
            extra = sum(g for _, g in tops)
            base_codes = codes.copy()
            for j, g in tops:
                base_codes[j] += g
            tdesc = tuple((j + 1, g) for j, g in tops)
            b, w = divmod(codes[i], base)
            for nb in range(b, c + 1):
                if nb == b:
                    if w == 0:
                        continue
                    nc = base_codes.copy()
                    nc[i] = nb * base
                    yield ("finish", i + 1, nb, (), tdesc), self._with_mask(nc, mask), extra
                    continue
                ranges = [range(base_codes[j] // base + 1) for j in kids]
                for amounts in product(*ranges):
                    nc = base_codes.copy()
                    nc[i] = nb * base
                    for j, a in zip(kids, amounts):
                        nc[j] -= a * base
                    decs = tuple((j + 1, a) for j, a in zip(kids, amounts) if a)
                    yield ("finish", i + 1, nb, decs, tdesc), self._with_mask(nc, mask), extra
        # rule (iv)
        if self.slide:
            for i in range(n):
                wi = codes[i] % base
                if not wi:
                    continue
                kids = self.kids[i]
                for j in kids:
                    if any(self.units(codes[x]) != c for x in kids if x != j):
                        continue
                    bj = codes[j] // base
                    if wi + self.units(codes[j]) < c:
                        continue
                    nc = codes.copy()
                    nc[i] -= wi
                    nc[j] = bj * base + (c - bj)
                    yield ("slide", i + 1, j + 1), tuple(nc) + (mask,), 0

    def _with_mask(self, codes: list, mask: int) -> tuple:
        base, c = self.base, self.c
        for bit, r in enumerate(self.roots):
            if codes[r] // base == c:
                mask |= 1 << bit
        return tuple(codes) + (mask,)

    def to_moves(self, desc: tuple) -> list:
        c = self.c
        kind = desc[0]
        if kind == "dec":
            return [DecreaseBlack(desc[1], Fraction(1, c))]
        if kind == "white":
            return [IncreaseWhite(desc[1], Fraction(1, c))]
        if kind == "finish":
            _, i, nb, decs, tops = desc
            out = [IncreaseWhite(j, Fraction(g, c)) for j, g in tops]
            out.append(Finish(i, Fraction(nb, c), ZERO, tuple((j, Fraction(a, c)) for j, a in decs)))
            return out
        if kind == "slide":
            return [WhiteSlide(desc[1], desc[2])]
        raise ValueError(desc)

    def witness(self, path: list) -> PebbleSequence:
        """Replay a path of canonical keys as concrete moves."""
        actual = self.empty()
        moves = []
        for nxt in path[1:]:
            for desc, succ, _ in self.successors(actual):
                if self.canonical(succ) == nxt:
                    moves += self.to_moves(desc)
                    actual = succ
                    break
            else:  # pragma: no cover - would mean canonical() is not a true symmetry
                raise SearchError("could not replay the search path")
        return PebbleSequence(self.dag, tuple(moves))


def _path(parent: dict, goal) -> list:
    path = [goal]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def feasible(target, variant: Variant, c: int, budget_units: int,
             state_cap: int = DEFAULT_STATE_CAP, symmetry: bool = True,
             space: _Space | None = None, bundle: bool = True):
    """Breadth-first reachability from the empty configuration to a finished
    one, never exceeding ``budget_units / c`` pebbles.

    Returns ``(witness or None, states explored)``.
    """
    sp = space or _Space(target, variant, c, symmetry, bundle)
    start = sp.empty()
    k0 = sp.canonical(start)
    parent: dict = {k0: None}
    queue = deque([(k0, start)])
    while queue:
        key, s = queue.popleft()
        here = sp.total(s)
        for _, succ, extra in sp.successors(s):
            if sp.total(succ) > budget_units or here + extra > budget_units:
                continue
            nk = sp.canonical(succ)
            if nk in parent:
                continue
            parent[nk] = key
            if sp.is_goal(succ):
                return sp.witness(_path(parent, nk)), len(parent)
            if len(parent) > state_cap:
                raise StateSpaceTooLarge(f"more than {state_cap} configurations")
            queue.append((nk, succ))
    return None, len(parent)


def min_pebbles(target, variant: Variant, c: int = 1, budget_cap: Fraction | int | None = None,
                state_cap: int = DEFAULT_STATE_CAP, symmetry: bool = True,
                method: str = "bottleneck", bundle: bool = True) -> SearchResult:
    """Exact minimum cost of the game at granularity ``c``.

    ``budget_cap`` (in pebbles) bounds the search; exceeding it raises
    :class:`BudgetCapExceeded`.
    """
    sp = _Space(target, variant, c, symmetry, bundle)
    cap_units = sp.n * c if budget_cap is None else int(Fraction(budget_cap) * c)
    if method == "binary":
        return _binary(sp, cap_units, state_cap, variant, c)
    if method != "bottleneck":
        raise ValueError(f"unknown method {method!r}")

    start = sp.empty()
    k0 = sp.canonical(start)
    label = {k0: 0}
    parent: dict = {k0: None}
    buckets: list[list] = [[] for _ in range(cap_units + 1)]
    buckets[0].append((k0, start))
    for level in range(cap_units + 1):
        bucket = buckets[level]
        while bucket:
            key, s = bucket.pop()
            if label[key] != level:
                continue
            here = sp.total(s)
            for _, succ, extra in sp.successors(s):
                t = max(sp.total(succ), here + extra)
                if t > cap_units:
                    continue
                lab = level if t < level else t
                nk = sp.canonical(succ)
                old = label.get(nk)
                if old is not None and old <= lab:
                    continue
                label[nk] = lab
                parent[nk] = key
                if sp.is_goal(succ):
                    # goal has total 0, so lab == level: nothing cheaper remains
                    wit = sp.witness(_path(parent, nk))
                    return SearchResult(Fraction(level, c), wit, len(label), c)
                if len(label) > state_cap:
                    raise StateSpaceTooLarge(f"more than {state_cap} configurations")
                buckets[lab].append((nk, succ))
    raise BudgetCapExceeded(f"no pebbling within {Fraction(cap_units, c)} pebbles")


def _binary(sp: _Space, cap_units: int, state_cap: int, variant: Variant, c: int) -> SearchResult:
    explored = 0
    wit, n = feasible(None, variant, c, cap_units, state_cap, space=sp)
    explored += n
    if wit is None:
        raise BudgetCapExceeded(f"no pebbling within {Fraction(cap_units, c)} pebbles")
    lo, hi = 0, cap_units  # hi is feasible
    best = wit
    while lo < hi:
        mid = (lo + hi) // 2
        w, n = feasible(None, variant, c, mid, state_cap, space=sp)
        explored += n
        if w is None:
            lo = mid + 1
        else:
            hi, best = mid, w
    return SearchResult(Fraction(hi, c), best, explored, c)
