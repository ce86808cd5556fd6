"""Pebble configurations, move legality for every game variant, sequence
validation, and the one-move-per-line text format.

All weights are :class:`fractions.Fraction`; nothing here touches floats.

Move semantics (node ``i``, black value ``b``, white value ``w``):

``DecreaseBlack(i, a)``
    rule (i): ``b(i) -= a``.
``IncreaseWhite(i, a)``
    rule (ii): ``w(i) += a``.
``Finish(i, new_b, new_w, decreases)``
    rule (iii): needs every child at value 1.  Sets ``b(i) = new_b >= b(i)``,
    ``w(i) = new_w <= w(i)`` and lowers children's black values by the given
    amounts in the same move.  ``new_w = 0`` is the literal rule; a partial
    white decrease costs the same as a full one followed by rule (ii).
``WhiteSlide(i, j)``
    rule (iv): every child of ``i`` except ``j`` has value 1 and
    ``w(i) + value(j) >= 1``; then ``w(i) = 0`` and ``w(j)`` rises until
    ``value(j) = 1``.  With ``w(i) = 1`` this is the plain white sliding
    move; the fractional case is what the 8/3 sequence on T^4_2 uses.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

from .dag import PebbleDag, as_dag
from .tree import TreeShape

ZERO = Fraction(0)
ONE = Fraction(1)


class Variant(enum.Enum):
    BLACK = "black"
    BLACK_WHITE = "bw"
    FRACTIONAL = "fractional"
    FRACTIONAL_WHITE_SLIDE = "whiteslide"

    @property
    def whole(self) -> bool:
        return self in (Variant.BLACK, Variant.BLACK_WHITE)


class PebblingError(Exception):
    pass


class IllegalMove(PebblingError):
    def __init__(self, reason: str, rule: str = "", index: int | None = None):
        self.reason = reason
        self.rule = rule
        self.index = index
        where = f"move {index}: " if index is not None else ""
        tag = f"[rule {rule}] " if rule else ""
        super().__init__(f"{where}{tag}{reason}")


class RootNeverBlack(PebblingError):
    pass


class NonEmptyEnd(PebblingError):
    pass


@dataclass(frozen=True)
class PebbleConfig:
    black: tuple[Fraction, ...]
    white: tuple[Fraction, ...]

    @classmethod
    def empty(cls, n: int) -> PebbleConfig:
        z = (ZERO,) * n
        return cls(z, z)

    def b(self, i: int) -> Fraction:
        return self.black[i - 1]

    def w(self, i: int) -> Fraction:
        return self.white[i - 1]

    def value(self, i: int) -> Fraction:
        return self.black[i - 1] + self.white[i - 1]

    @property
    def total(self) -> Fraction:
        # most entries are zero; skipping them avoids slow Fraction additions
        return sum((x for x in self.black if x), ZERO) + sum((x for x in self.white if x), ZERO)

    def is_empty(self) -> bool:
        return not any(self.black) and not any(self.white)

    def describe(self) -> str:
        parts = []
        for i, (b, w) in enumerate(zip(self.black, self.white), start=1):
            if b or w:
                parts.append(f"{i}:b={b},w={w}" if w else f"{i}:b={b}")
        return " ".join(parts) or "(empty)"


@dataclass(frozen=True)
class DecreaseBlack:
    node: int
    amount: Fraction = ONE


@dataclass(frozen=True)
class IncreaseWhite:
    node: int
    amount: Fraction = ONE


@dataclass(frozen=True)
class Finish:
    node: int
    new_b: Fraction = ONE
    new_w: Fraction = ZERO
    decreases: tuple[tuple[int, Fraction], ...] = ()


@dataclass(frozen=True)
class WhiteSlide:
    node: int
    child: int


PebbleMove = Union[DecreaseBlack, IncreaseWhite, Finish, WhiteSlide]


def _check_whole(variant: Variant, config: PebbleConfig, nodes: Iterable[int]) -> None:
    if not variant.whole:
        return
    for i in nodes:
        b, w = config.b(i), config.w(i)
        if b not in (ZERO, ONE) or w not in (ZERO, ONE):
            raise IllegalMove(f"node {i} has non-whole weight b={b}, w={w}", "whole")
        if variant is Variant.BLACK and w:
            raise IllegalMove(f"white pebble on node {i} in black pebbling", "black")


def apply_move(target: TreeShape | PebbleDag, config: PebbleConfig, move: PebbleMove,
               variant: Variant) -> PebbleConfig:
    dag = as_dag(target)
    black = list(config.black)
    white = list(config.white)

    def node_ok(i):
        if not 1 <= i <= dag.n:
            raise IllegalMove(f"no node {i}")

    touched = [move.node]
    node_ok(move.node)
    i = move.node
    if isinstance(move, DecreaseBlack):
        if move.amount <= 0:
            raise IllegalMove("decrease amount must be positive", "i")
        if move.amount > black[i - 1]:
            raise IllegalMove(f"node {i} has black value {black[i - 1]} < {move.amount}", "i")
        black[i - 1] -= move.amount
    elif isinstance(move, IncreaseWhite):
        if variant is Variant.BLACK:
            raise IllegalMove("white pebbles are not allowed in black pebbling", "ii")
        if move.amount <= 0:
            raise IllegalMove("increase amount must be positive", "ii")
        if black[i - 1] + white[i - 1] + move.amount > 1:
            raise IllegalMove(f"node {i} would exceed value 1", "ii")
        white[i - 1] += move.amount
    elif isinstance(move, Finish):
        kids = dag.children[i - 1]
        for c in kids:
            if config.value(c) != 1:
                raise IllegalMove(f"child {c} of node {i} has value {config.value(c)}, not 1", "iii")
        if move.new_b < black[i - 1]:
            raise IllegalMove(f"finish cannot lower b({i})", "iii")
        if not 0 <= move.new_w <= white[i - 1]:
            raise IllegalMove(f"finish cannot raise w({i})", "iii")
        if move.new_b + move.new_w > 1:
            raise IllegalMove(f"node {i} would exceed value 1", "iii")
        black[i - 1] = move.new_b
        white[i - 1] = move.new_w
        seen = set()
        for c, amt in move.decreases:
            if c not in kids:
                raise IllegalMove(f"{c} is not a child of {i}", "iii")
            if c in seen:
                raise IllegalMove(f"child {c} decreased twice", "iii")
            seen.add(c)
            if not 0 <= amt <= black[c - 1]:
                raise IllegalMove(f"cannot decrease b({c}) by {amt}", "iii")
            black[c - 1] -= amt
            touched.append(c)
    elif isinstance(move, WhiteSlide):
        if variant is not Variant.FRACTIONAL_WHITE_SLIDE:
            raise IllegalMove("white sliding is not allowed in this game", "iv")
        kids = dag.children[i - 1]
        j = move.child
        if j not in kids:
            raise IllegalMove(f"{j} is not a child of {i}", "iv")
        for c in kids:
            if c != j and config.value(c) != 1:
                raise IllegalMove(f"child {c} of node {i} has value {config.value(c)}, not 1", "iv")
        wi = white[i - 1]
        if wi <= 0 or wi + config.value(j) < 1:
            raise IllegalMove(f"w({i}) = {wi} cannot fill node {j}", "iv")
        white[i - 1] = ZERO
        white[j - 1] = ONE - black[j - 1]
        touched.append(j)
    else:
        raise TypeError(f"unknown move {move!r}")

    new = PebbleConfig(tuple(black), tuple(white))
    _check_whole(variant, new, touched)
    return new


@dataclass(frozen=True)
class PebbleSequence:
    target: PebbleDag
    moves: tuple[PebbleMove, ...]

    def __post_init__(self):
        object.__setattr__(self, "target", as_dag(self.target))
        object.__setattr__(self, "moves", tuple(self.moves))

    def configs(self, variant: Variant) -> Iterator[PebbleConfig]:
        """C_0 .. C_tau; raises IllegalMove (with index) on the first bad move."""
        cfg = PebbleConfig.empty(self.target.n)
        yield cfg
        for idx, mv in enumerate(self.moves):
            try:
                cfg = apply_move(self.target, cfg, mv, variant)
            except IllegalMove as exc:
                raise IllegalMove(exc.reason, exc.rule, idx) from None
            yield cfg

    def to_text(self) -> str:
        head = []
        if self.target.shape is not None:
            head.append(f"tree d={self.target.shape.d} h={self.target.shape.h}")
        return "\n".join(head + [format_move(m) for m in self.moves]) + "\n"


def validate_sequence(seq: PebbleSequence, variant: Variant) -> Fraction:
    """Cost (max total weight) of a legal pebbling; raises otherwise."""
    roots = set(seq.target.roots)
    done: set[int] = set()
    cost = ZERO
    cfg = None
    for cfg in seq.configs(variant):
        cost = max(cost, cfg.total)
        for r in roots - done:
            if cfg.b(r) == 1:
                done.add(r)
    if done != roots:
        raise RootNeverBlack(f"roots never black-pebbled: {sorted(roots - done)}")
    if not cfg.is_empty():
        raise NonEmptyEnd(f"pebbles left at the end: {cfg.describe()}")
    return cost


def sequence_cost(seq: PebbleSequence, variant: Variant) -> Fraction:
    return max(c.total for c in seq.configs(variant))


# --- text format ---------------------------------------------------------------
#
#   dec <node> <amount>
#   white <node> <amount>
#   finish <node> b=<q> w=<q> [dec <child>=<q> ...]
#   slide <node> <child>
#   tree d=<d> h=<h>          (optional header naming the target)
#
# Amounts are integers or p/q.  '#' starts a comment.


def format_move(m: PebbleMove) -> str:
    if isinstance(m, DecreaseBlack):
        return f"dec {m.node} {m.amount}"
    if isinstance(m, IncreaseWhite):
        return f"white {m.node} {m.amount}"
    if isinstance(m, Finish):
        s = f"finish {m.node} b={m.new_b} w={m.new_w}"
        if m.decreases:
            s += " dec " + " ".join(f"{c}={a}" for c, a in m.decreases)
        return s
    if isinstance(m, WhiteSlide):
        return f"slide {m.node} {m.child}"
    raise TypeError(m)


_KV = re.compile(r"^(\w+)=(-?\d+(?:/\d+)?)$")


def parse_move(line: str) -> PebbleMove:
    parts = line.split()
    kind = parts[0]
    try:
        if kind == "dec" and len(parts) == 3:
            return DecreaseBlack(int(parts[1]), Fraction(parts[2]))
        if kind == "white" and len(parts) == 3:
            return IncreaseWhite(int(parts[1]), Fraction(parts[2]))
        if kind == "slide" and len(parts) == 3:
            return WhiteSlide(int(parts[1]), int(parts[2]))
        if kind == "finish":
            node = int(parts[1])
            new_b, new_w = ONE, ZERO
            rest = parts[2:]
            decs = []
            in_dec = False
            for tok in rest:
                if tok == "dec":
                    in_dec = True
                    continue
                m = _KV.match(tok)
                if not m:
                    raise ValueError(tok)
                key, val = m.group(1), Fraction(m.group(2))
                if in_dec:
                    decs.append((int(key), val))
                elif key == "b":
                    new_b = val
                elif key == "w":
                    new_w = val
                else:
                    raise ValueError(tok)
            return Finish(node, new_b, new_w, tuple(decs))
    except (ValueError, IndexError):
        pass
    raise ValueError(f"cannot parse move: {line!r}")


def parse_sequence(text: str, target: TreeShape | PebbleDag | None = None) -> PebbleSequence:
    moves = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("tree "):
            kv = dict(tok.split("=") for tok in line.split()[1:])
            if target is None:
                target = TreeShape(int(kv["d"]), int(kv["h"]))
            continue
        moves.append(parse_move(line))
    if target is None:
        raise ValueError("sequence has no 'tree' header and no target was given")
    return PebbleSequence(as_dag(target), tuple(moves))


def format_moves(moves: Sequence[PebbleMove]) -> str:
    return "\n".join(format_move(m) for m in moves) + "\n"
