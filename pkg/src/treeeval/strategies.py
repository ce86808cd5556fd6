"""Explicit pebbling strategies for complete d-ary trees, the hard-coded 8/3
white-sliding sequence for T^4_2, and the fractional -> black-white converter.

Every strategy returns a :class:`PebbleSequence` over the heap-numbered
tree; siblings are processed left to right.
"""
from __future__ import annotations

from fractions import Fraction

from .dag import as_dag
from .pebbling import (
    ONE,
    ZERO,
    DecreaseBlack,
    Finish,
    IncreaseWhite,
    PebbleConfig,
    PebbleSequence,
    Variant,
    WhiteSlide,
)
from .tree import TreeShape

HALF = Fraction(1, 2)


def black_formula(d: int, h: int) -> int:
    return (d - 1) * h - d + 2


def bw_formula(d: int, h: int) -> int:
    return -(-(d - 1) * h // 2) + 1


def fractional_upper(d: int, h: int) -> Fraction:
    return Fraction((d - 1) * h, 2) + 1


# --- black ---------------------------------------------------------------------


def _black_subtree(shape: TreeShape, node: int, out: list) -> None:
    """Leave a black pebble on ``node`` and nothing else below it."""
    kids = shape.children(node)
    for c in kids:
        _black_subtree(shape, c, out)
    out.append(Finish(node, ONE, ZERO, tuple((c, ONE) for c in kids)))


def strategy_black(d: int, h: int) -> PebbleSequence:
    shape = TreeShape(d, h)
    moves: list = []
    _black_subtree(shape, 1, moves)
    moves.append(DecreaseBlack(1, ONE))
    return PebbleSequence(as_dag(shape), tuple(moves))


# --- black-white ---------------------------------------------------------------
#
# Both constructions are split at a "critical time": pre(r, H) ends with a
# black pebble on r and few pebbles below it; post(r, H) then clears the
# subtree below r without touching r.  full(r, H, top) = pre + post and either
# leaves r black (top="black") or removes a white pebble already on r
# (top="white").


class _BW:
    def __init__(self, shape: TreeShape):
        self.shape = shape
        self.d = shape.d

    def top_finish(self, r, top, blacks):
        new_b = ONE if top == "black" else ZERO
        return [Finish(r, new_b, ZERO, tuple((c, ONE) for c in blacks))]

    def full(self, r, H, top):
        return self.pre(r, H, top) + self.post(r, H)

    def pre(self, r, H, top="black"):
        kids = list(self.shape.children(r))
        d = self.d
        if H == 2:
            return [Finish(c) for c in kids] + self.top_finish(r, top, kids)
        if d % 2 == 1:
            half = (d - 1) // 2
            mid = kids[half]
            moves = []
            for c in kids[:half]:
                moves += self.full(c, H - 1, "black")
            moves += self.pre(mid, H - 1)
            moves += [IncreaseWhite(c) for c in kids[half + 1:]]
            return moves + self.top_finish(r, top, kids[:half + 1])
        # even degree
        if H == 3:
            nb = d // 2 + 1
            moves = []
            for c in kids[:nb]:
                moves += self.full(c, 2, "black")
            moves += [IncreaseWhite(c) for c in kids[nb:]]
            return moves + self.top_finish(r, top, kids[:nb])
        moves = []
        for c in kids[:d // 2]:
            moves += self.one_level(c, H - 1, "black")
        pivot = kids[d // 2]
        grand = list(self.shape.children(pivot))
        for g in grand[:d // 2 - 1]:
            moves += self.full(g, H - 2, "black")
        moves += self.pre(grand[d // 2 - 1], H - 2)
        moves += [IncreaseWhite(g) for g in grand[d // 2:]]
        moves += [Finish(pivot, ONE, ZERO, tuple((g, ONE) for g in grand[:d // 2]))]
        moves += [IncreaseWhite(c) for c in kids[d // 2 + 1:]]
        return moves + self.top_finish(r, top, kids[:d // 2 + 1])

    def post(self, r, H):
        kids = list(self.shape.children(r))
        d = self.d
        if H == 2:
            return []
        if d % 2 == 1:
            half = (d - 1) // 2
            moves = self.post(kids[half], H - 1)
            for c in kids[half + 1:]:
                moves += self.full(c, H - 1, "white")
            return moves
        if H == 3:
            moves = []
            for c in kids[d // 2 + 1:]:
                moves += self.full(c, 2, "white")
            return moves
        pivot = kids[d // 2]
        grand = list(self.shape.children(pivot))
        moves = self.post(grand[d // 2 - 1], H - 2)
        for g in grand[d // 2:]:
            moves += self.full(g, H - 2, "white")
        for c in kids[d // 2 + 1:]:
            moves += self.one_level(c, H - 1, "white")
        return moves

    def one_level(self, r, H, top):
        """Even degree: settle r (height H) through its children, which are
        handled with height H-1 procedures only, so the recursion for even
        degree always steps the height by two."""
        kids = list(self.shape.children(r))
        half = self.d // 2
        moves = []
        for c in kids[:half]:
            moves += self.full(c, H - 1, "black")
        moves += self.pre(kids[half], H - 1)
        moves += [IncreaseWhite(c) for c in kids[half + 1:]]
        moves += self.top_finish(r, top, kids[:half + 1])
        moves += self.post(kids[half], H - 1)
        for c in kids[half + 1:]:
            moves += self.full(c, H - 1, "white")
        return moves


def strategy_bw(d: int, h: int) -> PebbleSequence:
    shape = TreeShape(d, h)
    b = _BW(shape)
    moves = b.pre(1, h) + [DecreaseBlack(1, ONE)] + b.post(1, h)
    return PebbleSequence(as_dag(shape), tuple(moves))


# --- fractional ----------------------------------------------------------------
#
# A(r, H)  = B(r, H); drop the black on r (all of it, or down to 1/2 for A');
#            C(r, H).
# B(r, H)  : run A' on the first d-1 children, B on the last child, add white
#            halves to the first d-1 children, then slide the last child's
#            black onto r while removing the black halves.
# C(r, H)  : C on the last child, then A on each of the first d-1 children,
#            whose finishing move removes the white half instead of
#            black-pebbling.


class _Frac:
    def __init__(self, shape: TreeShape):
        self.shape = shape

    def A(self, r, H, top="black", keep=ZERO):
        moves = self.B(r, H, top)
        if top == "black" and keep < 1:
            moves.append(DecreaseBlack(r, ONE - keep))
        return moves + self.C(r, H)

    def B(self, r, H, top="black"):
        kids = list(self.shape.children(r))
        new_b = ONE if top == "black" else ZERO
        if H == 2:
            return [Finish(c) for c in kids] + [Finish(r, new_b, ZERO, tuple((c, ONE) for c in kids))]
        moves = []
        for c in kids[:-1]:
            moves += self.A(c, H - 1, keep=HALF)
        moves += self.B(kids[-1], H - 1)
        moves += [IncreaseWhite(c, HALF) for c in kids[:-1]]
        decs = tuple((c, HALF) for c in kids[:-1]) + ((kids[-1], ONE),)
        # children keep no black: C(r, H) expects only white halves below r
        return moves + [Finish(r, new_b, ZERO, tuple(sorted(decs)))]

    def C(self, r, H):
        if H == 2:
            return []
        kids = list(self.shape.children(r))
        moves = self.C(kids[-1], H - 1)
        for c in kids[:-1]:
            moves += self.A(c, H - 1, top="white")
        return moves


def strategy_fractional(d: int, h: int) -> PebbleSequence:
    shape = TreeShape(d, h)
    moves = _Frac(shape).A(1, h)
    return PebbleSequence(as_dag(shape), tuple(moves))


# --- white sliding, T^4_2 ------------------------------------------------------


def strategy_whiteslide_h4() -> PebbleSequence:
    third, two_thirds = Fraction(1, 3), Fraction(2, 3)
    moves = [
        # two-pebble white-sliding pass over the subtree of node 2
        Finish(8), Finish(9),
        Finish(4, ONE, ZERO, ((8, ONE), (9, ONE))),
        IncreaseWhite(5),
        Finish(2, ONE, ZERO, ((4, ONE),)),
        DecreaseBlack(2, two_thirds),          # keep a third on node 2
        Finish(10),
        WhiteSlide(5, 11),
        DecreaseBlack(10),
        Finish(11, ZERO, ZERO),
        # right half
        Finish(12), Finish(13),
        Finish(6, third, ZERO, ((12, ONE), (13, ONE))),
        Finish(14), Finish(15),                 # first configuration at 8/3
        Finish(7, ONE, ZERO, ((14, ONE),)),
        DecreaseBlack(15),
        IncreaseWhite(6, two_thirds),
        Finish(3, ONE, ZERO, ((7, ONE),)),
        DecreaseBlack(6, third),
        IncreaseWhite(2, two_thirds),           # 8/3 again
        Finish(1, ONE, ZERO, ((3, ONE),)),
        DecreaseBlack(1), DecreaseBlack(2, third),
        # clear the 2/3 white on node 6
        Finish(12), Finish(13, third, ZERO),
        WhiteSlide(6, 13),
        DecreaseBlack(12),
        DecreaseBlack(13, third),
        Finish(13, ZERO, ZERO),
        # clear the 2/3 white on node 2
        Finish(8), Finish(9),
        Finish(4, ONE, ZERO, ((8, ONE), (9, ONE))),
        IncreaseWhite(5, third),
        WhiteSlide(2, 5),
        DecreaseBlack(4),
        Finish(10),
        WhiteSlide(5, 11),
        DecreaseBlack(10),
        Finish(11, ZERO, ZERO),
    ]
    return PebbleSequence(as_dag(TreeShape(2, 4)), tuple(moves))


# --- fractional -> whole black-white -------------------------------------------


def _threshold(cfg: PebbleConfig, i: int) -> tuple[int, int]:
    return (1 if cfg.b(i) >= HALF else 0, 1 if cfg.w(i) > HALF else 0)


def fractional_to_bw(seq: PebbleSequence, variant: Variant = Variant.FRACTIONAL) -> PebbleSequence:
    """Whole black-white pebbling with a black pebble where ``b >= 1/2`` and a
    white one where ``w > 1/2``; costs at most twice the input."""
    if variant is Variant.FRACTIONAL_WHITE_SLIDE:
        raise ValueError("white sliding moves have no whole counterpart here")
    dag = seq.target
    out: list = []
    configs = seq.configs(variant)
    prev = next(configs)
    for mv, cur in zip(seq.moves, configs):
        i = mv.node
        (pb, pw), (cb, cw) = _threshold(prev, i), _threshold(cur, i)
        if isinstance(mv, DecreaseBlack):
            if pb and not cb:
                out.append(DecreaseBlack(i, ONE))
        elif isinstance(mv, IncreaseWhite):
            if cw and not pw:
                out.append(IncreaseWhite(i, ONE))
        elif isinstance(mv, Finish):
            dropped = [c for c, _ in mv.decreases
                       if _threshold(prev, c)[0] and not _threshold(cur, c)[0]]
            if (pb, pw) != (cb, cw):
                out.append(Finish(i, Fraction(cb), Fraction(cw), tuple((c, ONE) for c in dropped)))
            else:
                out += [DecreaseBlack(c, ONE) for c in dropped]
        else:
            raise TypeError(f"cannot convert {mv!r}")
        prev = cur
    return PebbleSequence(dag, tuple(out))
