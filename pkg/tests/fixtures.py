"""Pebbling sequences shared by several test files."""
from fractions import Fraction as F

from hypothesis import strategies as st

from treeeval.pebbling import DecreaseBlack, Finish, IncreaseWhite, PebbleSequence
from treeeval.strategies import strategy_fractional

# optimal 2.5-pebble sequence for the height-3 binary tree, written out by hand
HALF_FIXTURE = """\
tree d=2 h=3
finish 4 b=1 w=0
finish 5 b=1 w=0
finish 2 b=1/2 w=0 dec 4=1 5=1
finish 6 b=1 w=0
finish 7 b=1 w=0
finish 3 b=1 w=0 dec 6=1 7=1
white 2 1/2
finish 1 b=1 w=0 dec 3=1
dec 1 1
dec 2 1/2
finish 4 b=1 w=0
finish 5 b=1 w=0
finish 2 b=0 w=0 dec 4=1 5=1
"""


@st.composite
def perturbed_fractional(draw, shapes):
    """A valid fractional pebbling with some moves split or padded."""
    d, h = draw(st.sampled_from(shapes))
    base = strategy_fractional(d, h)
    moves = []
    for mv in base.moves:
        if isinstance(mv, DecreaseBlack) and mv.amount > F(1, 6) and draw(st.booleans()):
            part = draw(st.sampled_from([F(1, 6), F(1, 4), F(1, 3)]))
            if part < mv.amount:
                moves += [DecreaseBlack(mv.node, part), DecreaseBlack(mv.node, mv.amount - part)]
                continue
        if isinstance(mv, IncreaseWhite) and mv.amount > F(1, 6) and draw(st.booleans()):
            part = draw(st.sampled_from([F(1, 6), F(1, 4), F(1, 3)]))
            if part < mv.amount:
                moves += [IncreaseWhite(mv.node, part), IncreaseWhite(mv.node, mv.amount - part)]
                continue
        if isinstance(mv, Finish) and mv.new_b + mv.new_w < 1 and draw(st.booleans()):
            extra = draw(st.sampled_from([F(1, 6), F(1, 4), F(1, 3), F(1, 2)]))
            if mv.new_b + mv.new_w + extra <= 1:
                moves += [Finish(mv.node, mv.new_b + extra, mv.new_w, mv.decreases),
                          DecreaseBlack(mv.node, extra)]
                continue
        moves.append(mv)
    return PebbleSequence(base.target, tuple(moves))
