from fractions import Fraction as F

import pytest
from hypothesis import assume, given, settings, strategies as st

from treeeval.lp import (
    Infeasible,
    LinearProgram,
    MoveSkeleton,
    Unbounded,
    lp_min_over_skeleton,
    skeleton_of,
    simplex,
)
from treeeval.pebbling import PebbleSequence, PebblingError, Variant, parse_sequence, validate_sequence
from treeeval.strategies import strategy_black, strategy_bw, strategy_fractional, strategy_whiteslide_h4
from treeeval.tree import TreeShape
from fixtures import HALF_FIXTURE, perturbed_fractional

scipy_optimize = pytest.importorskip("scipy.optimize")


def scipy_value(lp: LinearProgram):
    import numpy as np

    c = np.zeros(lp.n_vars)
    for j, a in lp.objective.items():
        c[j] = float(a)
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for coeffs, sense, rhs in lp.rows:
        row = np.zeros(lp.n_vars)
        for j, a in coeffs.items():
            row[j] = float(a)
        if sense == "<=":
            A_ub.append(row), b_ub.append(float(rhs))
        elif sense == ">=":
            A_ub.append(-row), b_ub.append(-float(rhs))
        else:
            A_eq.append(row), b_eq.append(float(rhs))
    res = scipy_optimize.linprog(c, A_ub=A_ub or None, b_ub=b_ub or None, A_eq=A_eq or None,
                                 b_eq=b_eq or None, bounds=[(0, None)] * lp.n_vars, method="highs")
    return res


@st.composite
def small_lps(draw):
    n = draw(st.integers(1, 4))
    coef = st.integers(-3, 3).map(F)
    rows = []
    for _ in range(draw(st.integers(1, 4))):
        coeffs = {j: draw(coef) for j in range(n)}
        rows.append((coeffs, draw(st.sampled_from(["<=", ">=", "=="])), F(draw(st.integers(-4, 6)))))
    # a box keeps most draws bounded
    rows += [({j: F(1)}, "<=", F(5)) for j in range(n)]
    objective = {j: draw(coef) for j in range(n)}
    return LinearProgram(n, objective, rows)


@settings(max_examples=150, deadline=None)
@given(small_lps())
def test_simplex_matches_scipy(lp):
    ref = scipy_value(lp)
    try:
        val, x = simplex(lp)
    except Infeasible:
        assert ref.status == 2
        return
    except Unbounded:
        assert ref.status == 3
        return
    assert ref.status == 0
    assert float(val) == pytest.approx(ref.fun, abs=1e-7)
    # the exact solution is feasible
    for coeffs, sense, rhs in lp.rows:
        lhs = sum(a * x[j] for j, a in coeffs.items())
        assert {"<=": lhs <= rhs, ">=": lhs >= rhs, "==": lhs == rhs}[sense]
    assert all(v >= 0 for v in x)


def test_degenerate_lp_terminates():
    # classic cycling example for the largest-coefficient rule
    rows = [
        ({0: F(1, 4), 1: F(-8), 2: F(-1), 3: F(9)}, "<=", F(0)),
        ({0: F(1, 2), 1: F(-12), 2: F(-1, 2), 3: F(3)}, "<=", F(0)),
        ({2: F(1)}, "<=", F(1)),
    ]
    val, _ = simplex(LinearProgram(4, {0: F(-3, 4), 1: F(20), 2: F(-1, 2), 3: F(6)}, rows))
    assert val == F(-5, 4)


def test_black_skeleton():
    assert lp_min_over_skeleton(skeleton_of(strategy_black(2, 2)), TreeShape(2, 2)).cost == 2


def test_half_pebble_skeleton():
    seq = parse_sequence(HALF_FIXTURE)
    res = lp_min_over_skeleton(skeleton_of(seq), seq.target)
    assert res.cost == F(5, 2)
    assert validate_sequence(res.sequence, Variant.FRACTIONAL_WHITE_SLIDE) == F(5, 2)


def test_no_root_finish_is_infeasible():
    skel = MoveSkeleton((("finish", 2), ("finish", 3), ("dec", 2), ("dec", 3)))
    with pytest.raises(Infeasible):
        lp_min_over_skeleton(skel, TreeShape(2, 2))


def test_bw_skeleton():
    res = lp_min_over_skeleton(skeleton_of(strategy_bw(2, 4)), TreeShape(2, 4))
    assert res.cost <= 3


def test_whiteslide_skeleton():
    seq = strategy_whiteslide_h4()
    assert lp_min_over_skeleton(skeleton_of(seq), seq.target).cost <= F(8, 3)


@pytest.mark.parametrize("make,variant", [
    (lambda: strategy_black(2, 3), Variant.BLACK),
    (lambda: strategy_bw(2, 3), Variant.BLACK_WHITE),
    (lambda: strategy_fractional(2, 3), Variant.FRACTIONAL),
    (lambda: strategy_black(3, 2), Variant.BLACK),
    (lambda: parse_sequence(HALF_FIXTURE), Variant.FRACTIONAL),
])
def test_lp_never_worse_than_the_sequence(make, variant):
    seq: PebbleSequence = make()
    res = lp_min_over_skeleton(skeleton_of(seq), seq.target)
    assert res.cost <= validate_sequence(seq, variant)


@settings(max_examples=25, deadline=None)
@given(perturbed_fractional([(2, 2), (2, 3)]))
def test_lp_never_worse_on_perturbed_sequences(seq):
    try:
        cost = validate_sequence(seq, Variant.FRACTIONAL)
    except PebblingError:
        assume(False)
    assert lp_min_over_skeleton(skeleton_of(seq), seq.target).cost <= cost
