"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line
with its wall time.  Run on its own with ``pytest tests/test_acceptance.py``.
"""
import time
from contextlib import contextmanager
from fractions import Fraction as F

import pytest

from oracles import recursive_node_values, recursive_value
from treeeval.bounds import Machine, Problem, consistency_check, neciporuk_table
from treeeval.bp import check_correct, check_thrifty, growth_exponent
from treeeval.compilers import (
    compile_black_default,
    compile_boolean_logsave,
    compile_fractional_default,
)
from treeeval.dag import build_Gprime
from treeeval.pebbling import Variant, validate_sequence
from treeeval.search import min_pebbles
from treeeval.strategies import (
    black_formula,
    bw_formula,
    fractional_to_bw,
    fractional_upper,
    strategy_black,
    strategy_bw,
    strategy_fractional,
    strategy_whiteslide_h4,
)
from treeeval.tree import (
    ProblemKind,
    TreeShape,
    encode_pair,
    evaluate,
    node_values,
    random_instance,
    to_single_function,
)

GRID7 = [(2, 2, 2), (2, 2, 3), (2, 3, 2), (3, 2, 2)]


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def run(number: int, title: str, budget_s: float):
        start = time.perf_counter()
        status, note = "FAIL", ""
        try:
            yield
            elapsed = time.perf_counter() - start
            if elapsed > budget_s:
                note = f" (over the {budget_s:g}s budget)"
                raise AssertionError(f"criterion {number} took {elapsed:.1f}s, budget {budget_s:g}s")
            status = "PASS"
        finally:
            elapsed = time.perf_counter() - start
            with capsys.disabled():
                print(f"\n{status} criterion {number:2d} {title} [{elapsed:.1f}s]{note}")
    return run


def searched(target, variant, c=1):
    res = min_pebbles(target, variant, c)
    assert validate_sequence(res.witness, variant) == res.cost
    return res.cost


def test_c01_black_pebbling_numbers(criterion):
    with criterion(1, "black pebbling numbers", 60):
        for d, h in [(2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (3, 4)]:
            assert searched(TreeShape(d, h), Variant.BLACK) == (d - 1) * h - d + 2 == black_formula(d, h)


def test_c02_black_white_pebbling_numbers(criterion):
    with criterion(2, "black-white pebbling numbers", 300):
        for d, h in [(2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3)]:
            want = -(-(d - 1) * h // 2) + 1
            assert searched(TreeShape(d, h), Variant.BLACK_WHITE) == want == bw_formula(d, h)


def test_c03_fractional_discretized(criterion):
    with criterion(3, "fractional pebbling at granularity 2 and 3", 600):
        for h, want in ((3, F(5, 2)), (4, F(3))):
            shape = TreeShape(2, h)
            assert searched(shape, Variant.FRACTIONAL, 2) == want
            assert searched(shape, Variant.FRACTIONAL, 3) >= want


def test_c04_generated_strategies(criterion):
    with criterion(4, "generated strategies validate at their costs", 10):
        for d in (2, 3):
            for h in range(2, 7):
                assert validate_sequence(strategy_black(d, h), Variant.BLACK) == black_formula(d, h)
                assert validate_sequence(strategy_bw(d, h), Variant.BLACK_WHITE) == bw_formula(d, h)
                assert validate_sequence(strategy_fractional(d, h), Variant.FRACTIONAL) == fractional_upper(d, h)
        assert validate_sequence(strategy_whiteslide_h4(), Variant.FRACTIONAL_WHITE_SLIDE) == F(8, 3)


def test_c05_factor_two_conversion(criterion):
    with criterion(5, "fractional to black-white within a factor of two", 10):
        for h in (2, 3, 4):
            src = strategy_fractional(2, h)
            cost = validate_sequence(src, Variant.FRACTIONAL)
            assert validate_sequence(fractional_to_bw(src), Variant.BLACK_WHITE) <= 2 * cost


def test_c06_split_dag_black_cost(criterion):
    with criterion(6, "black pebbling of the pruned split DAG", 600):
        d, h, c = 2, 3, 2
        assert searched(build_Gprime(d, h, c), Variant.BLACK) == 6 == c * ((d - 1) * (h - 1) + 1)


def test_c07_compiled_programs_are_correct(criterion):
    with criterion(7, "compiled programs correct on every input", 900):
        for d, h, k in GRID7:
            bp, _ = compile_black_default(d, h, k)
            rep = check_correct(bp, TreeShape(d, h), ProblemKind.FUNCTION)
            assert rep.ok and rep.checked == k ** TreeShape(d, h).variable_count(k)
        shape = TreeShape(2, 3)
        for bp in (compile_fractional_default(2, 3, 2)[0], compile_boolean_logsave(2, 3, 2)[0]):
            rep = check_correct(bp, shape, ProblemKind.BOOLEAN)
            assert rep.ok and rep.checked == 2**16


def test_c08_thriftiness(criterion):
    with criterion(8, "thrift of the black and fractional compilers, logsave waste", 900):
        for d, h, k in GRID7:
            shape = TreeShape(d, h)
            assert check_thrifty(compile_black_default(d, h, k)[0], shape).ok
            assert check_thrifty(compile_fractional_default(d, h, k)[0], shape).ok
        # one block holding all of [k] makes the third phase query every table row
        bp, _ = compile_boolean_logsave(2, 3, 2, m=2)
        rep = check_thrifty(bp, TreeShape(2, 3))
        assert not rep.ok
        assert rep.counterexample is not None and len(rep.counterexample) == TreeShape(2, 3).variable_count(2)


def test_c09_growth_exponents(criterion):
    with criterion(9, "fitted growth exponents over k = 2..8", 600):
        ks = range(2, 9)
        det = growth_exponent([(k, compile_black_default(2, 3, k)[0].size) for k in ks])
        nondet = growth_exponent([(k, compile_fractional_default(2, 3, k)[0].size) for k in ks])
        assert 2.6 <= det <= 3.4, det
        assert 2.1 <= nondet <= 2.9, nondet


def test_c10_counting_bounds(criterion):
    with criterion(10, "counting bounds: spot values and consistency", 60):
        t = neciporuk_table(2, 3, 4)
        assert t.get(Machine.NONDET_KWAY, Problem.BT).value == 16
        assert t.get(Machine.DET_KWAY, Problem.FT).value == 16
        for d, h, k in GRID7:
            assert consistency_check(d, h, k).ok


def test_c11_one_function_reduction(criterion):
    with criterion(11, "single shared function reduction", 10):
        shape, k = TreeShape(2, 3), 3
        for seed in range(50):
            inst = random_instance(shape, k, seed)
            hat = to_single_function(inst).as_instance()
            for i, (v, vhat) in enumerate(zip(recursive_node_values(inst), node_values(hat)), start=1):
                assert vhat == encode_pair(i, v, k)
            assert evaluate(hat, ProblemKind.BOOLEAN) == (recursive_value(inst) == 1)


def test_c12_evaluator_matches_recursion(criterion):
    with criterion(12, "evaluator against plain recursion", 10):
        grid = [(d, h, k) for d in (2, 3) for h in (2, 3, 4) for k in (2, 3, 4)]
        for seed in range(1000):
            d, h, k = grid[seed % len(grid)]
            inst = random_instance(TreeShape(d, h), k, seed)
            assert evaluate(inst) == recursive_value(inst)
            assert list(node_values(inst)) == recursive_node_values(inst)
