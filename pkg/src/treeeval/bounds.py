"""Nečiporuk-style counting bounds for branching programs solving tree
evaluation.

Counting is exact big-integer arithmetic.  Closed-form table entries that
involve ``log2 k`` or half-integer powers of ``k`` are evaluated with
:mod:`decimal` at ``PRECISION`` significant digits; purely rational entries
are exact.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction

PRECISION = 50


class Machine(enum.Enum):
    DET_KWAY = "det-kway"
    DET_BINARY = "det-binary"
    NONDET_KWAY = "nondet-kway"
    NONDET_BINARY = "nondet-binary"

    @property
    def deterministic(self) -> bool:
        return self in (Machine.DET_KWAY, Machine.DET_BINARY)

    @property
    def binary(self) -> bool:
        return self in (Machine.DET_BINARY, Machine.NONDET_BINARY)


class Problem(enum.Enum):
    FT = "FT"
    BT = "BT"


@dataclass(frozen=True)
class BoundModel:
    machine: Machine
    problem: Problem

    def range_size(self, k: int) -> int:
        return k if self.problem is Problem.FT else 2

    def branching(self, k: int) -> int:
        return 2 if self.machine.binary else k

    @property
    def name(self) -> str:
        return f"{self.machine.value}/{self.problem.value}"


ALL_MODELS = tuple(BoundModel(m, p) for m in Machine for p in Problem)
# entries shown to be optimal in k at height 3
TIGHT_AT_H3 = frozenset({
    BoundModel(Machine.DET_KWAY, Problem.FT),
    BoundModel(Machine.DET_KWAY, Problem.BT),
    BoundModel(Machine.NONDET_KWAY, Problem.BT),
})


class ConsistencyViolation(AssertionError):
    pass


def count_programs(model: BoundModel, s: int, v: int, k: int) -> int:
    """Upper bound on the number of programs with ``s`` non-final states,
    each querying one of ``v`` variables; edges branch ``k`` ways (2 for
    binary machines).

    deterministic:    v^s * (s + |R|)^(s*b)
    nondeterministic: v^s * (|R| + 1)^(s*b) * (2^s)^(s*b)
    """
    if s < 1 or v < 1:
        raise ValueError("s and v must be positive")
    r = model.range_size(k)
    b = model.branching(k)
    if model.machine.deterministic:
        return v**s * (s + r) ** (s * b)
    return v**s * (r + 1) ** (s * b) * (1 << (s * s * b))


def min_states_for_restrictions(model: BoundModel, v: int, k: int, required: int) -> int:
    """Least ``s >= 1`` with ``count_programs(model, s, v, k) >= required``."""
    if required < 1:
        raise ValueError("required must be positive")
    hi = 1
    while count_programs(model, hi, v, k) < required:
        hi *= 2
    lo = hi // 2 + 1 if hi > 1 else 1
    while lo < hi:
        mid = (lo + hi) // 2
        if count_programs(model, mid, v, k) >= required:
            hi = mid
        else:
            lo = mid + 1
    return hi


def litter_count(d: int, h: int, k: int) -> int:
    return k**d * (d ** (h - 2) - 1) // (d - 1)


def value_bit_count(k: int) -> int:
    return max(1, (k - 1).bit_length())


def counting_bound(model: BoundModel, d: int, h: int, k: int) -> int:
    """``|R| + litters * s_min``: the counting argument carried out exactly.

    Each litter of ``d`` sibling table entries induces ``|R|**(k**d)``
    subfunctions; binary machines see each k-ary variable as
    ``ceil(log2 k)`` bits.
    """
    r = model.range_size(k)
    v = d * value_bit_count(k) if model.machine.binary else d
    need = r ** (k**d)
    return r + litter_count(d, h, k) * min_states_for_restrictions(model, v, k, need)


@dataclass(frozen=True)
class BoundEntry:
    model: BoundModel
    value: Decimal
    exact: Fraction | None
    formula: str
    tight_at_h3: bool


@dataclass
class BoundTable:
    d: int
    h: int
    k: int
    litters: int
    entries: dict = field(default_factory=dict)
    vacuous: bool = False

    def get(self, machine: Machine, problem: Problem) -> BoundEntry:
        return self.entries[BoundModel(machine, problem)]

    def rows(self) -> list[tuple[str, BoundEntry, BoundEntry]]:
        return [(m.value, self.get(m, Problem.FT), self.get(m, Problem.BT)) for m in Machine]

    def to_csv(self) -> str:
        lines = ["model,FT,BT,FT_formula,BT_formula"]
        for name, ft, bt in self.rows():
            lines.append(f"{name},{_fmt(ft.value)},{_fmt(bt.value)},\"{ft.formula}\",\"{bt.formula}\"")
        return "\n".join(lines) + "\n"

    def to_markdown(self) -> str:
        head = f"Lower bounds at d={self.d}, h={self.h}, k={self.k} (litters: {self.litters})"
        lines = [head, "", "| model | FT | BT |", "|---|---|---|"]
        for name, ft, bt in self.rows():
            cells = [(_fmt(e.value) + (" *" if e.tight_at_h3 else "")) for e in (ft, bt)]
            lines.append(f"| {name} | {cells[0]} | {cells[1]} |")
        lines.append("")
        lines.append("`*` marks entries that are optimal in k at height 3.")
        if self.vacuous:
            lines.append("At h=2 the litter partition is empty: the method is vacuous and every entry is 0.")
        return "\n".join(lines) + "\n"


def _fmt(x: Decimal) -> str:
    with localcontext() as ctx:
        ctx.prec = 12
        y = (+x).normalize()
        return "0" if y.is_zero() else format(y, "f")


def neciporuk_table(d: int, h: int, k: int) -> BoundTable:
    if d < 2 or h < 2 or k < 2:
        raise ValueError("d, h, k must all be >= 2")
    top = d ** (h - 2) - 1
    with localcontext() as ctx:
        ctx.prec = PRECISION
        K = Decimal(k)
        log_k = K.ln() / Decimal(2).ln()
        sqrt_log = log_k.sqrt()
        half = K ** (3 * d - 1)  # k^(3d/2 - 1/2) squared
        k_nk = half.sqrt()
        k_nb = (K ** (3 * d)).sqrt()  # k^(3d/2)
        formulas = {
            (Machine.DET_KWAY, Problem.FT): (Fraction(top, 4 * (d - 1) ** 2), K ** (2 * d - 1), None,
                                              "(d^(h-2)-1)/(4(d-1)^2) * k^(2d-1)"),
            (Machine.DET_KWAY, Problem.BT): (Fraction(top, 3 * (d - 1) ** 2), K ** (2 * d - 1), "div_log",
                                              "(d^(h-2)-1)/(3(d-1)^2) * k^(2d-1)/log k"),
            (Machine.DET_BINARY, Problem.FT): (Fraction(top, 5 * (d - 1) ** 2), K ** (2 * d), None,
                                                "(d^(h-2)-1)/(5(d-1)^2) * k^(2d)"),
            (Machine.DET_BINARY, Problem.BT): (Fraction(top, 4 * d * (d - 1)), K ** (2 * d), "div_log",
                                                "(d^(h-2)-1)/(4d(d-1)) * k^(2d)/log k"),
            (Machine.NONDET_KWAY, Problem.FT): (Fraction(top, 2 * d - 2), k_nk, "mul_sqrt",
                                                 "(d^(h-2)-1)/(2d-2) * k^(3d/2-1/2) * sqrt(log k)"),
            (Machine.NONDET_KWAY, Problem.BT): (Fraction(top, 2 * d - 2), k_nk, None,
                                                 "(d^(h-2)-1)/(2d-2) * k^(3d/2-1/2)"),
            (Machine.NONDET_BINARY, Problem.FT): (Fraction(top, 2 * d - 2), k_nb, "mul_sqrt",
                                                   "(d^(h-2)-1)/(2d-2) * k^(3d/2) * sqrt(log k)"),
            (Machine.NONDET_BINARY, Problem.BT): (Fraction(top, 2 * d - 2), k_nb, None,
                                                   "(d^(h-2)-1)/(2d-2) * k^(3d/2)"),
        }
        table = BoundTable(d, h, k, litter_count(d, h, k), vacuous=(top == 0))
        for (m, p), (coef, power, extra, text) in formulas.items():
            val = Decimal(coef.numerator) / Decimal(coef.denominator) * power
            if extra == "div_log":
                val = val / log_k
            elif extra == "mul_sqrt":
                val = val * sqrt_log
            exact = None
            if extra is None and power == power.to_integral_value():
                exact = coef * int(power)
            model = BoundModel(m, p)
            table.entries[model] = BoundEntry(model, +val, exact, text, model in TIGHT_AT_H3)
    return table


@dataclass
class ConsistencyReport:
    d: int
    h: int
    k: int
    det_states: int
    nondet_states: int
    det_entry: Decimal
    nondet_entry: Decimal
    det_counting: int
    nondet_counting: int
    ok: bool

    def to_json(self) -> dict:
        return {k: (str(v) if isinstance(v, Decimal) else v) for k, v in self.__dict__.items()}


def consistency_check(d: int, h: int, k: int, det_states: int | None = None,
                      nondet_states: int | None = None, raise_on_failure: bool = True) -> ConsistencyReport:
    """Compiled upper bounds must dominate the lower bounds.

    Compares the deterministic compiler against the det-FT entry and the
    nondeterministic compiler against the nondet-BT entry, and both against
    the exact counting bound.
    """
    from .compilers import compile_black_default, compile_fractional_default
    from .tree import ProblemKind

    if det_states is None:
        det_states = compile_black_default(d, h, k, ProblemKind.FUNCTION, "reachable")[0].size
    if nondet_states is None:
        nondet_states = compile_fractional_default(d, h, k)[0].size
    table = neciporuk_table(d, h, k)
    det_e = table.get(Machine.DET_KWAY, Problem.FT).value
    nd_e = table.get(Machine.NONDET_KWAY, Problem.BT).value
    det_c = counting_bound(BoundModel(Machine.DET_KWAY, Problem.FT), d, h, k)
    nd_c = counting_bound(BoundModel(Machine.NONDET_KWAY, Problem.BT), d, h, k)
    ok = det_states >= det_e and nondet_states >= nd_e and det_states >= det_c and nondet_states >= nd_c
    rep = ConsistencyReport(d, h, k, det_states, nondet_states, det_e, nd_e, det_c, nd_c, ok)
    if not ok and raise_on_failure:
        raise ConsistencyViolation(f"upper bound below lower bound: {rep.to_json()}")
    return rep
