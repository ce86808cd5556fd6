"""Linear programs over pebbling move skeletons, solved exactly.

A skeleton fixes the sequence of move kinds and nodes; the black and white
weights after every step become LP variables and the cost ``p`` is
minimized.  Only weights a step may change get fresh variables; everything
else is aliased to the previous step's variable.

The solver is a two-phase simplex over :class:`fractions.Fraction` with
Bland's rule, so it terminates and returns exact optima.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from .dag import PebbleDag, as_dag
from .pebbling import (
    ZERO,
    DecreaseBlack,
    Finish,
    IncreaseWhite,
    PebbleSequence,
    Variant,
    WhiteSlide,
    validate_sequence,
)


class Infeasible(Exception):
    pass


class Unbounded(Exception):
    pass


# --- exact simplex -------------------------------------------------------------


@dataclass
class LinearProgram:
    """minimize ``objective . x`` subject to rows ``(coeffs, sense, rhs)``,
    ``x >= 0``.  ``sense`` is one of ``"<="``, ``">="``, ``"=="``."""

    n_vars: int
    objective: dict[int, Fraction]
    rows: list[tuple[dict[int, Fraction], str, Fraction]]

    def solve(self) -> tuple[Fraction, list[Fraction]]:
        return simplex(self)


def _pivot(T, rhs, obj, r, e):
    row = T[r]
    piv = row[e]
    if piv != 1:
        for k in row:
            row[k] /= piv
        rhs[r] /= piv
    for i, other in enumerate(T):
        if i == r:
            continue
        f = other.get(e)
        if f:
            for k, v in row.items():
                nv = other.get(k, ZERO) - f * v
                if nv:
                    other[k] = nv
                else:
                    other.pop(k, None)
            rhs[i] -= f * rhs[r]
    f = obj[0].get(e)
    if f:
        for k, v in row.items():
            nv = obj[0].get(k, ZERO) - f * v
            if nv:
                obj[0][k] = nv
            else:
                obj[0].pop(k, None)
        obj[1] -= f * rhs[r]


def _run(T, rhs, basis, obj, allowed):
    """Iterate until optimal.  ``obj = [reduced costs, -value]``."""
    while True:
        enter = None
        for k in sorted(obj[0]):
            if obj[0][k] < 0 and k in allowed:
                enter = k
                break
        if enter is None:
            return
        best = None
        for i, row in enumerate(T):
            a = row.get(enter)
            if a and a > 0:
                ratio = rhs[i] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise Unbounded("objective is unbounded")
        r = best[1]
        _pivot(T, rhs, obj, r, enter)
        basis[r] = enter


def simplex(lp: LinearProgram) -> tuple[Fraction, list[Fraction]]:
    n = lp.n_vars
    T: list[dict[int, Fraction]] = []
    rhs: list[Fraction] = []
    basis: list[int] = []
    col = n
    artificials = set()
    for coeffs, sense, b in lp.rows:
        row = {k: Fraction(v) for k, v in coeffs.items() if v}
        b = Fraction(b)
        if b < 0:
            row = {k: -v for k, v in row.items()}
            b = -b
            sense = {"<=": ">=", ">=": "<=", "==": "=="}[sense]
        if sense == "<=":
            row[col] = Fraction(1)
            basis.append(col)
            col += 1
        else:
            if sense == ">=":
                row[col] = Fraction(-1)
                col += 1
            elif sense != "==":
                raise ValueError(sense)
            row[col] = Fraction(1)
            artificials.add(col)
            basis.append(col)
            col += 1
        T.append(row)
        rhs.append(b)

    allowed = set(range(col))
    if artificials:
        red: dict[int, Fraction] = {a: Fraction(1) for a in artificials}
        val = ZERO
        for i, row in enumerate(T):
            if basis[i] in artificials:
                for k, v in row.items():
                    nv = red.get(k, ZERO) - v
                    if nv:
                        red[k] = nv
                    else:
                        red.pop(k, None)
                val -= rhs[i]
        obj = [red, val]
        _run(T, rhs, basis, obj, allowed)
        if obj[1] != 0:
            raise Infeasible("constraints have no solution")
        # drive zero-level artificials out of the basis
        keep = []
        for i in range(len(T)):
            if basis[i] in artificials:
                cand = next((k for k in sorted(T[i]) if k not in artificials), None)
                if cand is None:
                    continue  # redundant row
                _pivot(T, rhs, [{}, ZERO], i, cand)
                basis[i] = cand
            keep.append(i)
        T = [T[i] for i in keep]
        rhs = [rhs[i] for i in keep]
        basis = [basis[i] for i in keep]
        for row in T:
            for a in artificials:
                row.pop(a, None)
        allowed -= artificials

    red = {k: Fraction(v) for k, v in lp.objective.items() if v}
    val = ZERO
    for i, row in enumerate(T):
        cb = lp.objective.get(basis[i], ZERO) if basis[i] < n else ZERO
        if cb:
            for k, v in row.items():
                nv = red.get(k, ZERO) - cb * v
                if nv:
                    red[k] = nv
                else:
                    red.pop(k, None)
            val -= cb * rhs[i]
    obj = [red, val]
    _run(T, rhs, basis, obj, allowed)
    x = [ZERO] * n
    for i, bvar in enumerate(basis):
        if bvar < n:
            x[bvar] = rhs[i]
    return -obj[1], x


# --- skeletons -----------------------------------------------------------------


@dataclass(frozen=True)
class MoveSkeleton:
    """Move kinds and nodes without amounts: ``("dec", i)``, ``("white", i)``,
    ``("finish", i)`` or ``("slide", i, j)``."""

    steps: tuple[tuple, ...]

    def __len__(self):
        return len(self.steps)


def skeleton_of(seq: PebbleSequence) -> MoveSkeleton:
    steps = []
    for m in seq.moves:
        if isinstance(m, DecreaseBlack):
            steps.append(("dec", m.node))
        elif isinstance(m, IncreaseWhite):
            steps.append(("white", m.node))
        elif isinstance(m, Finish):
            steps.append(("finish", m.node))
        elif isinstance(m, WhiteSlide):
            steps.append(("slide", m.node, m.child))
        else:
            raise TypeError(m)
    return MoveSkeleton(tuple(steps))


@dataclass(frozen=True)
class LpResult:
    cost: Fraction
    sequence: PebbleSequence
    root_steps: tuple[int, ...]


class _SkeletonLP:
    def __init__(self, skeleton: MoveSkeleton, dag: PebbleDag):
        self.dag = dag
        self.steps = skeleton.steps
        n = dag.n
        self.n_vars = 1  # variable 0 is p
        self.rows: list = []
        tau = len(self.steps)
        # bvar[t][v] / wvar[t][v]: variable id or None (meaning the constant 0)
        cur_b: list = [None] * (n + 1)
        cur_w: list = [None] * (n + 1)
        self.bvar = [list(cur_b)]
        self.wvar = [list(cur_w)]
        for t, step in enumerate(self.steps, start=1):
            kind, i = step[0], step[1]
            if not 1 <= i <= n:
                raise ValueError(f"no node {i}")
            prev_b, prev_w = list(cur_b), list(cur_w)
            if kind == "dec":
                cur_b[i] = self._new()
                self._le(cur_b[i], prev_b[i])
            elif kind == "white":
                cur_w[i] = self._new()
                self._le(prev_w[i], cur_w[i])
            elif kind == "finish":
                for j in dag.children[i - 1]:
                    self._value_one(prev_b[j], prev_w[j])
                    cur_b[j] = self._new()
                    self._le(cur_b[j], prev_b[j])
                cur_b[i] = self._new()
                self._le(prev_b[i], cur_b[i])
                cur_w[i] = self._new()
                self._le(cur_w[i], prev_w[i])
            elif kind == "slide":
                j = step[2]
                if j not in dag.children[i - 1]:
                    raise ValueError(f"{j} is not a child of {i}")
                for x in dag.children[i - 1]:
                    if x != j:
                        self._value_one(prev_b[x], prev_w[x])
                # w(i) + value(j) >= 1, then w(i) = 0 and value(j) = 1
                self.rows.append((self._lin((prev_w[i], 1), (prev_b[j], 1), (prev_w[j], 1)), ">=", Fraction(1)))
                cur_w[i] = None
                cur_w[j] = self._new()
                self._value_one(cur_b[j], cur_w[j])
            else:
                raise ValueError(f"unknown step kind {kind!r}")
            for v in set(range(1, n + 1)):
                if cur_b[v] is not prev_b[v] or cur_w[v] is not prev_w[v]:
                    self.rows.append((self._lin((cur_b[v], 1), (cur_w[v], 1)), "<=", Fraction(1)))
            self.bvar.append(list(cur_b))
            self.wvar.append(list(cur_w))
            terms = [(x, 1) for x in cur_b[1:] + cur_w[1:] if x is not None]
            terms.append((0, -1))
            self.rows.append((self._lin(*terms), "<=", ZERO))
        for v in range(1, n + 1):
            for x in (cur_b[v], cur_w[v]):
                if x is not None:
                    self.rows.append(({x: Fraction(1)}, "==", ZERO))

    def _new(self) -> int:
        self.n_vars += 1
        return self.n_vars - 1

    @staticmethod
    def _lin(*terms) -> dict:
        out: dict = {}
        for x, a in terms:
            if x is not None:
                out[x] = out.get(x, ZERO) + Fraction(a)
        return out

    def _le(self, x, y):
        """x <= y where either side may be the constant 0."""
        if x is None:
            return
        self.rows.append((self._lin((x, 1), (y, -1)), "<=", ZERO))

    def _value_one(self, b, w):
        self.rows.append((self._lin((b, 1), (w, 1)), "==", Fraction(1)))

    def solve(self, root_steps: dict[int, int]):
        rows = list(self.rows)
        for r, t in root_steps.items():
            x = self.bvar[t][r]
            if x is None:
                raise Infeasible(f"root {r} carries no weight after step {t}")
            rows.append(({x: Fraction(1)}, "==", Fraction(1)))
        lp = LinearProgram(self.n_vars, {0: Fraction(1)}, rows)
        return lp.solve()

    def realize(self, x: Sequence[Fraction]) -> PebbleSequence:
        def val(var):
            return ZERO if var is None else x[var]

        moves = []
        for t, step in enumerate(self.steps, start=1):
            kind, i = step[0], step[1]
            pb, pw, cb, cw = self.bvar[t - 1], self.wvar[t - 1], self.bvar[t], self.wvar[t]
            if kind == "dec":
                amt = val(pb[i]) - val(cb[i])
                if amt:
                    moves.append(DecreaseBlack(i, amt))
            elif kind == "white":
                amt = val(cw[i]) - val(pw[i])
                if amt:
                    moves.append(IncreaseWhite(i, amt))
            elif kind == "finish":
                decs = tuple((j, val(pb[j]) - val(cb[j])) for j in self.dag.children[i - 1]
                             if val(pb[j]) != val(cb[j]))
                moves.append(Finish(i, val(cb[i]), val(cw[i]), decs))
            else:
                if val(pw[i]):
                    moves.append(WhiteSlide(i, step[2]))
        return PebbleSequence(self.dag, tuple(moves))


def lp_min_over_skeleton(skeleton: MoveSkeleton, target,
                         variant: Variant = Variant.FRACTIONAL_WHITE_SLIDE) -> LpResult:
    """Exact optimum of the skeleton's LP, with a sequence that attains it.

    Every root must be whole-black after one of its finishing steps; each
    choice of those steps is a separate LP and the best one wins.
    """
    dag = as_dag(target)
    model = _SkeletonLP(skeleton, dag)
    candidates = []
    for r in dag.roots:
        ts = [t for t, s in enumerate(skeleton.steps, start=1) if s[0] == "finish" and s[1] == r]
        if not ts:
            raise Infeasible(f"root {r} is never finished")
        candidates.append([(r, t) for t in ts])
    best = None
    for choice in product(*candidates):
        try:
            cost, x = model.solve(dict(choice))
        except Infeasible:
            continue
        if best is None or cost < best[0]:
            best = (cost, x, tuple(t for _, t in choice))
    if best is None:
        raise Infeasible("no assignment of weights realizes the skeleton")
    cost, x, steps = best
    seq = model.realize(x)
    real = validate_sequence(seq, variant)
    assert real <= cost, (real, cost)
    return LpResult(real, seq, steps)
