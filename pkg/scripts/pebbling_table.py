"""Search every pebbling game on small complete trees and compare with the
closed forms.  Prints a markdown table.

    python3 scripts/pebbling_table.py --d 2 --hs 2 3 4 5 --frac-hs 3 4
"""
import argparse
import time

from treeeval.pebbling import Variant
from treeeval.search import StateSpaceTooLarge, min_pebbles
from treeeval.strategies import black_formula, bw_formula, fractional_upper
from treeeval.tree import TreeShape

CLOSED_FORM = {Variant.BLACK: black_formula, Variant.BLACK_WHITE: bw_formula, Variant.FRACTIONAL: fractional_upper}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--hs", type=int, nargs="+", default=[2, 3, 4, 5])
    ap.add_argument("--frac-hs", type=int, nargs="+", default=[3, 4])
    ap.add_argument("--c", type=int, default=2, help="granularity for the fractional rows")
    ap.add_argument("--state-cap", type=int, default=5_000_000)
    args = ap.parse_args()

    cells = [(v, h, 1) for v in (Variant.BLACK, Variant.BLACK_WHITE) for h in args.hs]
    cells += [(Variant.FRACTIONAL, h, args.c) for h in args.frac_hs]
    print("| game | d | h | c | closed form | search | states | seconds |")
    print("|---|---|---|---|---|---|---|---|")
    for variant, h, c in cells:
        t0 = time.perf_counter()
        try:
            res = min_pebbles(TreeShape(args.d, h), variant, c, state_cap=args.state_cap)
            found, states = str(res.cost), res.states_explored
        except StateSpaceTooLarge as exc:
            found, states = f"cap exceeded ({exc})", ""
        print(f"| {variant.value} | {args.d} | {h} | {c} | {CLOSED_FORM[variant](args.d, h)} "
              f"| {found} | {states} | {time.perf_counter() - t0:.1f} |")


if __name__ == "__main__":
    main()
