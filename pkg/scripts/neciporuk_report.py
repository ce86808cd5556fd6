"""Counting lower bounds next to compiled upper bounds.

    python3 scripts/neciporuk_report.py --d 2 --h 3 --ks 2 4 8
"""
import argparse

from treeeval.bounds import neciporuk_table, consistency_check


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--h", type=int, default=3)
    ap.add_argument("--ks", type=int, nargs="+", default=[2, 4, 8])
    args = ap.parse_args()

    for k in args.ks:
        print(f"## d={args.d} h={args.h} k={k}\n")
        print(neciporuk_table(args.d, args.h, k).to_markdown())
        rep = consistency_check(args.d, args.h, k, raise_on_failure=False)
        print(f"compiled: det {rep.det_states} states (table {rep.det_entry}, counting {rep.det_counting}); "
              f"nondet {rep.nondet_states} states (table {rep.nondet_entry}, counting {rep.nondet_counting}); "
              f"{'consistent' if rep.ok else 'INCONSISTENT'}\n")


if __name__ == "__main__":
    main()
