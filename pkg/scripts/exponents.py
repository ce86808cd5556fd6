"""State counts of the compiled programs as k grows, with least-squares
exponents of k.

    python3 scripts/exponents.py --d 2 --h 3 --ks 2 3 4 5 6 7 8
"""
import argparse

from treeeval.bp import growth_exponent
from treeeval.compilers import compile_black_default, compile_fractional_default

COMPILERS = {
    "det_full": lambda d, h, k: compile_black_default(d, h, k, layout="full")[0].size,
    "det_reachable": lambda d, h, k: compile_black_default(d, h, k, layout="reachable")[0].size,
    "nondet": lambda d, h, k: compile_fractional_default(d, h, k)[0].size,
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--h", type=int, default=3)
    ap.add_argument("--ks", type=int, nargs="+", default=list(range(2, 9)))
    args = ap.parse_args()

    sizes = {name: [(k, make(args.d, args.h, k)) for k in args.ks] for name, make in COMPILERS.items()}
    print("| k | " + " | ".join(COMPILERS) + " |")
    print("|---" * (len(COMPILERS) + 1) + "|")
    for i, k in enumerate(args.ks):
        print(f"| {k} | " + " | ".join(str(sizes[name][i][1]) for name in COMPILERS) + " |")
    print("| exponent | " + " | ".join(f"{growth_exponent(sizes[name]):.3f}" for name in COMPILERS) + " |")


if __name__ == "__main__":
    main()
