#!/usr/bin/env python3
"""Scriptable external model speaking the XQP/1 line protocol.

Modes:
    const    constant --value for every row (the echo model)
    sum      sum of the row's numeric fields (deterministic, nontrivial)
    random   fresh random number per row (impure on purpose)
    short    answers one line short, then exits
    garbage  answers non-numeric lines
    nonfinite answers inf
    badshake replies HELLO instead of OK
"""

import argparse
import random
import sys


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--mode", default="const")
    ap.add_argument("--value", type=float, default=0.5)
    args = ap.parse_args()

    handshake = sys.stdin.readline()
    if not handshake.startswith("XQP/1 "):
        return 1
    if args.mode == "badshake":
        print("HELLO", flush=True)
        return 0
    print("OK", flush=True)

    rng = random.Random()
    while True:
        line = sys.stdin.readline()
        if not line or line.strip() == "QUIT":
            return 0
        if not line.startswith("PREDICT "):
            return 1
        n = int(line.split()[1])
        rows = [sys.stdin.readline() for _ in range(n)]
        answers = n - 1 if args.mode == "short" else n
        for i in range(answers):
            if args.mode == "sum":
                print(sum(float(tok) for tok in rows[i].strip().split(",")))
            elif args.mode == "random":
                print(rng.random())
            elif args.mode == "garbage":
                print("banana")
            elif args.mode == "nonfinite":
                print("inf")
            else:
                print(args.value)
        sys.stdout.flush()
        if args.mode == "short":
            return 0


if __name__ == "__main__":
    sys.exit(main())
