"""A stand-in external evaluator for tests and protocol debugging.

Speaks the line protocol on stdin/stdout and returns f = (x1, 1 - x1)
for two objectives. Failure modes are switchable so error paths can be
exercised: garbled handshakes, wrong objective counts, slow replies, and
mid-run crashes.

Run as: python -m samoo.mock_evaluator [--m 2] [--d 8] [options]
"""

from __future__ import annotations

import argparse
import sys
import time


def _objectives(x: list[float], m: int) -> list[float]:
    f = [x[0], 1.0 - x[0]]
    while len(f) < m:
        f.append(sum(x) / len(x))
    return f[:m]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--m", type=int, default=2, help="number of objectives to report")
    parser.add_argument("--d", type=int, default=8, help="number of variables to report")
    parser.add_argument("--sleep", type=float, default=0.0, help="seconds to wait before each reply")
    parser.add_argument("--garbage", action="store_true", help="reply nonsense to the handshake")
    parser.add_argument("--bad-arity", action="store_true", help="reply with one objective too many")
    parser.add_argument("--fail-after", type=int, default=0,
                        help="exit nonzero after this many evaluations (0 = never)")
    args = parser.parse_args(argv)

    evaluated = 0
    for line in sys.stdin:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "HELLO":
            if args.garbage:
                print("BANANA", flush=True)
            else:
                print(f"READY {args.m} {args.d}", flush=True)
        elif parts[0] == "EVAL":
            if args.sleep > 0:
                time.sleep(args.sleep)
            fe = parts[1]
            x = [float(v) for v in parts[2:]]
            f = _objectives(x, args.m + (1 if args.bad_arity else 0))
            print("OBJ " + fe + " " + " ".join(repr(v) for v in f), flush=True)
            evaluated += 1
            if args.fail_after and evaluated >= args.fail_after:
                return 3
        elif parts[0] == "BYE":
            return 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
