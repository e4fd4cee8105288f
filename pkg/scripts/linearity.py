"""Operation count and wall clock of certification on synthetic radial chains.

    python3 scripts/linearity.py [--sizes 1000 10000 100000] [--repeat 3]

Fits the log-log slope of both quantities against the number of nodes.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from admitcert.certify import certify
from admitcert.graph import OpCounter
from admitcert.oracle import radial_chain


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[10**3, 10**4, 10**5])
    parser.add_argument("--repeat", type=int, default=3, help="best-of runs for wall clock")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    ops, wall = [], []
    print(f"{'nodes':>9} {'ops':>11} {'ops/node':>9} {'seconds':>9} verdict")
    for n in args.sizes:
        net = radial_chain(n, args.seed)
        best = float("inf")
        for _ in range(args.repeat):
            counter = OpCounter()
            start = time.perf_counter()
            cert = certify(net, counter=counter)
            best = min(best, time.perf_counter() - start)
        ops.append(counter.count)
        wall.append(best)
        print(f"{n:>9} {counter.count:>11} {counter.count / n:>9.2f} {best:>9.3f} {cert.verdict.value}")

    if len(args.sizes) > 1:
        x = np.log(args.sizes)
        print(f"slope ops  {np.polyfit(x, np.log(ops), 1)[0]:.3f}")
        print(f"slope time {np.polyfit(x, np.log(wall), 1)[0]:.3f}")


if __name__ == "__main__":
    main()
