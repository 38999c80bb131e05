#!/usr/bin/env python3
"""How GED runtime and exactness behave as graphs grow.

For each size, random pairs are scored with the default solver; the table
shows how often the answer is certified exact and how far the reported
distance sits above the lower bound.

    python3 scripts/ged_scaling.py --sizes 4 6 8 12 20 30 --pairs 20 --budget 1.0
"""

from __future__ import annotations

import argparse
import random
import statistics
import sys
import time

from archeval.ged import compute_ged
from archeval.model import ArchEdge, ArchGraph, ArchNode

VOCAB = ["Gateway", "Auth", "User", "Order", "Payment", "Cache", "Database", "Queue", "Search", "Logger",
         "Report", "Notify", "Upload", "Admin", "Catalog", "Session"]


def random_pair(rng: random.Random, n: int, density: float) -> tuple[ArchGraph, ArchGraph]:
    def one() -> ArchGraph:
        nodes = tuple(ArchNode(f"v{i}", f"{rng.choice(VOCAB)} Service") for i in range(n))
        m = int(density * n)
        edges = tuple(ArchEdge(f"v{rng.randrange(n)}", f"v{rng.randrange(n)}") for _ in range(m))
        return ArchGraph(nodes, edges)

    return one(), one()


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="GED solver scaling")
    ap.add_argument("--sizes", type=int, nargs="+", default=[4, 6, 8, 12, 20, 30])
    ap.add_argument("--pairs", type=int, default=20)
    ap.add_argument("--density", type=float, default=1.5, help="edges per node")
    ap.add_argument("--budget", type=float, default=1.0, help="seconds per pair")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    print(f"{'nodes':>6} {'exact%':>7} {'gap':>6} {'mean ms':>9} {'max ms':>9}")
    for n in args.sizes:
        times, exact, gaps = [], 0, []
        for _ in range(args.pairs):
            a, b = random_pair(rng, n, args.density)
            t0 = time.perf_counter()
            res = compute_ged(a, b, budget=args.budget)
            times.append((time.perf_counter() - t0) * 1000)
            exact += res.exact
            gaps.append(res.distance - res.lower_bound)
        print(f"{n:>6} {100 * exact / args.pairs:>6.0f}% {statistics.fmean(gaps):>6.2f} "
              f"{statistics.fmean(times):>9.1f} {max(times):>9.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
