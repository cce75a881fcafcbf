"""Kropina: worst generic-vs-closed-form Ricci discrepancy as a function of the cone margin.

Directions close to the boundary of the cone beta > 0 make F = alpha^2/beta blow up; this
shows how much accuracy the generic fourth-order jets keep there.
"""

import argparse

import numpy as np

from finsler_wpric import alphabeta as ab
from finsler_wpric import core
from finsler_wpric.harness import random_metric, random_sample


def sweep(margins, metrics, per_metric, seed):
    rows = []
    for margin in margins:
        rng = np.random.default_rng(seed)
        worst = 0.0
        for k in range(metrics):
            m = random_metric("kropina", 2 + k % 2, [seed, k])
            for _ in range(per_metric):
                s = random_sample(m, rng, cone_margin=margin)
                closed = ab.kropina_ricci(ab.frame_for(m, s.x), np.array(s.y))
                generic = core.ricci(m, s)
                worst = max(worst, abs(generic - closed) / max(abs(closed), abs(generic), 1e-300))
        rows.append((margin, worst))
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--margins", default="0.001,0.01,0.05,0.1,0.2")
    p.add_argument("--metrics", type=int, default=40)
    p.add_argument("--per-metric", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    margins = [float(v) for v in args.margins.split(",")]
    print(f"{'margin':>8}  max rel |Ric generic - Ric closed|")
    for margin, worst in sweep(margins, args.metrics, args.per_metric, args.seed):
        print(f"{margin:8.3f}  {worst:.2e}")


if __name__ == "__main__":
    main()
