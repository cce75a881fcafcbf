"""Run the Randers and Kropina oracle comparisons at a chosen size and print per-quantity maxima."""

import argparse
import time

import numpy as np

from finsler_wpric.harness import Checks, _oracle


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--metrics", type=int, default=100, help="metrics per family (alternating n=2, n=3)")
    p.add_argument("--per-metric", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--family", choices=["randers", "kropina", "both"], default="both")
    args = p.parse_args()
    families = ["randers", "kropina"] if args.family == "both" else [args.family]
    for fam in families:
        checks = Checks()
        t0 = time.perf_counter()
        _oracle(fam, per_metric=args.per_metric)(np.random.default_rng([args.seed, 7]),
                                                 args.metrics * args.per_metric, checks)
        print(f"{fam}: {args.metrics} metrics x {args.per_metric} samples in {time.perf_counter() - t0:.1f} s")
        for c in checks.items.values():
            print(f"  {'ok  ' if c.passed else 'FAIL'} {c.name:40s} max_rel={c.max_rel:.2e}")


if __name__ == "__main__":
    main()
