"""WPRic0 - Ric along a ray of the Funk disk, generic pipeline next to the closed form."""

import argparse

import numpy as np

from finsler_wpric import alphabeta as ab
from finsler_wpric import core
from finsler_wpric.metrics import BusemannHausdorff, Funk, RiemannianDensity


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--angle", type=float, default=0.0, help="direction y as an angle (radians)")
    p.add_argument("--steps", type=int, default=9)
    args = p.parse_args()
    m = Funk(2)
    y = (float(np.cos(args.angle)), float(np.sin(args.angle)))
    print(f"{'x1':>6} {'F':>12} {'WPRic0-Ric':>14} {'(b-a)(3a+b)/4':>14} {'S/F':>8}")
    for x1 in np.linspace(-0.9, 0.9, args.steps):
        x = (float(x1), 0.0)
        b = core.curvature_bundle(m, BusemannHausdorff(), RiemannianDensity(), (x, y))
        c = ab.frame_for(m, x).contract(y)
        closed = (c.beta - c.alpha) * (3 * c.alpha + c.beta) / 4
        print(f"{x1:6.2f} {b.F:12.6f} {b.WPRic0 - b.Ric:14.8f} {closed:14.8f} {b.S / b.F:8.5f}")


if __name__ == "__main__":
    main()
