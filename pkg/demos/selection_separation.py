"""Contrast FIX-B (no continuous selection) with FIX-C (selections exist).

Prints the smallest feasible grid step for both fixtures on successively
finer grids, then writes an SVG of FIX-C with its certificate.
"""

import sys

from dixlab import fixture, in_mag, psi, render
from dixlab.selection import SelectionProblem, min_max_step


def smallest_step(name, key, points):
    fx = fixture(name, points=points)
    regs = [psi(fx[key], p) for p in range(points)]
    return min_max_step(SelectionProblem(fx.algebra.base, regs))


def main(out="fix_c.svg"):
    print(f"{'points':>6} {'FIX-B c':>10} {'FIX-C c_eps':>12}")
    for n in (21, 41, 81, 161):
        print(f"{n:6d} {smallest_step('FIX-B', 'c', n):10.5f} "
              f"{smallest_step('FIX-C', 'c_eps', n):12.5f}")
    fx = fixture("FIX-C")
    v = in_mag(fx["c_eps"])
    print("in_mag(c_eps):", v.status)
    n = fx.algebra.n_points
    with open(out, "wb") as fh:
        fh.write(render(fx.algebra, fx["c_eps"], [n // 4, n // 2, 3 * n // 4], v.certificate))
    print("wrote", out)


if __name__ == "__main__":
    main(*sys.argv[1:])
