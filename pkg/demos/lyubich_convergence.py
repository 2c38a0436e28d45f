"""Convergence of the balanced backward-orbit approximants.

For a seed y off the exceptional set, the measures mu_n^y (index-weighted
averages over R^{-n}(y)) converge weakly to the unique invariant measure of
maximal entropy.  This script tabulates the push-forward invariance residual
against the test-function library as n grows, for z^2 (limit: arclength on
the unit circle) and for the gasket map (z^3 - 16/27)/z.

Run:  python demos/lyubich_convergence.py [--csv atoms.csv]
"""

import sys

from kmsdyn import TestFunctionLibrary, lyubich, lyubich_invariance_residual, parse_map
from kmsdyn.projective import SpherePoint
from kmsdyn.serialize import write_sphere_atoms_csv

lib = TestFunctionLibrary.sphere()

for expr, seed, n_max in (("z^2", 2.0, 14), ("(z^3-16/27)/z", 0.5 + 0.5j, 9)):
    R = parse_map(expr)
    print(f"map {expr}: invariance residual of mu_n^{seed}")
    last = None
    for n in range(0, n_max + 1, 2):
        mu = lyubich(R, SpherePoint.from_affine(seed), n)
        res = lyubich_invariance_residual(R, mu, lib)
        ratio = "" if last is None else f"  (x {res / last:.3f})"
        print(f"  n={n:2d}  atoms={mu.n_atoms:7d}  residual={res:.3e}{ratio}")
        last = res
    print()

if "--csv" in sys.argv:
    path = sys.argv[sys.argv.index("--csv") + 1]
    mu = lyubich(parse_map("(z^3-16/27)/z"), SpherePoint.from_affine(0.5 + 0.5j), 9)
    write_sphere_atoms_csv(mu, path)
    print(f"wrote {mu.n_atoms} gasket-map atoms to {path}")
