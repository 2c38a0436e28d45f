"""Tour of the built-in contraction systems.

For each preset: branch structure, the orbit-condition certificate, the
Hutchinson approximant's low moments, and the classification at three
temperatures.  The twisted gasket also builds its three word-sum KMS states.
Point clouds can be dumped to CSV for plotting.

Run:  python demos/ifs_gallery.py [--cloud-csv PREFIX]
"""

import math
import sys

import numpy as np

from kmsdyn import (
    TestFunctionLibrary,
    classify_ifs,
    hutchinson,
    integrate,
    kms_measure_ifs,
    orbit_condition,
    preset,
)
from kmsdyn.serialize import write_planar_atoms_csv

prefix = None
if "--cloud-csv" in sys.argv:
    prefix = sys.argv[sys.argv.index("--cloud-csv") + 1]

for name in ("tent", "binary", "sierpinski", "sierpinski-twisted"):
    gamma = preset(name)
    data = gamma.branch_structure()
    oc = orbit_condition(gamma)
    print(f"== {name}: {gamma.n} maps in dimension {gamma.dim}, "
          f"log N = {math.log(gamma.n):.4f}")
    print(f"   branch points: {[np.round(x, 9).tolist() for x in data.branch_points]}")
    print(f"   branch values: {[np.round(y, 9).tolist() for y, _p in data.branch_values]}")
    print(f"   orbit condition: {'certified' if oc.certified else 'inconclusive'}")

    mu = hutchinson(gamma, 12)
    lib = TestFunctionLibrary.plane(degree=2, box=gamma.bounding_box())
    moments = {f.exponents: integrate(mu, f) for f in lib.functions if sum(f.exponents) == 1}
    print(f"   Hutchinson approximant: {mu.n_atoms} atoms, first moments "
          f"{ {k: round(v, 6) for k, v in moments.items()} }")

    for beta, label in ((0.8 * math.log(gamma.n), "below"), (None, "at"),
                        (1.5 * math.log(gamma.n), "above")):
        rep = classify_ifs(gamma, beta=beta, critical=beta is None)
        print(f"   {label:>5} log N: {len(rep.extreme_states)} extreme state(s)")

    if prefix is not None and gamma.dim == 2:
        path = f"{prefix}-{name}.csv"
        write_planar_atoms_csv(hutchinson(gamma, 0, chaos_samples=100_000, seed=1), path)
        print(f"   wrote chaos-game cloud to {path}")
    print()

tw = preset("sierpinski-twisted")
beta = math.log(9.0)
print(f"twisted gasket word-sum states at beta = log 9 (prefactor {1 - 3 / 9:.4f}):")
for b in tw.branch_structure().branch_points:
    km = kms_measure_ifs(tw, b, beta, depth=8)
    print(f"   anchor {np.round(b, 6).tolist()}: {km.measure.n_atoms} atoms, "
          f"mass {km.measure.total_mass():.6f}, tail {km.tail_bound:.1e}")
