"""Walk the full KMS phase portrait of R(z) = z^2 + 1.

The map has branched points {0, inf} and a single exceptional point inf, so
the portrait shows every phenomenon at once: a state at inf for all beta >= 0,
a second state anchored at 0 appearing only above log 2, the invariant
(Lyubich) state exactly at log 2, and certified non-existence of any state
charging a generic point below log 2.

Run:  python demos/rational_phase_portrait.py
"""

import math

from kmsdyn import (
    TestFunctionLibrary,
    check_K1,
    check_K2,
    classify,
    divergence_witness,
    kms_measure,
    parse_map,
)
from kmsdyn.projective import SpherePoint

R = parse_map("z^2+1")
lib = TestFunctionLibrary.sphere()
zero = SpherePoint.zero()
log2 = math.log(2.0)

print("map: z^2 + 1, degree", R.n)
print("branched points:", [(str(p), e) for p, e in R.branch_data().branch_points])
print("exceptional set:", R.exceptional_points().case_tag,
      [str(p) for p in R.exceptional_points().points])
print()

print("phase portrait over a beta grid (log 2 = %.6f):" % log2)
for beta in (0.0, 0.3, 0.6, None, 0.8, 1.5, 3.0):
    rep = classify(R, beta=beta, critical=beta is None)
    labels = [f"{s.kind}@{s.label}" for s in rep.extreme_states]
    shown = "critical" if beta is None else f"{beta:g}"
    print(f"  beta={shown:>8}: {rep.regime:<13} states: {labels}")
print()

beta = 1.0
km = kms_measure(R, zero, beta, depth=14)
print(f"mu_{{beta,0}} at beta={beta}: {km.measure.n_atoms} atoms,")
print(f"  normalization {km.normalization:.8f} (infinite-series value {1 - 2 / math.e:.8f})")
print(f"  tail bound    {km.tail_bound:.3e}")
k1 = check_K1(R, km.measure, beta, lib)
k2 = check_K2(R, km.measure, beta, lib)
print(f"  trace-condition residuals: K1 {k1.max_residual:.3e}, K2 {k2.max_violation:.3e}")
print()

print("below log 2 no state can charge a generic point; witness certificate:")
rep = divergence_witness(R, zero, 0.6, depth=8)
print(f"  seed 0, witness {rep.witness} at generation {rep.generation}:")
print(f"  any trace-condition measure charging 0 needs mass >= {rep.partial_sum:.1f}")
