"""Gap profiles and inclusion geometry.

The neck between the two conductors is described by a gap function
delta(x) = eps + h1(x) - h2(x).  Two regimes matter: a partially flat
gap (delta = eps on a whole segment, growing quadratically outside it)
and a power-law cusp (delta = eps + a|x|^(1+gamma)).  This script prints
the gap along the neck for both and shows the closed boundary curves the
mesher works with.
"""

import numpy as np

from pneck.geometry import (
    boundary_curves,
    default_cusp_spec,
    default_flat_spec,
    dist_to_flat,
    gap,
)

flat = default_flat_spec(0.01)
cusp = default_cusp_spec(0.01)

print("flat profile: w = 0.5, q = 1, eps = 0.01")
print(f"{'x':>6} {'dist to flat set':>18} {'gap':>12}")
for x in (0.0, 0.3, 0.5, 0.6, 0.8, 1.0):
    d = dist_to_flat(flat.profile, x)
    print(f"{x:6.2f} {d:18.3f} {gap(flat.profile, flat.epsilon, x):12.6f}")

print("\ncusp profile: gamma = 0.5, a = 1, eps = 0.01")
print(f"{'x':>6} {'gap':>12}")
for x in (0.0, 0.01, 0.05, 0.2, 0.5, 1.0):
    print(f"{x:6.2f} {gap(cusp.profile, cusp.epsilon, x):12.6f}")

print("\nclosed boundary curves (chord tolerance 0.01):")
for name, spec in (("flat", flat), ("cusp", cusp)):
    inc1, inc2, outer = boundary_curves(spec, arc_tol=0.01)
    print(f"  {name}: inclusion-1 {len(inc1)} vertices "
          f"(top y = {inc1[:, 1].max():.3f}), inclusion-2 {len(inc2)}, "
          f"outer circle {len(outer)} vertices at radius {spec.outer_radius}")
    tip = inc1[np.argmin(inc1[:, 1])]
    print(f"         lowest point of inclusion 1: ({tip[0]:.4f}, {tip[1]:.4f})"
          f"  [eps/2 = {spec.epsilon / 2}]")
