"""The limits driving U1 - U2, checked through two independent pipelines.

Flat gap: (U1 - U2)/Theta tends to sgn(F)|F|^(1/(p-1)) where F is the
flux of the touching-limit problem, solved directly on the merged-hole
mesh.  Cusp gap: the limit is sgn(F)(K a0^((n-1)/(1+gamma))|F|)^(1/(p-1))
with F extrapolated from the near-neck flux of the sweep itself.

Scaled-down schedules for a quick run; the acceptance suite uses the
full ones.
"""

import json

from pneck.geometry import default_cusp_spec, default_flat_spec
from pneck.harness import check_theorem_3_4, check_theorem_4_3

eps_list = [1e-2, 3e-3, 1e-3, 3e-4]

print("flat gap, p = 2:")
rep = check_theorem_3_4(default_flat_spec(1e-2), eps_list, 2.0, h_far=0.25, neck_fraction=0.3)
print(f"  (U1-U2)/Theta per eps: {[round(v, 5) for v in rep['u_diff_over_theta']]}")
print(f"  extrapolated: {rep['lhs_extrapolated']:.5f}")
print(f"  predicted from the merged-hole flux {rep['flux_limit']:.5f}: {rep['rhs_predicted']:.5f}")
print(f"  relative gap: {rep['rel_gap']:.4f}")

print("\ncusp gap, p = 2, gamma = 0.5, a0 = 1:")
rep = check_theorem_4_3(default_cusp_spec(1e-2), eps_list, 2.0, h_far=0.25, neck_fraction=0.3)
print(f"  (U1-U2)/Theta per eps: {[round(v, 5) for v in rep['u_diff_over_theta']]}")
print(f"  extrapolated: {rep['lhs_extrapolated']:.5f}")
print(f"  K = {rep['k_const']:.7f}, extrapolated flux = {rep['flux_limit']:.5f}")
print(f"  predicted K*F: {rep['rhs_predicted']:.5f}")
print(f"  relative gap: {rep['rel_gap']:.4f}")

print("\nfull reports are JSON-serializable:")
print(json.dumps({k: rep[k] for k in ("p", "gamma", "a0", "rel_gap")}))
