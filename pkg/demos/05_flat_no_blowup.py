"""Bounded neck gradient for the partially flat gap.

When the conductors share a genuinely flat piece of boundary, the field
in the gap stays bounded as the gap closes: Theta/delta is 1/|flat set|
^(1/(p-1)) on the flat set, independent of eps.  The sweep shows the
neck-center gradient settling at |F/sigma|^(1/(p-1)) where F is the flux
of the directly solved touching-limit problem.

Scaled-down schedule for a quick run; the acceptance suite runs the full
one.
"""

from pneck.geometry import default_flat_spec
from pneck.harness import fit_rate, sweep
from pneck.solver import limit_flux_estimate

spec = default_flat_spec(1e-2)
p = 2.0
records = sweep(spec, p, [1e-2, 3e-3, 1e-3, 3e-4], h_far=0.25, neck_fraction=0.3)
print(f"{'eps':>9} {'grad center':>12} {'(U1-U2)/Theta':>14} {'mesh':>8} {'time':>7}")
for r in records:
    print(f"{r.eps:9.1e} {r.grad_center:12.5f} {r.u_diff_over_theta():14.5f} "
          f"{r.mesh_size:8d} {r.runtime_s:6.1f}s")

slope, r2 = fit_rate(records, y="grad_center")
print(f"\nfitted slope of grad vs eps: {slope:+.4f} (bounded field: slope -> 0)")

F = limit_flux_estimate(spec.with_epsilon(0.0), p=p, h_far=0.25, neck_fraction=0.3)
sigma = 2.0 * spec.profile.sigma_half_width
lead = (abs(F) / sigma) ** (1.0 / (p - 1.0))
print(f"touching-limit flux F = {F:.5f}; leading neck gradient |F/sigma|^(1/(p-1)) = {lead:.5f}")
print(f"(the sweep approaches it from below as the eps-dependent correction dies out)")
