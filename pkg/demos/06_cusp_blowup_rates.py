"""Gradient blow-up rates for the power-law cusp gap.

With boundaries meeting like |x|^(1+gamma), the neck gradient blows up
as eps -> 0.  The rate sorts by p relative to (n+gamma)/(1+gamma):
eps^-1 below it, eps^-1 |ln eps|^(-1/(p-1)) at it, and the weaker
eps^(-(n-1)/((1+gamma)(p-1))) above it.  Log-log slopes of the sweep
recover the table.
"""

from pneck.asymptotics import blowup_exponent
from pneck.geometry import default_cusp_spec
from pneck.harness import fit_log_rate, fit_rate, sweep

spec = default_cusp_spec(1e-2)  # gamma = 0.5, critical p* = 5/3
eps_list = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4]

for p in (1.3, 2.0):
    records = sweep(spec, p, eps_list, h_far=0.25, neck_fraction=0.3)
    slope, r2 = fit_rate(records, y="grad_center")
    want = blowup_exponent(2, p, 0.5, "C1gamma")
    print(f"p={p}: fitted slope {slope:+.4f} (predicted -{want.power:.4g}), r^2 = {r2:.5f}")
    for r in records:
        print(f"   eps={r.eps:8.1e}  |Du|(0) = {r.grad_center:10.3f}")

print("\ncritical p = 5/3 (extra |ln eps| factor, deeper schedule):")
records = sweep(spec, 5 / 3, eps_list + [3e-5, 1e-5], h_far=0.25, neck_fraction=0.3)
for r in records:
    print(f"   eps={r.eps:8.1e}  |Du|(0)*eps = {r.grad_center * r.eps:10.6f}")
slope_log = fit_log_rate(records)
print(f"log-rate of |Du|(0)*eps against |ln eps|: {slope_log:+.3f} "
      f"(predicted -1/(p-1) = -1.5)")
