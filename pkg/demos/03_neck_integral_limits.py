"""The neck integral limits behind the potential-difference asymptotics.

The normalized gap integral  int (Theta/delta)^(p-1) dx'  tends to 1 for
the flat gap and to 1/(K a0^((n-1)/(1+gamma))) for the cusp.  These are
pure 1-D quadratures here, evaluated on a decreasing eps schedule and
extrapolated to eps -> 0.
"""

from pneck.asymptotics import k_const
from pneck.geometry import FlatProfile, PowerProfile
from pneck.neckintegrals import limit_extrapolate, neck_integral_flat, neck_integral_gamma

flat = FlatProfile(sigma_half_width=0.5, curvature_coeff=1.0, patch_radius=1.0)
print("flat gap, r = 0.3 (limit is 1):")
for p in (1.5, 2.0, 3.0):
    vals = [(e, neck_integral_flat(flat, e, p, 0.3)) for e in (1e-2, 1e-4, 1e-6)]
    lim = limit_extrapolate(vals)
    seq = ", ".join(f"{v:.5f}" for _, v in vals)
    print(f"  p={p}: [{seq}] -> {lim:.6f}")

print("\ncusp gap gamma = 0.5, p = 2, r = 0.3 (limit is a0^(-2/3)/K):")
K = k_const(2, 2.0, 0.5)
for a0 in (1.0, 2.0):
    prof = PowerProfile(gamma=0.5, amp=a0, patch_radius=1.0)
    vals = [(e, neck_integral_gamma(prof, e, 2.0, 0.3)) for e in (1e-4, 1e-6, 1e-8)]
    lim = limit_extrapolate(vals)
    want = a0 ** (-2.0 / 3.0) / K
    print(f"  a0={a0}: -> {lim:.5f}   (predicted {want:.5f})")

print("\ncritical exponent p = 5/3 (limit is 1/K = 4/3, log-corrected):")
prof = PowerProfile(gamma=0.5, amp=1.0, patch_radius=1.0)
vals = [(e, neck_integral_gamma(prof, e, 5 / 3, 0.3)) for e in (1e-6, 1e-8, 1e-10)]
lim = limit_extrapolate(vals, mode="log")
seq = ", ".join(f"{v:.5f}" for _, v in vals)
print(f"  [{seq}] -> {lim:.6f}   (4/3 = {4/3:.6f})")
