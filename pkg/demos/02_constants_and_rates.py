"""Normalization factors, gamma-function constants, and the rate table.

The potential difference U1 - U2 between the conductors vanishes as the
gap closes; divided by the right normalization Theta it has a finite
limit.  For the cusp gap the limit involves the constant K built from
gamma functions, and the blow-up rate of |Du| depends on the boundary
regularity through a small table.
"""

from pneck.asymptotics import (
    blowup_exponent,
    critical_p,
    k0_angular,
    k_const,
    theta_flat,
    theta_gamma,
    u_diff_bounds_gamma,
)

print("Theta for the flat gap: eps / |flat set|^(1/(p-1))")
for p in (1.5, 2.0, 3.0):
    print(f"  p={p}: Theta(1e-3) = {theta_flat(1e-3, p, 1.0):.6g}")

print("\nTheta for the cusp gap (gamma = 0.5):")
print(f"  supercritical p=2:   {theta_gamma(1e-3, 2.0, 0.5):.6g}   (= eps^(1/3))")
print(f"  critical p=5/3:      {theta_gamma(1e-3, 5/3, 0.5):.6g}   (= |ln eps|^(-3/2))")
print(f"  critical exponent:   p* = {critical_p(2, 0.5):.6f}")

print("\nconstant K (n=2, gamma=0.5):")
for p in (5 / 3, 2.0, 3.0):
    print(f"  p={p:.4g}: K = {k_const(2, p, 0.5):.10f}")

print("\ndirection-dependent amplitude: K0")
print(f"  a = 1 both sides:      {k0_angular(1.0, 2, 2.0, 0.5):.8f} (= K)")
print(f"  a = 2 both sides:      {k0_angular(2.0, 2, 2.0, 0.5):.8f} (= K 2^(2/3))")
mixed = k0_angular(lambda t: 1.0 if t > 0 else 2.0, 2, 2.0, 0.5)
print(f"  a = 1 right, 2 left:   {mixed:.8f}")

print("\ntwo-sided bracket for the potential-difference limit (flux = 1):")
for c0 in (1.0, 2.0):
    lo, hi = u_diff_bounds_gamma(1.0, 2, 2.0, 0.5, c0)
    print(f"  c0={c0}: [{lo:.6f}, {hi:.6f}]")

print("\nblow-up rate of |Du| in the neck (n = 2):")
print(f"{'p':>6} {'cusp gamma=0.5':>22} {'C2 boundary':>20} {'flat':>10}")
for p in (1.3, 1.5, 5 / 3, 2.0, 3.0):
    cusp = blowup_exponent(2, p, 0.5, "C1gamma")
    c2 = blowup_exponent(2, p, None, "C2")
    flat = blowup_exponent(2, p, None, "flat")

    def fmt(r):
        if r.bounded:
            return "bounded"
        s = f"eps^-{r.power:.3g}"
        if r.log_power:
            s += f" |ln eps|^-{r.log_power:.3g}"
        return s

    print(f"{p:6.3g} {fmt(cusp):>22} {fmt(c2):>20} {fmt(flat):>10}")
