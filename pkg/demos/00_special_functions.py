"""The special-function and quadrature kernels everything else sits on.

Gamma and beta power the closed-form constants; the adaptive integrator
evaluates the gap integrals, including improper ones (folded by
s -> 1/t) and integrands with an algebraic endpoint singularity.
"""

import math

from pneck.specfun import beta_fn, gamma_fn, integrate_1d

print("gamma function (Lanczos, relative error < 1e-12 on [1e-3, 50]):")
for z in (0.5, 1.0, 4.0, 10.5):
    print(f"  Gamma({z}) = {gamma_fn(z):.15g}")
print(f"  Gamma(0.5)^2 = {gamma_fn(0.5)**2:.15g}  (pi = {math.pi:.15g})")

print("\nbeta function:")
print(f"  B(1/2, 1/2) = {beta_fn(0.5, 0.5):.15g}")
print(f"  B(2/3, 1/3) = {beta_fn(2/3, 1/3):.15g}  (2 pi/sqrt 3 = {2*math.pi/math.sqrt(3):.15g})")

print("\nadaptive quadrature:")
v = integrate_1d(lambda s: s * s, 0.0, 1.0, tol=1e-12)
print(f"  int_0^1 s^2 ds            = {v:.15g}")
v = integrate_1d(lambda s: 1.0 / (1.0 + s * s), 0.0, math.inf, tol=1e-10)
print(f"  int_0^inf ds/(1+s^2)      = {v:.15g}  (pi/2 = {math.pi/2:.15g})")
v = integrate_1d(lambda s: s ** (-1.0 / 3.0) / (1.0 + s), 0.0, math.inf, tol=1e-9)
print(f"  int_0^inf s^(-1/3)/(1+s)  = {v:.15g}  (= B(2/3, 1/3))")

print("\nthe cusp-regime inner integral reproducing 1/(2K) per direction:")
p, g = 2.0, 0.5
v = integrate_1d(lambda s: (1.0 + s ** (1.0 + g)) ** (1.0 - p), 0.0, math.inf, tol=1e-10)
from pneck.asymptotics import k_const

print(f"  int_0^inf (1+s^1.5)^-1 ds = {v:.10f};  1/(2K) = {1/(2*k_const(2, p, g)):.10f}")
