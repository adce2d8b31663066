"""Closed-form constants, normalization factors, and blow-up rates.

Everything here is an explicit formula in (n, p, gamma) plus the flux
driving the potential difference between the two conductors:

* ``theta_flat`` / ``theta_gamma`` -- the factor against which
  U1 - U2 has a finite nonzero limit,
* ``k_const`` / ``k0_angular`` -- the gamma-function constants entering
  the cusp-regime limits,
* ``blowup_exponent`` -- the rate table for max|Du| in the neck,
* ``u_diff_limit_flat`` / ``u_diff_bounds_gamma`` -- the limiting value
  (or two-sided bracket) of (U1 - U2)/Theta,
* ``predicted_gradient_*`` -- leading-order neck fields.

All functions are pure; the critical/supercritical regime split at
p = (n + gamma)/(1 + gamma) is enforced with a hard domain gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .specfun import gamma_fn, integrate_1d

__all__ = [
    "RateDescriptor",
    "Prediction",
    "regime",
    "critical_p",
    "theta_flat",
    "theta_gamma",
    "k_const",
    "k0_angular",
    "blowup_exponent",
    "u_diff_limit_flat",
    "u_diff_bounds_gamma",
    "predicted_gradient_flat",
    "predicted_gradient_gamma_center",
    "prediction",
]

_REL_TOL = 1e-12

SUBCRITICAL = "subcritical"
CRITICAL = "critical"
SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class RateDescriptor:
    """Blow-up rate eps**-power * |ln eps|**-log_power (or bounded)."""

    power: float
    log_power: float = 0.0
    bounded: bool = False

    def __post_init__(self):
        if self.power < 0.0 or self.log_power < 0.0:
            raise ValueError("rate exponents must be nonnegative")
        if self.bounded and (self.power != 0.0 or self.log_power != 0.0):
            raise ValueError("a bounded rate carries zero exponents")


@dataclass(frozen=True)
class Prediction:
    """Asymptotic quantities for one (n, p, gamma, geometry) configuration."""

    theta: float
    k_const: float | None
    u_diff_limit: float | None
    regime: str


def critical_p(n: int, gamma: float) -> float:
    """Threshold exponent separating the cusp regimes."""
    return (n + gamma) / (1.0 + gamma)


def regime(n: int, p: float, gamma: float) -> str:
    """Classify (n, p, gamma) as subcritical / critical / supercritical.

    Exactly one label is returned for every p > 1, gamma in (0, 1); the
    critical band is a relative 1e-12 neighborhood of (n+gamma)/(1+gamma).
    """
    _check_gamma(gamma)
    if p <= 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    pc = critical_p(n, gamma)
    if abs(p - pc) <= _REL_TOL * pc:
        return CRITICAL
    return SUPERCRITICAL if p > pc else SUBCRITICAL


def _check_gamma(gamma: float):
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")


def theta_flat(eps: float, p: float, sigma_area: float) -> float:
    """Normalization eps / sigma_area**(1/(p-1)) for the flat regime."""
    if p <= 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    if eps <= 0.0 or sigma_area <= 0.0:
        raise ValueError("eps and sigma_area must be positive")
    return eps / sigma_area ** (1.0 / (p - 1.0))


def theta_gamma(eps: float, p: float, gamma: float, n: int = 2) -> float:
    """Normalization for the power-cusp regime.

    Supercritical p: eps**(1 - (n-1)/((1+gamma)(p-1))); critical p:
    |ln eps|**(-1/(p-1)).  Undefined below the critical exponent.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    reg = regime(n, p, gamma)
    if reg == SUBCRITICAL:
        raise ValueError(
            f"theta is undefined for p={p} < critical exponent {critical_p(n, gamma):.6g}"
        )
    if reg == CRITICAL:
        return abs(math.log(eps)) ** (-1.0 / (p - 1.0))
    return eps ** (1.0 - (n - 1.0) / ((1.0 + gamma) * (p - 1.0)))


def k_const(n: int, p: float, gamma: float) -> float:
    """Gamma-function constant of the cusp-regime potential-difference limit.

    Supercritical:
        (1+g)/(2 pi**((n-1)/2)) * G((n-1)/2) G(p-1)
                                / (G((n-1)/(1+g)) G(p - (n+g)/(1+g)))
    Critical:
        (1+g)/(2 pi**((n-1)/2)) * G((n-1)/2)
    """
    reg = regime(n, p, gamma)
    if reg == SUBCRITICAL:
        raise ValueError(f"k_const is undefined in the subcritical regime (p={p})")
    front = (1.0 + gamma) / (2.0 * math.pi ** ((n - 1.0) / 2.0)) * gamma_fn((n - 1.0) / 2.0)
    if reg == CRITICAL:
        return front
    return front * gamma_fn(p - 1.0) / (
        gamma_fn((n - 1.0) / (1.0 + gamma)) * gamma_fn(p - critical_p(n, gamma))
    )


def _angular_directions(n: int, a_fn):
    """Sample directions of the unit sphere S^(n-2) with weights.

    n = 2: two points; n = 3: trapezoid rule on the circle, fine enough
    for smooth angular coefficients.
    """
    if n == 2:
        return [(1.0, a_fn(1.0)), (1.0, a_fn(-1.0))]
    if n == 3:
        m = 256
        out = []
        for k in range(m):
            th = 2.0 * math.pi * k / m
            out.append((2.0 * math.pi / m, a_fn(th)))
        return out
    raise ValueError("angular constants are supported for n in {2, 3}")


def k0_angular(a_fn, n: int, p: float, gamma: float, quad_tol: float = 1e-9) -> float:
    """Constant K0 for a direction-dependent cusp coefficient a(theta).

    Supercritical: inverse of the sphere integral of
    int_0^inf s**(n-2) / (1 + a(theta) s**(1+gamma))**(p-1) ds.
    Critical: the |ln eps|-normalized limit, evaluated on a decreasing
    eps sequence with the 1/|ln eps| correction removed.
    """
    reg = regime(n, p, gamma)
    if reg == SUBCRITICAL:
        raise ValueError(f"k0_angular is undefined in the subcritical regime (p={p})")
    dirs = _angular_directions(n, a_fn if callable(a_fn) else (lambda _t, _a=a_fn: _a))
    for _, a in dirs:
        if a <= 0.0:
            raise ValueError("a(theta) must be positive")
    if reg == SUPERCRITICAL:
        total = 0.0
        for w, a in dirs:
            total += w * integrate_1d(
                lambda s, a=a: s ** (n - 2.0) / (1.0 + a * s ** (1.0 + gamma)) ** (p - 1.0),
                0.0,
                math.inf,
                tol=quad_tol,
            )
        return 1.0 / total

    # Critical branch: evaluate the truncated, |ln eps|-normalized integral
    # on a decreasing eps sequence and remove the 1/|ln eps| correction.
    exponent = (n - 1.0) / (1.0 + gamma)
    eps_seq = [1e-6, 1e-9, 1e-12]
    vals = []
    for eps in eps_seq:
        cut = eps ** (-1.0 / (1.0 + gamma))
        total = 0.0
        for w, a in dirs:
            total += w * integrate_1d(
                lambda s, a=a: s ** (n - 2.0) / (1.0 + a * s ** (1.0 + gamma)) ** exponent,
                0.0,
                cut,
                tol=quad_tol,
            )
        vals.append(total / abs(math.log(eps)))
    # vals[k] = L + c/|ln eps_k|: eliminate c with the last two samples.
    l2, l3 = (abs(math.log(e)) for e in eps_seq[1:])
    limit = (vals[1] * l2 - vals[2] * l3) / (l2 - l3)
    return 1.0 / limit


def blowup_exponent(n: int, p: float, gamma: float | None, regularity: str) -> RateDescriptor:
    """Rate of max|Du| in the neck for the given boundary regularity.

    regularity is one of "C2", "C1gamma", "flat".  The flat case is
    bounded; the other two follow the rate table with thresholds
    (n+1)/2 (C2) and (n+gamma)/(1+gamma) (C1gamma).
    """
    if p <= 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    if regularity == "flat":
        return RateDescriptor(power=0.0, log_power=0.0, bounded=True)
    if regularity == "C2":
        pc = (n + 1.0) / 2.0
        if abs(p - pc) <= _REL_TOL * pc:
            return RateDescriptor(power=1.0, log_power=1.0 / (p - 1.0))
        if p < pc:
            return RateDescriptor(power=1.0)
        return RateDescriptor(power=(n - 1.0) / (2.0 * (p - 1.0)))
    if regularity == "C1gamma":
        if gamma is None:
            raise ValueError("C1gamma regularity requires gamma")
        reg = regime(n, p, gamma)
        if reg == SUBCRITICAL:
            return RateDescriptor(power=1.0)
        if reg == CRITICAL:
            return RateDescriptor(power=1.0, log_power=1.0 / (p - 1.0))
        return RateDescriptor(power=(n - 1.0) / ((1.0 + gamma) * (p - 1.0)))
    raise ValueError(f"unknown regularity {regularity!r}")


def u_diff_limit_flat(flux: float, p: float) -> float:
    """Limit of (U1 - U2)/Theta in the flat regime: sgn(F)|F|**(1/(p-1))."""
    if p <= 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    if flux == 0.0:
        return 0.0
    return math.copysign(abs(flux) ** (1.0 / (p - 1.0)), flux)


def u_diff_bounds_gamma(
    flux: float, n: int, p: float, gamma: float, c0: float
) -> tuple[float, float]:
    """Two-sided bracket for the limit of (U1 - U2)/Theta in the cusp regime.

    The bracket collapses to the exact limit when c0 = 1 (constant cusp
    coefficient).  Signs mirror for negative flux.
    """
    if c0 < 1.0:
        raise ValueError(f"c0 must be >= 1, got {c0}")
    K = k_const(n, p, gamma)
    kappa = (n - 1.0) / (1.0 + gamma)
    e = 1.0 / (p - 1.0)
    if flux == 0.0:
        return (0.0, 0.0)
    mag_lo = (c0 ** (-kappa) * K * abs(flux)) ** e
    mag_hi = (c0**kappa * K * abs(flux)) ** e
    if flux > 0.0:
        return (mag_lo, mag_hi)
    return (-mag_hi, -mag_lo)


def predicted_gradient_flat(
    xp: float, eps: float, p: float, flux: float, profile
) -> tuple[float, float]:
    """Leading-order neck gradient (0, Theta/delta * sgn(F)|F|**(1/(p-1))).

    The limit-zero correction terms are dropped; their envelope shape is
    Theta/delta**(1-beta/2), reported separately by callers that need it.
    """
    from .geometry import FlatProfile, gap

    if not isinstance(profile, FlatProfile):
        raise TypeError("predicted_gradient_flat requires a FlatProfile")
    delta = gap(profile, eps, xp)  # patch gate enforced here
    sigma_area = 2.0 * profile.sigma_half_width
    vertical = theta_flat(eps, p, sigma_area) / delta * u_diff_limit_flat(flux, p)
    return (0.0, vertical)


def predicted_gradient_gamma_center(
    eps: float,
    n: int,
    p: float,
    gamma: float,
    flux: float,
    c_lower: float = 1.0,
    c_upper: float = 1.0,
) -> tuple[float, float]:
    """Envelope for |Du| on the vertical axis in the cusp regime.

    Returns ((K|F|)**(1/(p-1)) Theta/(2 c_lower eps),
             c_upper (K|F|)**(1/(p-1)) Theta/eps); the multiplicative
    constants are not pinned by the theory and must come from the caller.
    Zero flux gives (0, 0) at leading order.
    """
    if flux == 0.0:
        return (0.0, 0.0)
    K = k_const(n, p, gamma)
    th = theta_gamma(eps, p, gamma, n)
    core = (K * abs(flux)) ** (1.0 / (p - 1.0)) * th / eps
    return (core / (2.0 * c_lower), c_upper * core)


def prediction(n: int, p: float, profile, eps: float, flux: float) -> Prediction:
    """Bundle Theta, K, and the potential-difference limit for a profile."""
    from .geometry import FlatProfile, PowerProfile

    if isinstance(profile, FlatProfile):
        if n == 2:
            sigma_area = 2.0 * profile.sigma_half_width
        else:
            sigma_area = math.pi * profile.sigma_half_width**2
        return Prediction(
            theta=theta_flat(eps, p, sigma_area),
            k_const=None,
            u_diff_limit=u_diff_limit_flat(flux, p),
            regime="flat",
        )
    if isinstance(profile, PowerProfile):
        reg = regime(n, p, profile.gamma)
        if reg == SUBCRITICAL:
            return Prediction(theta=math.nan, k_const=None, u_diff_limit=None, regime=reg)
        K = k_const(n, p, profile.gamma)
        u_lim = None
        if not callable(profile.amp):
            kappa = (n - 1.0) / (1.0 + profile.gamma)
            if flux == 0.0:
                u_lim = 0.0
            else:
                u_lim = math.copysign(
                    (K * profile.amp**kappa * abs(flux)) ** (1.0 / (p - 1.0)), flux
                )
        return Prediction(
            theta=theta_gamma(eps, p, profile.gamma, n),
            k_const=K,
            u_diff_limit=u_lim,
            regime=reg,
        )
    raise TypeError(f"unsupported profile type {type(profile)!r}")
