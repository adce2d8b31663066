"""Quadrature verification of the neck integral limits.

The normalized gap integral  int (Theta/delta)^(p-1) dx'  over the neck
tends to 1 in the flat regime and to a gamma-function constant in the
cusp regime.  These routines evaluate the integrals at finite eps
(reduced to 1-D radial integrals for n = 2, polar for n = 3) and
extrapolate eps -> 0 from a short geometric sequence.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from .asymptotics import SUBCRITICAL, regime, theta_flat, theta_gamma
from .geometry import FlatProfile, PowerProfile
from .specfun import integrate_1d

__all__ = [
    "neck_integral_flat",
    "neck_integral_gamma",
    "limit_extrapolate",
    "ExtrapolationError",
]


class ExtrapolationError(RuntimeError):
    """The sampled sequence does not fit a convergent model."""


def neck_integral_flat(
    profile: FlatProfile,
    eps: float,
    p: float,
    r: float,
    tol: float = 1e-10,
    n: int = 2,
) -> float:
    """int_{d(x') < r} (Theta(eps;p)/delta(x'))^(p-1) dx' at finite eps.

    n = 2 reduces to |Sigma'| / eps^(p-1) plus two copies of the radial
    tail integral; n = 3 uses a circular flat set of radius w.  r = 0
    returns exactly 1 (only the flat set contributes).
    """
    if p <= 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    w = profile.sigma_half_width
    if not 0.0 <= r < profile.patch_radius - w:
        raise ValueError(
            f"r must lie in [0, patch_radius - sigma_half_width) = [0, {profile.patch_radius - w})"
        )
    q = profile.curvature_coeff
    if n == 2:
        sigma_area = 2.0 * w
        if r == 0.0:
            tail = 0.0
        else:
            tail = 2.0 * integrate_1d(
                lambda s: (eps + q * s * s) ** (1.0 - p), 0.0, r, tol=tol
            )
    elif n == 3:
        sigma_area = math.pi * w * w
        if r == 0.0:
            tail = 0.0
        else:
            tail = 2.0 * math.pi * integrate_1d(
                lambda s: (w + s) * (eps + q * s * s) ** (1.0 - p), 0.0, r, tol=tol
            )
    else:
        raise ValueError("only n in {2, 3} is supported")
    theta = theta_flat(eps, p, sigma_area)
    return theta ** (p - 1.0) * (sigma_area / eps ** (p - 1.0) + tail)


def neck_integral_gamma(
    profile: PowerProfile,
    eps: float,
    p: float,
    r: float,
    tol: float = 1e-10,
    n: int = 2,
) -> float:
    """int_{|x'| < r} (Theta(eps;p,gamma)/delta(x'))^(p-1) dx' at finite eps.

    Defined in the critical and supercritical regimes only.  n = 2 sums
    the two half-line integrals (the amplitude may differ per direction);
    n = 3 integrates over the polar angle.
    """
    g = profile.gamma
    if regime(n, p, g) == SUBCRITICAL:
        raise ValueError(f"neck integral undefined below the critical exponent (p={p})")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if not 0.0 < r <= profile.patch_radius:
        raise ValueError("r must lie in (0, patch_radius]")
    theta = theta_gamma(eps, p, g, n)

    def radial(a):
        return integrate_1d(
            lambda s: s ** (n - 2.0) * (eps + a * s ** (1.0 + g)) ** (1.0 - p),
            0.0,
            r,
            tol=tol,
        )

    if n == 2:
        total = radial(profile.amp_at(1.0)) + radial(profile.amp_at(-1.0))
    elif n == 3:
        if callable(profile.amp):
            m = 64
            total = 0.0
            for k in range(m):
                th = 2.0 * math.pi * k / m
                total += (2.0 * math.pi / m) * radial(float(profile.amp(th)))
        else:
            total = 2.0 * math.pi * radial(float(profile.amp))
    else:
        raise ValueError("only n in {2, 3} is supported")
    return theta ** (p - 1.0) * total


# ---------------------------------------------------------------------------
# eps -> 0 extrapolation


def _fit_three(es, vs, weight_fn):
    """Solve v = L + c * e^sigma * weight(e) through three points.

    Returns (L, c, sigma) or None when no positive sigma fits.
    """
    e1, e2, e3 = es
    v1, v2, v3 = vs
    d12, d23 = v1 - v2, v2 - v3
    if d12 == 0.0 and d23 == 0.0:
        return (v3, 0.0, 1.0)
    if d12 * d23 <= 0.0:
        return None
    w1, w2, w3 = weight_fn(e1), weight_fn(e2), weight_fn(e3)

    def mismatch(sig):
        m1 = e1**sig * w1
        m2 = e2**sig * w2
        m3 = e3**sig * w3
        return d12 * (m2 - m3) - d23 * (m1 - m2)

    # The interpolation equation can have several positive roots; take the
    # largest (the fastest-converging exact interpolant), located by a
    # descending geometric scan.
    grid = np.geomspace(50.0, 1e-6, 160)
    sig = None
    prev_s, prev_f = grid[0], mismatch(grid[0])
    for s in grid[1:]:
        f = mismatch(s)
        if f == 0.0:
            sig = s
            break
        if prev_f == 0.0:
            sig = prev_s
            break
        if prev_f * f < 0.0:
            sig = brentq(mismatch, s, prev_s, xtol=1e-15, rtol=8.9e-16)
            break
        prev_s, prev_f = s, f
    if sig is None or sig <= 0.0:
        return None
    denom = e2**sig * w2 - e3**sig * w3
    if denom == 0.0:
        return None
    c = d23 / denom
    L = v3 - c * e3**sig * w3
    return (L, c, sig)


def limit_extrapolate(values, mode: str = "auto") -> float:
    """eps -> 0 limit from samples (eps, value) with decreasing eps.

    The default model is value = L + c*eps^sigma fit through the last
    three points.  Because the flat-regime integral carries an extra
    |ln eps| factor at p = 3/2 (and nearby exponents extrapolate poorly
    under a pure power law), the fit is cross-checked against the
    log-augmented model value = L + c*eps^sigma*|ln eps|; when the two
    disagree by more than 0.1% the log-augmented limit is returned.
    mode = "power" / "log_power" force one model; mode = "log" fits
    value = L + c/|ln eps| + d/|ln eps|^2 (critical-regime sequences).
    Raises ExtrapolationError for non-convergent sequences.
    """
    values = [(float(e), float(v)) for e, v in values]
    if len(values) < 3:
        raise ValueError("need at least 3 samples")
    es = [e for e, _ in values]
    if any(e2 >= e1 for e1, e2 in zip(es, es[1:])):
        raise ValueError("eps values must be strictly decreasing")
    tail = values[-3:]
    e_tail = [e for e, _ in tail]
    v_tail = [v for _, v in tail]
    if v_tail[0] == v_tail[1] == v_tail[2]:
        return v_tail[2]

    if mode == "log":
        # Quadratic model in 1/|ln eps|: exact on three points.
        x = np.array([1.0 / abs(math.log(e)) for e in e_tail])
        A = np.column_stack([np.ones(3), x, x * x])
        coef = np.linalg.solve(A, np.array(v_tail))
        return float(coef[0])

    power = _fit_three(e_tail, v_tail, lambda e: 1.0)
    logaug = _fit_three(e_tail, v_tail, lambda e: abs(math.log(e)))
    if mode == "power":
        if power is None:
            raise ExtrapolationError("no positive convergence exponent fits the samples")
        return power[0]
    if mode == "log_power":
        if logaug is None:
            raise ExtrapolationError("no positive convergence exponent fits the samples")
        return logaug[0]
    if mode != "auto":
        raise ValueError(f"unknown mode {mode!r}")
    if power is None and logaug is None:
        raise ExtrapolationError("no positive convergence exponent fits the samples")
    if power is None:
        return logaug[0]
    if logaug is None:
        return power[0]
    if abs(power[0] - logaug[0]) <= 1e-3 * (1.0 + abs(power[0])):
        return power[0]
    return logaug[0]
