"""Gradient concentration between nearly touching perfect conductors.

The potential in a two-phase composite with two perfectly conducting
inclusions solves a constrained p-Dirichlet minimization.  As the gap
between the inclusions closes, the field in the neck either stays bounded
(partially flat gap) or blows up at a rate set by the boundary regularity
(power-law cusp gap).  This package provides

* closed-form constants and normalization factors for both regimes,
  including the blow-up-rate table (`asymptotics`),
* gap-profile geometry and closed inclusion curves (`geometry`),
* quadrature verification of the neck integral limits (`neckintegrals`),
* a graded conforming triangulator for the two-inclusion domain (`mesh`),
* a constrained p-Dirichlet finite-element solver with variationally
  consistent fluxes (`solver`),
* sweep/fit orchestration that checks the limit theorems numerically
  (`harness`).
"""

from . import asymptotics, geometry, harness, mesh, neckintegrals, solver, specfun
from .asymptotics import (
    Prediction,
    RateDescriptor,
    blowup_exponent,
    k0_angular,
    k_const,
    predicted_gradient_flat,
    predicted_gradient_gamma_center,
    regime,
    theta_flat,
    theta_gamma,
    u_diff_bounds_gamma,
    u_diff_limit_flat,
)
from .geometry import (
    DomainSpec,
    FlatProfile,
    PowerProfile,
    TrigPoly,
    boundary_curves,
    default_cusp_spec,
    default_flat_spec,
    dist_to_flat,
    gap,
    spec_from_json,
    spec_to_json,
)
from .harness import SweepRecord, check_theorem_3_4, check_theorem_4_3, fit_rate, sweep
from .mesh import Mesh, generate, refine_uniform
from .neckintegrals import limit_extrapolate, neck_integral_flat, neck_integral_gamma
from .solver import Problem, Solution, flux, gradient_at, limit_flux_estimate, solve
from .specfun import QuadratureRule, beta_fn, gamma_fn, integrate_1d

__version__ = "0.1.0"
