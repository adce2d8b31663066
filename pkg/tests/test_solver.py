"""Solver oracles, fluxes, invariances, and the touching-limit flux."""

import json
import math

import numpy as np
import pytest
from conftest import annulus_exact, annulus_mesh, annulus_projector, strip_mesh

from pneck.geometry import default_cusp_spec, default_flat_spec
from pneck.mesh import INCLUSION1, INCLUSION2, generate, generate_merged, refine_uniform
from pneck.solver import (
    Problem,
    flux,
    flux_over_vertices,
    gradient_at,
    limit_flux_estimate,
    neck_region_flux,
    solution_to_json,
    solve,
)

RADIAL_FLUX_P3 = 9.1552719185430561  # pi / (2 (sqrt(2)-1)^2)
RADIAL_GRAD_P3 = 1.2071067811865475  # 1 / (2 (sqrt(2)-1))


def test_strip_oracle():
    mesh = strip_mesh()
    phi = np.where(mesh.vertices[:, 1] > 0.05, 1.0, 0.0)
    for p in (1.5, 2.0, 3.0):
        sol = solve(Problem(mesh=mesh, p=p, phi=phi, tol=1e-12))
        assert sol.converged
        g = gradient_at(sol, (0.43, 0.037))
        assert np.hypot(*g) == pytest.approx(10.0, rel=1e-9)
        assert sol.energy == pytest.approx(0.1 * 10.0**p, rel=1e-9)


def test_constant_data():
    mesh = strip_mesh()
    phi = np.full(mesh.n_vertices, 2.5)
    sol = solve(Problem(mesh=mesh, p=2.7, phi=phi, tol=1e-12))
    assert sol.converged
    assert sol.energy <= 1e-20
    assert abs(sol.flux_outer) <= 1e-12
    assert np.allclose(sol.u, 2.5, atol=1e-10)


def test_constant_data_inclusion_constants():
    import dataclasses as dc

    from pneck.geometry import TrigPoly

    spec = dc.replace(default_flat_spec(1e-2), dirichlet=TrigPoly(a0=0.7, sin_coeffs=()))
    mesh = generate(spec, h_far=0.35, neck_fraction=0.3)
    sol = solve(Problem(mesh=mesh, p=1.8, tol=1e-12))
    assert sol.converged
    assert sol.U1 == pytest.approx(0.7, abs=1e-9)
    assert sol.U2 == pytest.approx(0.7, abs=1e-9)
    assert sol.energy <= 1e-18
    assert max(abs(sol.flux1), abs(sol.flux2), abs(sol.flux_outer)) <= 1e-10


def test_radial_oracle_accuracy_and_contraction():
    mesh = annulus_mesh()
    for p in (1.5, 2.0, 3.0):
        errs = []
        m = mesh
        for level in range(3):
            rv = np.hypot(m.vertices[:, 0], m.vertices[:, 1])
            phi = np.where(rv > 1.5, 1.0, 0.0)
            sol = solve(Problem(mesh=m, p=p, phi=phi, tol=1e-11))
            assert sol.converged
            errs.append(float(np.abs(sol.u - annulus_exact(rv, p)).max()))
            if level < 2:
                m = refine_uniform(m, projector=annulus_projector)
        assert errs[0] <= 0.02  # range of u is 1
        assert errs[0] / errs[1] >= 1.5
        assert errs[1] / errs[2] >= 1.5


def test_radial_oracle_flux_and_gradient():
    mesh = annulus_mesh()
    rv = np.hypot(mesh.vertices[:, 0], mesh.vertices[:, 1])
    phi = np.where(rv > 1.5, 1.0, 0.0)
    sol = solve(Problem(mesh=mesh, p=3.0, phi=phi, tol=1e-11))
    inner = np.arange(mesh.n_vertices) < 80
    got = flux_over_vertices(sol, inner)
    assert got == pytest.approx(RADIAL_FLUX_P3, rel=0.01)
    g = gradient_at(sol, (1.015 * math.cos(0.4), 1.015 * math.sin(0.4)))
    assert np.hypot(*g) == pytest.approx(RADIAL_GRAD_P3, rel=0.05)


def test_gradient_at_outside_raises():
    mesh = strip_mesh()
    phi = np.where(mesh.vertices[:, 1] > 0.05, 1.0, 0.0)
    sol = solve(Problem(mesh=mesh, p=2.0, phi=phi))
    with pytest.raises(ValueError):
        gradient_at(sol, (0.5, 5.0))


def test_free_coupling_stationarity_and_conservation():
    spec = default_flat_spec(3e-3)
    mesh = generate(spec, h_far=0.3, neck_fraction=0.25)
    sol = solve(Problem(mesh=mesh, p=2.5, tol=1e-12))
    assert sol.converged
    scale = abs(neck_region_flux(sol, 0.1)) + 1e-30
    assert abs(sol.flux1) <= 1e-9 * scale
    assert abs(sol.flux2) <= 1e-9 * scale
    assert abs(sol.flux1 + sol.flux2 + sol.flux_outer) <= 1e-10 * scale
    assert flux(sol, "inclusion1") == sol.flux1
    assert flux(sol, "outer") == sol.flux_outer


def test_maximum_principle():
    spec = default_flat_spec(3e-3)
    mesh = generate(spec, h_far=0.3, neck_fraction=0.25)
    for p in (1.5, 3.0):
        sol = solve(Problem(mesh=mesh, p=p, tol=1e-11))
        lo, hi = -1.0, 1.0  # range of sin(theta)
        assert sol.U1 >= lo - 1e-6 and sol.U1 <= hi + 1e-6
        assert sol.U2 >= lo - 1e-6 and sol.U2 <= hi + 1e-6
        assert sol.u.min() >= lo - 1e-6 and sol.u.max() <= hi + 1e-6


def test_energy_decreases_across_newton_steps():
    spec = default_cusp_spec(3e-3)
    mesh = generate(spec, h_far=0.3, neck_fraction=0.25)
    sol = solve(Problem(mesh=mesh, p=1.5, tol=1e-11))
    for stage in sol.newton_energies:
        for a, b in zip(stage, stage[1:]):
            assert b <= a + 1e-12 * (1.0 + abs(a))


def test_discrete_minimality():
    spec = default_cusp_spec(1e-2)
    mesh = generate(spec, h_far=0.3, neck_fraction=0.25)
    prob = Problem(mesh=mesh, p=2.5, tol=1e-12)
    sol = solve(prob)
    from pneck.solver import _Fem

    fem = _Fem(mesh, "free")
    rng = np.random.default_rng(99)
    E0 = sol.energy
    cls = mesh.vertex_class
    for _ in range(50):
        w = np.zeros(mesh.n_vertices)
        free = cls == 0
        w[free] = rng.uniform(-1.0, 1.0, free.sum())
        w[cls == INCLUSION1] = rng.uniform(-1.0, 1.0)
        w[cls == INCLUSION2] = rng.uniform(-1.0, 1.0)
        u_pert = sol.u + 0.01 * w
        E1 = fem.energy_unregularized(u_pert, 2.5)
        assert E1 >= E0 - 1e-12 * (1.0 + E0)


def test_phi_scaling_homogeneity():
    spec = default_flat_spec(3e-3)
    mesh = generate(spec, h_far=0.3, neck_fraction=0.25)
    p = 2.5
    theta = np.arctan2(mesh.vertices[:, 1], mesh.vertices[:, 0])
    phi = np.asarray(spec.dirichlet(theta))
    lam = 3.0
    sol1 = solve(Problem(mesh=mesh, p=p, phi=phi, tol=1e-12))
    sol2 = solve(Problem(mesh=mesh, p=p, phi=lam * phi, tol=1e-12))
    assert sol2.U1 - sol2.U2 == pytest.approx(lam * (sol1.U1 - sol1.U2), rel=1e-8)
    f1 = neck_region_flux(sol1, 0.1)
    f2 = neck_region_flux(sol2, 0.1)
    assert f2 == pytest.approx(lam ** (p - 1.0) * f1, rel=1e-8)


def test_split_fraction_invariance():
    # theorems depend on h1 - h2 only; moving the split changes U1 - U2
    # by < 2% at eps = 1e-3
    import dataclasses as dc

    base = default_flat_spec(1e-3)
    diffs = []
    for t in (0.0, 0.5, 1.0):
        spec = dc.replace(base, split_fraction=t)
        mesh = generate(spec, h_far=0.3, neck_fraction=0.25)
        sol = solve(Problem(mesh=mesh, p=2.0, tol=1e-11))
        diffs.append(sol.U1 - sol.U2)
    ref = diffs[1]
    for d in diffs:
        assert abs(d - ref) / abs(ref) < 0.02


def test_tied_coupling_single_constant():
    spec = default_flat_spec(3e-3)
    mesh = generate(spec, h_far=0.3, neck_fraction=0.25)
    sol = solve(Problem(mesh=mesh, p=2.0, tol=1e-12, coupling="tied"))
    assert sol.converged
    assert sol.U1 == sol.U2
    # tied: only the sum of inclusion fluxes vanishes
    assert abs(sol.flux1 + sol.flux2) <= 1e-10 * (abs(sol.flux1) + 1e-30)


def test_limit_flux_flat_merged():
    spec = default_flat_spec(0.0)
    F = limit_flux_estimate(spec, p=2.0, h_far=0.25, neck_fraction=0.25, tol=1e-11)
    # antisymmetric data drives a positive flux through the upper half
    assert F > 0.5
    # odd symmetry: negated data negates the flux
    import dataclasses as dc

    from pneck.geometry import TrigPoly

    spec_neg = dc.replace(spec, dirichlet=TrigPoly(sin_coeffs=(-1.0,)))
    F_neg = limit_flux_estimate(spec_neg, p=2.0, h_far=0.25, neck_fraction=0.25, tol=1e-11)
    assert F_neg == pytest.approx(-F, rel=1e-9)


def test_limit_flux_constant_data_is_zero():
    import dataclasses as dc

    from pneck.geometry import TrigPoly

    spec = dc.replace(default_flat_spec(0.0), dirichlet=TrigPoly(a0=1.0, sin_coeffs=()))
    F = limit_flux_estimate(spec, p=2.0, h_far=0.3, neck_fraction=0.25)
    assert abs(F) < 1e-10


def test_limit_flux_mesh_refinement_crosscheck():
    # golden-number stability: the eps = 0 flux agrees between the default
    # discretization and a uniformly refined one within 1%
    spec = default_flat_spec(0.0)
    F_coarse = limit_flux_estimate(spec, p=2.0, h_far=0.3, neck_fraction=0.25, tol=1e-11)
    mesh = generate_merged(spec, h_far=0.3, neck_fraction=0.25)
    fine = refine_uniform(mesh)
    sol = solve(Problem(mesh=fine, p=2.0, tol=1e-11, coupling="tied"))
    assert sol.converged
    assert sol.flux1 == pytest.approx(F_coarse, rel=0.01)


def test_solution_json_contract():
    mesh = strip_mesh()
    phi = np.where(mesh.vertices[:, 1] > 0.05, 1.0, 0.0)
    sol = solve(Problem(mesh=mesh, p=2.0, phi=phi))
    doc = json.loads(solution_to_json(sol))
    assert set(doc) == {
        "U1",
        "U2",
        "energy",
        "flux1",
        "flux2",
        "flux_outer",
        "iterations",
        "converged",
    }
    assert doc["converged"] is True


def test_problem_validation():
    mesh = strip_mesh()
    phi = np.zeros(mesh.n_vertices)
    with pytest.raises(ValueError):
        Problem(mesh=mesh, p=1.0, phi=phi)
    with pytest.raises(ValueError):
        Problem(mesh=mesh, p=2.0, phi=phi, coupling="weird")
    with pytest.raises(ValueError):
        Problem(mesh=mesh, p=2.0, phi=phi[:-1])
    with pytest.raises(ValueError):
        Problem(mesh=mesh, p=2.0)  # no spec on a hand mesh, phi required
