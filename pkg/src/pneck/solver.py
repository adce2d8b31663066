"""Constrained p-Dirichlet energy minimization on P1 triangulations.

The discrete potential is piecewise linear, fixed to the given data on
outer-tagged vertices, constant on each inclusion (the constants are
unknowns: one per inclusion in "free" coupling, one shared in "tied"
coupling).  The regularized energy sum_T A_T (eta^2 + |Du|^2)^(p/2) is
minimized by damped Newton with an energy-decrease line search inside an
eta-continuation loop (the exact degenerate operator is not directly
Newton-solvable for p != 2).  Fluxes are the variationally consistent
per-class residual sums divided by p, which makes discrete conservation
flux1 + flux2 + flux_outer = 0 exact and per-inclusion stationarity hold
to solver tolerance in free coupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import FREE, INCLUSION1, INCLUSION2, OUTER, Mesh, generate, generate_merged
from .neckintegrals import limit_extrapolate

__all__ = [
    "Problem",
    "Solution",
    "SolverError",
    "solve",
    "flux",
    "flux_over_vertices",
    "gradient_at",
    "limit_flux_estimate",
    "neck_region_flux",
    "solution_to_json",
]

_AMG_THRESHOLD = 25000


class SolverError(RuntimeError):
    """Newton iteration failed to converge within its budget."""


@dataclass
class Problem:
    """One constrained minimization instance.

    phi gives Dirichlet values per vertex (only outer-tagged entries are
    used); when None it is evaluated from the generating spec's boundary
    data at the vertex angle.  reg_eta is the final regularization
    relative to the solution's gradient scale; tol is the relative
    residual-norm convergence target.
    """

    mesh: Mesh
    p: float
    phi: np.ndarray | None = None
    reg_eta: float = 1e-8
    tol: float = 1e-11
    coupling: str = "free"

    def __post_init__(self):
        if self.p <= 1.0:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.reg_eta < 0.0:
            raise ValueError("reg_eta must be nonnegative")
        if self.coupling not in ("free", "tied"):
            raise ValueError("coupling must be 'free' or 'tied'")
        if self.phi is None:
            if self.mesh.spec is None:
                raise ValueError("phi is required when the mesh carries no spec")
            theta = np.arctan2(self.mesh.vertices[:, 1], self.mesh.vertices[:, 0])
            object.__setattr__(self, "phi", np.asarray(self.mesh.spec.dirichlet(theta)))
        else:
            object.__setattr__(self, "phi", np.asarray(self.phi, dtype=float))
            if len(self.phi) != self.mesh.n_vertices:
                raise ValueError("phi must have one value per vertex")
        if not (self.mesh.vertex_class == OUTER).any():
            raise ValueError("mesh has no outer Dirichlet vertices")


@dataclass
class Solution:
    """Discrete minimizer with constants, fluxes, and iteration record.

    energy is the unregularized discrete p-Dirichlet value; fluxes use
    the convention positive-into-the-domain on each tagged boundary.
    """

    mesh: Mesh = field(repr=False)
    p: float
    u: np.ndarray = field(repr=False)
    U1: float
    U2: float
    energy: float
    flux1: float
    flux2: float
    flux_outer: float
    iterations: int
    converged: bool
    residual_vertex: np.ndarray = field(repr=False)
    residual_norm: float = 0.0
    residual_initial: float = 0.0
    eta_final: float = 0.0
    newton_energies: list = field(default_factory=list, repr=False)
    _tri_grads: np.ndarray | None = field(default=None, repr=False)
    _vert_tris: list | None = field(default=None, repr=False)
    _vtree: object = field(default=None, repr=False)


# ---------------------------------------------------------------------------
# P1 machinery


class _Fem:
    """Mesh-derived arrays and the dof map for one coupling mode."""

    def __init__(self, mesh: Mesh, coupling: str):
        pts, tris = mesh.vertices, mesh.triangles
        a, b, c = pts[tris[:, 0]], pts[tris[:, 1]], pts[tris[:, 2]]
        det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1])
        if (det <= 0.0).any():
            raise ValueError("mesh triangles must be counterclockwise")
        self.area = 0.5 * det
        # hat-function gradients: grad phi_k = rot90(opposite edge)/det
        gx = np.empty_like(tris, dtype=float)
        gy = np.empty_like(tris, dtype=float)
        gx[:, 0] = (b[:, 1] - c[:, 1]) / det
        gy[:, 0] = (c[:, 0] - b[:, 0]) / det
        gx[:, 1] = (c[:, 1] - a[:, 1]) / det
        gy[:, 1] = (a[:, 0] - c[:, 0]) / det
        gx[:, 2] = (a[:, 1] - b[:, 1]) / det
        gy[:, 2] = (b[:, 0] - a[:, 0]) / det
        self.gx, self.gy = gx, gy
        self.tris = tris
        self.mesh = mesh

        classes = mesh.vertex_class
        self.dof = np.full(mesh.n_vertices, -1, dtype=np.int64)
        free_idx = np.nonzero(classes == FREE)[0]
        self.dof[free_idx] = np.arange(len(free_idx))
        self.n_free = len(free_idx)
        has1 = (classes == INCLUSION1).any()
        has2 = (classes == INCLUSION2).any()
        slot = self.n_free
        self.slot1 = self.slot2 = None
        if coupling == "tied":
            if has1 or has2:
                self.slot1 = self.slot2 = slot
                slot += 1
        else:
            if has1:
                self.slot1 = slot
                slot += 1
            if has2:
                self.slot2 = slot
                slot += 1
        if self.slot1 is not None:
            self.dof[classes == INCLUSION1] = self.slot1
        if self.slot2 is not None:
            self.dof[classes == INCLUSION2] = self.slot2
        self.ndof = slot
        self.fixed = classes == OUTER

    def vertex_values(self, z: np.ndarray, phi: np.ndarray) -> np.ndarray:
        u = np.where(self.fixed, phi, 0.0)
        active = self.dof >= 0
        u[active] = z[self.dof[active]]
        return u

    def tri_gradients(self, u: np.ndarray):
        t = self.tris
        gxv = (u[t] * self.gx).sum(axis=1)
        gyv = (u[t] * self.gy).sum(axis=1)
        return gxv, gyv

    def energy(self, u: np.ndarray, p: float, eta: float) -> float:
        gxv, gyv = self.tri_gradients(u)
        g2 = gxv * gxv + gyv * gyv
        return float(np.dot(self.area, (eta * eta + g2) ** (p / 2.0)))

    def energy_unregularized(self, u: np.ndarray, p: float) -> float:
        gxv, gyv = self.tri_gradients(u)
        g2 = gxv * gxv + gyv * gyv
        return float(np.dot(self.area, g2 ** (p / 2.0)))

    def vertex_residual(self, u: np.ndarray, p: float, eta: float) -> np.ndarray:
        """Gradient of the energy with every vertex value independent."""
        gxv, gyv = self.tri_gradients(u)
        g2 = gxv * gxv + gyv * gyv
        if eta == 0.0 and p < 2.0:
            w = np.where(g2 > 0.0, g2, 1.0) ** ((p - 2.0) / 2.0)
            w = np.where(g2 > 0.0, w, 0.0)
        else:
            w = (eta * eta + g2) ** ((p - 2.0) / 2.0)
        coef = p * self.area * w
        r = np.zeros(self.mesh.n_vertices)
        for k in range(3):
            np.add.at(r, self.tris[:, k], coef * (gxv * self.gx[:, k] + gyv * self.gy[:, k]))
        return r

    def dof_gradient(self, r_vertex: np.ndarray) -> np.ndarray:
        g = np.zeros(self.ndof)
        active = self.dof >= 0
        np.add.at(g, self.dof[active], r_vertex[active])
        return g

    def hessian(self, u: np.ndarray, p: float, eta: float) -> sp.csr_matrix:
        gxv, gyv = self.tri_gradients(u)
        g2 = gxv * gxv + gyv * gyv
        s2 = eta * eta + g2
        quadratic = p == 2.0
        w = np.ones_like(s2) if quadratic else s2 ** ((p - 2.0) / 2.0)
        w4 = None if quadratic else np.where(s2 > 0.0, s2, 1.0) ** ((p - 4.0) / 2.0)
        rows, cols, vals = [], [], []
        for k in range(3):
            dk = self.dof[self.tris[:, k]]
            gk = gxv * self.gx[:, k] + gyv * self.gy[:, k]
            for l in range(3):
                dl = self.dof[self.tris[:, l]]
                gl = gxv * self.gx[:, l] + gyv * self.gy[:, l]
                dot = self.gx[:, k] * self.gx[:, l] + self.gy[:, k] * self.gy[:, l]
                h = p * self.area * w * dot
                if not quadratic:
                    h = h + p * (p - 2.0) * self.area * w4 * gk * gl
                m = (dk >= 0) & (dl >= 0)
                rows.append(dk[m])
                cols.append(dl[m])
                vals.append(h[m])
        H = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.ndof, self.ndof),
        )
        return H.tocsr()


class _LinearSolver:
    """Direct solve for small systems, AMG-preconditioned CG with a
    2x2 (at most) Schur complement for the inclusion-constant slots."""

    def __init__(self, fem: _Fem):
        self.fem = fem

    def solve(self, H: sp.csr_matrix, rhs: np.ndarray, rtol: float) -> np.ndarray:
        n = H.shape[0]
        if n <= _AMG_THRESHOLD:
            return spla.splu(H.tocsc()).solve(rhs)
        import pyamg

        F = self.fem.n_free
        nc = n - F
        A = H[:F, :F].tocsr()
        ml = pyamg.smoothed_aggregation_solver(A, max_coarse=400)
        M = ml.aspreconditioner(cycle="V")

        def asolve(b):
            x, info = spla.cg(A, b, rtol=max(rtol, 1e-12), atol=0.0, M=M, maxiter=600)
            if info != 0:
                x = spla.splu(A.tocsc()).solve(b)
            return x

        if nc == 0:
            return asolve(rhs)
        B = H[:F, F:].toarray()
        C = H[F:, F:].toarray()
        f, g = rhs[:F], rhs[F:]
        Ainv_f = asolve(f)
        Ainv_B = np.column_stack([asolve(B[:, j]) for j in range(nc)])
        S = C - B.T @ Ainv_B
        y = np.linalg.solve(S, g - B.T @ Ainv_f)
        x = Ainv_f - Ainv_B @ y
        return np.concatenate([x, y])


# ---------------------------------------------------------------------------
# Newton with line search and eta continuation


def _newton_stage(fem, phi, z, p, eta, abs_target, max_iter, linsolver, energies):
    """Damped Newton until ||grad|| <= abs_target, with stagnation exit."""
    u = fem.vertex_values(z, phi)
    r = fem.dof_gradient(fem.vertex_residual(u, p, eta))
    rn = float(np.linalg.norm(r))
    E = fem.energy(u, p, eta)
    energies.append(E)
    iters = 0
    stalls = 0
    while rn > abs_target and iters < max_iter:
        H = fem.hessian(u, p, eta)
        # forcing 0.1, tightened so the linear error cannot mask the target
        lin_rtol = max(min(0.1, 0.3 * abs_target / rn), 1e-13)
        delta = linsolver.solve(H, -r, lin_rtol)
        slope = float(np.dot(r, delta))
        if slope >= 0.0:
            delta = -r
            slope = -float(np.dot(r, r))
        # Accept the full step on residual decrease (the energy Armijo test
        # drowns in rounding once |Delta E| ~ eps * E, long before the
        # gradient reaches its own floor); otherwise backtrack on energy.
        z_full = z + delta
        u_full = fem.vertex_values(z_full, phi)
        r_full = fem.dof_gradient(fem.vertex_residual(u_full, p, eta))
        rn_full = float(np.linalg.norm(r_full))
        accepted = False
        if rn_full <= 0.9 * rn:
            z, u = z_full, u_full
            E = fem.energy(u, p, eta)
            r, rn_new = r_full, rn_full
            accepted = True
        else:
            t = 1.0
            while t >= 2.0**-40:
                z_try = z + t * delta
                u_try = fem.vertex_values(z_try, phi)
                E_try = fem.energy(u_try, p, eta)
                if E_try <= E + 1e-4 * t * slope:
                    z, u, E = z_try, u_try, E_try
                    accepted = True
                    break
                t *= 0.5
            if accepted:
                r = fem.dof_gradient(fem.vertex_residual(u, p, eta))
                rn_new = float(np.linalg.norm(r))
        iters += 1
        if not accepted:
            break
        energies.append(E)
        stalls = stalls + 1 if rn_new > 0.98 * rn else 0
        rn = rn_new
        if stalls >= 2:  # rounding floor: no measurable progress
            break
    return z, iters, rn


def solve(problem: Problem) -> Solution:
    """Minimize the constrained regularized energy; extract constants/fluxes.

    Starts from the quadratic (p = 2) solution, then follows a geometric
    eta-continuation down to reg_eta times the gradient scale.  converged
    is set when the final Newton residual is below tol relative to the
    residual of the zero state (the problem's data scale, well defined
    under warm starts).
    """
    fem = _Fem(problem.mesh, problem.coupling)
    phi = problem.phi
    p = problem.p
    lin = _LinearSolver(fem)
    energies_all = []
    total_iters = 0

    # Residual at the zero state sets the problem scale for tolerances.
    z = np.zeros(fem.ndof)
    u0 = fem.vertex_values(z, phi)
    r_scale = float(np.linalg.norm(fem.dof_gradient(fem.vertex_residual(u0, p, 0.0))))
    r_scale2 = float(np.linalg.norm(fem.dof_gradient(fem.vertex_residual(u0, 2.0, 0.0))))

    if r_scale == 0.0 and r_scale2 == 0.0:
        # Constant data: the zero state is the exact minimizer.
        return _finish(problem, fem, u0, fem.vertex_residual(u0, p, 0.0),
                       0, True, 0.0, 0.0, 0.0, energies_all)

    # Quadratic initialization: Newton is exact in one step at p = 2.
    stage_E = []
    z, it, _ = _newton_stage(fem, phi, z, 2.0, 0.0, 1e-12 * r_scale2, 4, lin, stage_E)
    energies_all.append(stage_E)
    total_iters += it

    u = fem.vertex_values(z, phi)
    gxv, gyv = fem.tri_gradients(u)
    scale = float(np.sqrt((gxv * gxv + gyv * gyv).max())) if len(gxv) else 0.0

    target = problem.tol * r_scale
    eta_final = problem.reg_eta * scale
    if abs(p - 2.0) < 1e-14:
        stage_E = []
        z, it, rn = _newton_stage(fem, phi, z, p, 0.0, target, 40, lin, stage_E)
        energies_all.append(stage_E)
        total_iters += it
        converged = rn <= target
        eta_used = 0.0
    else:
        etas = []
        eta = scale
        while eta > eta_final * 1.0001:
            etas.append(eta)
            eta *= 0.1
        etas.append(eta_final)
        rn = math.inf
        for j, eta in enumerate(etas):
            last = j == len(etas) - 1
            stage_E = []
            z, it, rn = _newton_stage(
                fem,
                phi,
                z,
                p,
                eta,
                target if last else 1e-4 * r_scale,
                90 if last else 14,
                lin,
                stage_E,
            )
            energies_all.append(stage_E)
            total_iters += it
        converged = rn <= target
        eta_used = eta_final

    u = fem.vertex_values(z, phi)
    # Fluxes come from the residual of the energy actually minimized: the
    # eta = 0 weights amplify rounding near stagnation points for p < 2,
    # while the difference in the fluxes themselves is O(eta^2).
    r_vertex = fem.vertex_residual(u, p, eta_used)
    return _finish(
        problem, fem, u, r_vertex, total_iters, converged, rn, r_scale, eta_used, energies_all
    )


def _finish(problem, fem, u, r_vertex, iterations, converged, rn, r0, eta, energies):
    mesh = problem.mesh
    p = problem.p
    cls = mesh.vertex_class
    f1 = -float(r_vertex[cls == INCLUSION1].sum()) / p
    f2 = -float(r_vertex[cls == INCLUSION2].sum()) / p
    fo = -float(r_vertex[cls == OUTER].sum()) / p
    U1 = float(u[cls == INCLUSION1][0]) if (cls == INCLUSION1).any() else math.nan
    U2 = float(u[cls == INCLUSION2][0]) if (cls == INCLUSION2).any() else math.nan
    return Solution(
        mesh=mesh,
        p=p,
        u=u,
        U1=U1,
        U2=U2,
        energy=fem.energy_unregularized(u, p),
        flux1=f1,
        flux2=f2,
        flux_outer=fo,
        iterations=iterations,
        converged=bool(converged),
        residual_vertex=r_vertex,
        residual_norm=rn,
        residual_initial=r0,
        eta_final=eta,
        newton_energies=energies,
    )


# ---------------------------------------------------------------------------
# Fluxes


def flux(solution: Solution, which: str) -> float:
    """Variationally consistent flux through a tagged boundary.

    Positive means flux of |Du|^(p-2) Du into the domain through that
    boundary; the three tagged fluxes sum to zero exactly up to the
    Newton residual.
    """
    if which == "inclusion1":
        return solution.flux1
    if which == "inclusion2":
        return solution.flux2
    if which == "outer":
        return solution.flux_outer
    raise ValueError("which must be 'inclusion1', 'inclusion2', or 'outer'")


def flux_over_vertices(solution: Solution, mask: np.ndarray) -> float:
    """Flux through the boundary portion carried by the masked vertices."""
    return -float(solution.residual_vertex[mask].sum()) / solution.p


def neck_region_flux(solution: Solution, r_mid: float) -> float:
    """Flux through the neck-facing inclusion-2 boundary portion.

    The portion is the graph part of the lower inclusion boundary with
    d(x') < r_mid (flat profile) or |x'| < r_mid (cusp); vertices on the
    closure arcs share the same x-range and must be excluded, which the
    distance-to-graph filter does.  As eps -> 0 this flux tends to the
    touching-limit flux.
    """
    mesh = solution.mesh
    spec = mesh.spec
    if spec is None:
        raise ValueError("neck_region_flux requires a spec-generated mesh")
    prof = spec.profile
    x = mesh.vertices[:, 0]
    y = mesh.vertices[:, 1]
    if hasattr(prof, "sigma_half_width"):
        extent = prof.sigma_half_width + r_mid
    else:
        extent = r_mid
    extent = min(extent, prof.patch_radius)
    mask = (mesh.vertex_class == INCLUSION2) & (np.abs(x) < extent)
    idx = np.nonzero(mask)[0]
    on_graph = np.zeros(len(idx), dtype=bool)
    for j, i in enumerate(idx):
        gy = spec.lower_graph(x[i])
        tol = 0.25 * (spec.epsilon + prof.gap_growth(x[i])) + 1e-12
        on_graph[j] = abs(y[i] - gy) <= tol
    mask[:] = False
    mask[idx[on_graph]] = True
    return flux_over_vertices(solution, mask)


# ---------------------------------------------------------------------------
# Point evaluation


def _vertex_tri_adjacency(mesh: Mesh):
    adj = [[] for _ in range(mesh.n_vertices)]
    for t, tri in enumerate(mesh.triangles):
        for v in tri:
            adj[int(v)].append(t)
    return adj


def gradient_at(solution: Solution, point) -> np.ndarray:
    """Piecewise-constant P1 gradient at a point.

    Queries on edges or vertices return the area-weighted average of the
    adjacent triangles; points outside the mesh raise ValueError.
    """
    mesh = solution.mesh
    if solution._tri_grads is None:
        pts, tris = mesh.vertices, mesh.triangles
        a, b, c = pts[tris[:, 0]], pts[tris[:, 1]], pts[tris[:, 2]]
        det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1])
        u = solution.u
        ua, ub, uc = u[tris[:, 0]], u[tris[:, 1]], u[tris[:, 2]]
        gx = (ua * (b[:, 1] - c[:, 1]) + ub * (c[:, 1] - a[:, 1]) + uc * (a[:, 1] - b[:, 1])) / det
        gy = (ua * (c[:, 0] - b[:, 0]) + ub * (a[:, 0] - c[:, 0]) + uc * (b[:, 0] - a[:, 0])) / det
        solution._tri_grads = np.column_stack([gx, gy])
        solution._vert_tris = _vertex_tri_adjacency(mesh)
    from scipy.spatial import cKDTree

    pt = np.asarray(point, dtype=float)
    tree = getattr(solution, "_vtree", None)
    if tree is None:
        tree = cKDTree(mesh.vertices)
        solution._vtree = tree
    k = min(8, mesh.n_vertices)
    _, near = tree.query(pt, k=k)
    near = np.atleast_1d(near)
    cand = sorted({t for v in near for t in solution._vert_tris[int(v)]})
    pts, tris = mesh.vertices, mesh.triangles
    hits, weights = [], []
    for t in cand:
        a, b, c = pts[tris[t, 0]], pts[tris[t, 1]], pts[tris[t, 2]]
        det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
        l1 = ((b[1] - c[1]) * (pt[0] - c[0]) + (c[0] - b[0]) * (pt[1] - c[1])) / det
        l2 = ((c[1] - a[1]) * (pt[0] - c[0]) + (a[0] - c[0]) * (pt[1] - c[1])) / det
        l3 = 1.0 - l1 - l2
        if min(l1, l2, l3) >= -1e-9:
            hits.append(t)
            weights.append(0.5 * abs(det))
    if not hits:
        raise ValueError(f"point {tuple(pt)} lies outside the mesh")
    w = np.asarray(weights)
    w /= w.sum()
    return (solution._tri_grads[hits] * w[:, None]).sum(axis=0)


# ---------------------------------------------------------------------------
# Touching-limit flux


def limit_flux_estimate(
    spec,
    p: float,
    eps_list=None,
    h_far: float = 0.25,
    neck_fraction: float = 0.25,
    tol: float = 1e-11,
    tip_cut: float | None = None,
    r_mid: float | None = None,
):
    """Flux of the touching-limit problem driving the neck asymptotics.

    Flat profile: mesh the merged hole at eps = 0, solve the tied problem
    directly, and return the flux through the upper (inclusion-1) portion
    of the hole boundary.  Cusp profile: solve at each eps in eps_list and
    extrapolate the near-neck flux to eps -> 0.
    """
    from .geometry import FlatProfile

    if isinstance(spec.profile, FlatProfile):
        mesh = generate_merged(spec.with_epsilon(0.0), h_far, neck_fraction, tip_cut)
        sol = solve(Problem(mesh=mesh, p=p, tol=tol, coupling="tied"))
        if not sol.converged:
            raise SolverError("touching-limit solve did not converge")
        return sol.flux1
    if eps_list is None or len(eps_list) < 3:
        raise ValueError("cusp limit flux needs at least 3 eps samples")
    if r_mid is None:
        r_mid = 0.3 * spec.profile.patch_radius
    samples = []
    for eps in eps_list:
        mesh = generate(spec.with_epsilon(eps), h_far, neck_fraction)
        sol = solve(Problem(mesh=mesh, p=p, tol=tol))
        if not sol.converged:
            raise SolverError(f"solve at eps={eps} did not converge")
        samples.append((eps, neck_region_flux(sol, r_mid)))
    return limit_extrapolate(samples)


def solution_to_json(solution: Solution) -> str:
    import json

    return json.dumps(
        {
            "U1": solution.U1,
            "U2": solution.U2,
            "energy": solution.energy,
            "flux1": solution.flux1,
            "flux2": solution.flux2,
            "flux_outer": solution.flux_outer,
            "iterations": solution.iterations,
            "converged": solution.converged,
        },
        indent=2,
    )
