"""Shared oracle meshes for the solver tests."""

import numpy as np
from scipy.spatial import Delaunay

from pneck.mesh import Mesh, OUTER, _boundary_from_triangulation, triangle_areas


def strip_mesh(nx=21, ny=5, d0=0.1):
    """Rectangle [0,1] x [0,d0], bottom and top tagged Dirichlet.

    The linear field u = y/d0 solves the p-Dirichlet problem for every p
    (natural boundary conditions on the free sides), so |Du| = 1/d0 and
    the energy is d0**(1-p).
    """
    xs = np.linspace(0.0, 1.0, nx)
    ys = np.linspace(0.0, d0, ny)
    X, Y = np.meshgrid(xs, ys)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    tris = Delaunay(pts).simplices.astype(np.int64)
    flip = triangle_areas(pts, tris) < 0.0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    classes = np.zeros(len(pts), dtype=np.int8)
    classes[np.abs(pts[:, 1]) < 1e-14] = OUTER
    classes[np.abs(pts[:, 1] - d0) < 1e-14] = OUTER
    edges, tags = _boundary_from_triangulation(tris, classes)
    return Mesh(pts, tris, classes, edges, tags, None, [])


def annulus_mesh(nr=21, nth=80, r0=1.0, r1=2.0, jitter=0.18, seed=42):
    """Annulus with both circles Dirichlet-tagged; first ring is inner.

    Interior vertices carry a seeded jitter so nodal superconvergence of
    the rotationally reduced problem does not mask the generic O(h^2)
    convergence that the refinement study measures.
    """
    rs = np.geomspace(r0, r1, nr)
    th = 2.0 * np.pi * np.arange(nth) / nth
    pts = []
    for r in rs:
        pts.extend(zip(r * np.cos(th), r * np.sin(th)))
    pts = np.array(pts)
    rng = np.random.default_rng(seed)
    interior = np.ones(len(pts), dtype=bool)
    interior[:nth] = False
    interior[-nth:] = False
    h_loc = np.minimum(2.0 * np.pi * np.hypot(pts[:, 0], pts[:, 1]) / nth, np.diff(rs).mean())
    pts[interior] += (rng.uniform(-1, 1, (len(pts), 2)) * jitter * h_loc[:, None])[interior]
    tris = []
    for i in range(nr - 1):
        for j in range(nth):
            a = i * nth + j
            b = i * nth + (j + 1) % nth
            c = (i + 1) * nth + j
            d = (i + 1) * nth + (j + 1) % nth
            tris.append((a, b, d))
            tris.append((a, d, c))
    tris = np.array(tris, dtype=np.int64)
    flip = triangle_areas(pts, tris) < 0.0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    classes = np.zeros(len(pts), dtype=np.int8)
    classes[:nth] = OUTER
    classes[-nth:] = OUTER
    edges, tags = _boundary_from_triangulation(tris, classes)
    return Mesh(pts, tris, classes, edges, tags, None, [])


def annulus_exact(r, p):
    """Radial p-harmonic potential with u(1) = 0, u(2) = 1."""
    r = np.asarray(r, dtype=float)
    if abs(p - 2.0) < 1e-14:
        return np.log(r) / np.log(2.0)
    e = (p - 2.0) / (p - 1.0)
    return (r**e - 1.0) / (2.0**e - 1.0)


def annulus_projector(pt, tag):
    r = np.hypot(pt[0], pt[1])
    return pt * ((1.0 if r < 1.5 else 2.0) / r)


def random_spec(rng):
    """One random two-inclusion configuration for the property suite."""
    from pneck.geometry import DomainSpec, FlatProfile, PowerProfile, TrigPoly

    if rng.uniform() < 0.5:
        profile = FlatProfile(
            sigma_half_width=rng.uniform(0.3, 0.7),
            curvature_coeff=rng.uniform(0.5, 4.0),
            patch_radius=1.0,
        )
    else:
        profile = PowerProfile(
            gamma=rng.uniform(0.2, 0.8), amp=rng.uniform(0.5, 2.0), patch_radius=1.0
        )
    return DomainSpec(
        profile=profile,
        epsilon=rng.uniform(3e-3, 3e-2),
        dirichlet=TrigPoly(
            a0=rng.uniform(-0.3, 0.3),
            cos_coeffs=tuple(rng.uniform(-1.0, 1.0, 2)),
            sin_coeffs=tuple(rng.uniform(-1.0, 1.0, 2)),
        ),
        split_fraction=rng.uniform(0.0, 1.0),
    )
