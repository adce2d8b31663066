"""Boundary-conforming graded triangulation of the two-inclusion domain.

The neck channel is meshed with structured columns whose spacing follows
the local gap (target edge length min(h_far, neck_fraction * delta)),
the inclusion closure and far field with a size-field-driven hex
sampling, and everything is joined by a single Delaunay triangulation.
Boundary polyline edges are verified to be present (conforming) and the
interiors of the inclusions are carved away, so the triangle areas tile
the polygonal domain exactly.  A bounded smoothing/insertion loop
enforces the 20-degree minimum angle; generation is deterministic.

Vertex classes: 0 free, 1 inclusion-1, 2 inclusion-2, 3 outer Dirichlet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph
from scipy.spatial import Delaunay, cKDTree

from .geometry import (
    DomainSpec,
    FlatProfile,
    _inclusion_arcs,
    _inclusion_polyline,
    _march_graph_positions,
    _outer_polyline,
    _sample_arc,
    _validate_curves,
    polygon_area,
    project_to_inclusion,
    project_to_outer,
)

__all__ = [
    "Mesh",
    "MeshError",
    "FREE",
    "INCLUSION1",
    "INCLUSION2",
    "OUTER",
    "generate",
    "generate_disk",
    "generate_merged",
    "refine_uniform",
    "save_text",
    "load_text",
    "min_angle_deg",
    "triangle_areas",
]

FREE, INCLUSION1, INCLUSION2, OUTER = 0, 1, 2, 3

MIN_ANGLE_DEG = 20.0
_QUALITY_PASSES = 10
_PROTECT_PASSES = 6


class MeshError(RuntimeError):
    """Mesh generation failed (quality, conformity, or size underflow)."""


@dataclass
class Mesh:
    """Conforming triangulation with tagged boundary loops.

    triangles are counterclockwise; boundary_edges[i] is a vertex pair
    lying on the tagged polyline boundary_tags[i].  spec is retained for
    curved re-projection during refinement and is not serialized.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    vertex_class: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: np.ndarray
    spec: DomainSpec | None = None
    loops: list = field(default_factory=list)  # ordered vertex-index loops

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)


# ---------------------------------------------------------------------------
# Triangle utilities


def triangle_areas(pts: np.ndarray, tris: np.ndarray) -> np.ndarray:
    a, b, c = pts[tris[:, 0]], pts[tris[:, 1]], pts[tris[:, 2]]
    return 0.5 * (
        (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
        - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1])
    )


def _tri_min_angles(pts: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Minimum interior angle per triangle, in degrees."""
    a, b, c = pts[tris[:, 0]], pts[tris[:, 1]], pts[tris[:, 2]]
    la = np.linalg.norm(c - b, axis=1)
    lb = np.linalg.norm(c - a, axis=1)
    lc = np.linalg.norm(b - a, axis=1)
    angles = np.empty((len(tris), 3))
    for i, (l0, l1, l2) in enumerate(((la, lb, lc), (lb, lc, la), (lc, la, lb))):
        cosv = (l1**2 + l2**2 - l0**2) / (2.0 * l1 * l2)
        angles[:, i] = np.degrees(np.arccos(np.clip(cosv, -1.0, 1.0)))
    return angles.min(axis=1)


def min_angle_deg(mesh: Mesh) -> float:
    return float(_tri_min_angles(mesh.vertices, mesh.triangles).min())


def _points_in_polygon(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd crossing test, vectorized over query points."""
    x, y = points[:, 0], points[:, 1]
    inside = np.zeros(len(points), dtype=bool)
    x0, y0 = poly[:, 0], poly[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    for i in range(len(poly)):
        cond = (y0[i] > y) != (y1[i] > y)
        if not cond.any():
            continue
        xin = (x1[i] - x0[i]) * (y - y0[i]) / (y1[i] - y0[i]) + x0[i]
        inside ^= cond & (x < xin)
    return inside


# ---------------------------------------------------------------------------
# Channel columns


def _column_spacing_fn(spec: DomainSpec, h_far: float, neck_fraction: float):
    prof = spec.profile
    R = prof.patch_radius

    def spacing(x):
        delta = spec.epsilon + prof.gap_growth(x)
        if delta <= 0.0:
            raise MeshError("gap vanished inside the channel; use generate_merged for eps = 0")
        return min(neck_fraction * delta, h_far, R / 6.0)

    return spacing


def _channel_columns(spec: DomainSpec, xs: np.ndarray, neck_fraction: float):
    """Free interior points on vertical fibers between the two graphs."""
    m = max(2, int(math.ceil(1.0 / neck_fraction)))
    pts = []
    for x in xs:
        lo = spec.lower_graph(x)
        hi = spec.upper_graph(x)
        for k in range(1, m):
            pts.append((x, lo + (hi - lo) * k / m))
    return np.array(pts) if pts else np.empty((0, 2))


def _merged_wedge_columns(spec: DomainSpec, spacing, tip_cut: float):
    """Column x-positions over the two open wedges of the touching limit."""
    prof = spec.profile
    R = prof.patch_radius
    x0 = prof.sigma_half_width + tip_cut
    xs = [x0]
    while xs[-1] < R:
        dx = spacing(xs[-1])
        nxt = xs[-1] + dx
        if nxt >= R - 0.4 * dx:
            xs.append(R)
            break
        xs.append(nxt)
    xs = np.array(xs)
    return np.concatenate([-xs[::-1], xs])


# ---------------------------------------------------------------------------
# Far-field graded sampling


def _loop_local_spacing(loop_pts: np.ndarray) -> np.ndarray:
    nxt = np.roll(loop_pts, -1, axis=0)
    prv = np.roll(loop_pts, 1, axis=0)
    return 0.5 * (
        np.linalg.norm(nxt - loop_pts, axis=1) + np.linalg.norm(loop_pts - prv, axis=1)
    )


def _hex_grid(half_extent: float, g: float) -> np.ndarray:
    """Hex lattice covering [-e, e]^2, symmetric under x -> -x, y -> -y."""
    dy = g * math.sqrt(3.0) / 2.0
    rows = int(math.ceil(half_extent / dy))
    cols = int(math.ceil(half_extent / g)) + 1
    pts = []
    for j in range(-rows, rows):
        y = (j + 0.5) * dy
        off = 0.25 * g if (j % 2 == 0) else -0.25 * g
        for i in range(-cols, cols + 1):
            x = i * g + off
            if -half_extent <= x <= half_extent:
                pts.append((x, y))
    return np.array(pts) if pts else np.empty((0, 2))


def _graded_interior(spec, seed_pts, seed_spacing, exclusion_polys, h_far, s_floor):
    """Hex points graded from the boundary spacing up to h_far.

    The size field is s(P) = min(h_far, nearest-seed spacing + 0.8 d);
    seed spacings are floored at s_floor so the level hierarchy stays
    shallow (the sub-floor region is the structured channel, which is
    excluded by the distance margin anyway).
    """
    L = spec.outer_radius
    seeds_s = np.maximum(seed_spacing, s_floor)
    seed_tree = cKDTree(seed_pts)
    kq = min(8, len(seed_pts))

    def size_at(pts):
        d, idx = seed_tree.query(pts, k=kq)
        if kq == 1:
            d, idx = d[:, None], idx[:, None]
        return np.minimum(h_far, (seeds_s[idx] + 0.8 * d).min(axis=1))

    n_levels = max(1, int(math.ceil(math.log2(max(h_far / s_floor, 1.0)))) + 1)
    accepted = []
    occupied_pts = seed_pts
    occupied = seed_tree
    for lev in range(n_levels):
        g = h_far / 2.0**lev
        cand = _hex_grid(L, g)
        if len(cand) == 0:
            continue
        r = np.hypot(cand[:, 0], cand[:, 1])
        cand = cand[r <= L - 0.62 * h_far]
        if len(cand) == 0:
            continue
        h = size_at(cand)
        lev_of = np.clip(np.floor(np.log2(h_far / h)).astype(int), 0, n_levels - 1)
        sel = lev_of == lev
        cand, h = cand[sel], h[sel]
        if len(cand) == 0:
            continue
        inside_any = np.zeros(len(cand), dtype=bool)
        for poly in exclusion_polys:
            lo = poly.min(axis=0) - 0.1 * h_far
            hi = poly.max(axis=0) + 0.1 * h_far
            box = (
                (cand[:, 0] >= lo[0]) & (cand[:, 0] <= hi[0])
                & (cand[:, 1] >= lo[1]) & (cand[:, 1] <= hi[1])
            )
            if box.any():
                inside_any[box] |= _points_in_polygon(cand[box], poly)
        cand, h = cand[~inside_any], h[~inside_any]
        if len(cand) == 0:
            continue
        d, _ = occupied.query(cand, k=1)
        keep = d >= 0.62 * h
        cand = cand[keep]
        if len(cand) == 0:
            continue
        accepted.append(cand)
        occupied_pts = np.vstack([occupied_pts, cand])
        occupied = cKDTree(occupied_pts)
    return np.vstack(accepted) if accepted else np.empty((0, 2))


# ---------------------------------------------------------------------------
# Conforming triangulation with protection, carving, quality control


def _delaunay_ccw(pts: np.ndarray) -> np.ndarray:
    tris = Delaunay(pts).simplices.astype(np.int64)
    areas = triangle_areas(pts, tris)
    flip = areas < 0.0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    zero = np.abs(triangle_areas(pts, tris)) < 1e-30
    return tris[~zero]


class _Builder:
    """Mutable state for the generate pipeline."""

    def __init__(self, spec, loops_pts, loops_vtags, channel_pts, h_far, s_floor):
        self.spec = spec
        loop_arrays = [np.asarray(a, dtype=float) for a in loops_pts]
        offsets = np.cumsum([0] + [len(a) for a in loop_arrays])
        boundary_pts = np.vstack(loop_arrays)
        boundary_spacing = np.concatenate([_loop_local_spacing(a) for a in loop_arrays])
        self.loop_idx = [
            np.arange(offsets[k], offsets[k + 1], dtype=np.int64)
            for k in range(len(loop_arrays))
        ]
        self.vtags = [np.asarray(t, dtype=np.int8) for t in loops_vtags]

        exclusion = [
            arr for arr, t in zip(loop_arrays, self.vtags) if t[0] != OUTER
        ]
        if len(channel_pts):
            seeds = np.vstack([boundary_pts, channel_pts])
            seeds_s = np.concatenate(
                [boundary_spacing, np.full(len(channel_pts), s_floor)]
            )
        else:
            seeds = boundary_pts
            seeds_s = boundary_spacing
        graded = _graded_interior(spec, seeds, seeds_s, exclusion, h_far, s_floor)

        parts = [boundary_pts]
        if len(channel_pts):
            parts.append(channel_pts)
        if len(graded):
            parts.append(graded)
        self.pts = np.vstack(parts)
        self.classes = np.zeros(len(self.pts), dtype=np.int8)
        for idx, t in zip(self.loop_idx, self.vtags):
            self.classes[idx] = t
        self.exclusion_tags = [
            t[0] if (t == t[0]).all() else INCLUSION1 for t in self.vtags
        ]
        self.tris = np.empty((0, 3), dtype=np.int64)

        dup = cKDTree(self.pts).query_pairs(1e-9 * spec.outer_radius)
        if dup:
            raise MeshError(f"{len(dup)} coincident point pairs in generated cloud")

    # -- steps ----------------------------------------------------------

    def triangulate_conforming(self):
        """Delaunay + insert loop-edge midpoints until all loops conform."""
        self.tris = _delaunay_ccw(self.pts)
        for _ in range(_PROTECT_PASSES):
            V = len(self.pts)
            e = np.vstack(
                [self.tris[:, [0, 1]], self.tris[:, [1, 2]], self.tris[:, [2, 0]]]
            )
            e.sort(axis=1)
            present_keys = np.unique(e[:, 0].astype(np.int64) * V + e[:, 1])
            missing = []
            for k, idx in enumerate(self.loop_idx):
                a, b = idx, np.roll(idx, -1)
                lo, hi = np.minimum(a, b), np.maximum(a, b)
                keys = lo.astype(np.int64) * V + hi
                absent = ~np.isin(keys, present_keys)
                for i in np.nonzero(absent)[0]:
                    missing.append((k, int(i), int(a[i]), int(b[i])))
            if not missing:
                return
            new_pts, new_cls = [], []
            for k, i, a, b in missing:
                new_pts.append(0.5 * (self.pts[a] + self.pts[b]))
                ta, tb = int(self.vtags[k][i]), int(self.vtags[k][(i + 1) % len(self.vtags[k])])
                new_cls.append(ta if ta == tb else min(ta, tb))
            start = len(self.pts)
            self.pts = np.vstack([self.pts, np.array(new_pts)])
            self.classes = np.concatenate(
                [self.classes, np.array(new_cls, dtype=np.int8)]
            )
            for j, (k, i, a, b) in enumerate(missing):
                pos = int(np.nonzero(self.loop_idx[k] == a)[0][0]) + 1
                self.loop_idx[k] = np.insert(self.loop_idx[k], pos, start + j)
                self.vtags[k] = np.insert(self.vtags[k], pos, new_cls[j])
            self.tris = _delaunay_ccw(self.pts)
        raise MeshError("boundary edges could not be recovered in the triangulation")

    def _loop_edge_keys(self):
        V = len(self.pts)
        keys = []
        for idx in self.loop_idx:
            a, b = idx, np.roll(idx, -1)
            lo, hi = np.minimum(a, b), np.maximum(a, b)
            keys.append(lo.astype(np.int64) * V + hi)
        return np.concatenate(keys)

    def carve(self):
        """Remove triangles enclosed by inclusion loops.

        Conformity (every loop edge present) makes the loops exact walls
        of the triangle adjacency graph, so the domain is the connected
        component touching the outer boundary; no geometric tests needed.
        """
        tris = self.tris
        n = len(tris)
        if n == 0:
            return
        V = len(self.pts)
        e = np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
        e.sort(axis=1)
        keys = e[:, 0].astype(np.int64) * V + e[:, 1]
        tri_ids = np.tile(np.arange(n, dtype=np.int64), 3)
        order = np.argsort(keys, kind="stable")
        ks, ts = keys[order], tri_ids[order]
        shared = ks[:-1] == ks[1:]
        t1, t2 = ts[:-1][shared], ts[1:][shared]
        ek = ks[:-1][shared]
        passable = ~np.isin(ek, self._loop_edge_keys())
        graph = sp.coo_matrix(
            (np.ones(int(passable.sum())), (t1[passable], t2[passable])),
            shape=(n, n),
        )
        _, labels = csgraph.connected_components(graph, directed=False)
        # seed with the single triangle on the first outer-loop edge
        seed = None
        for idx, t in zip(self.loop_idx, self.vtags):
            if t[0] == OUTER:
                a, b = int(idx[0]), int(idx[1])
                key = np.int64(min(a, b)) * V + max(a, b)
                pos = int(np.searchsorted(ks, key))
                seed = int(ts[pos])
                break
        if seed is None:
            raise MeshError("no outer loop present")
        self.tris = tris[labels == labels[seed]]

    def smooth_bad(self, bad_mask):
        """Umbrella-smooth free vertices near bad triangles; keep inside."""
        n = len(self.pts)
        target = np.zeros(n, dtype=bool)
        target[self.tris[bad_mask].ravel()] = True
        touch = np.zeros(len(self.tris), dtype=bool)
        for k in range(3):
            touch |= target[self.tris[:, k]]
        target[self.tris[touch].ravel()] = True
        target &= self.classes == FREE
        if not target.any():
            return False
        edges = np.vstack(
            [self.tris[:, [0, 1]], self.tris[:, [1, 2]], self.tris[:, [2, 0]]]
        )
        out = self.pts.copy()
        for _ in range(2):
            acc = np.zeros((n, 2))
            cnt = np.zeros(n)
            for a, b in ((edges[:, 0], edges[:, 1]), (edges[:, 1], edges[:, 0])):
                np.add.at(acc, a, out[b])
                np.add.at(cnt, a, 1.0)
            upd = (cnt > 0) & target
            out[upd] = acc[upd] / cnt[upd, None]
        # revert moves that left the domain
        moved = np.nonzero(np.any(out != self.pts, axis=1))[0]
        if len(moved):
            escaped = np.zeros(len(moved), dtype=bool)
            escaped |= np.hypot(out[moved, 0], out[moved, 1]) >= self.spec.outer_radius
            for idx, tag in zip(self.loop_idx, self.exclusion_tags):
                if tag == OUTER:
                    continue
                escaped |= _points_in_polygon(out[moved], self.pts[idx])
            out[moved[escaped]] = self.pts[moved[escaped]]
        self.pts = out
        return True

    def insert_circumcenters(self, bad_mask):
        """Ruppert-style splitting of surviving bad triangles."""
        bad = self.tris[bad_mask]
        if len(bad) == 0:
            return False
        a, b, c = self.pts[bad[:, 0]], self.pts[bad[:, 1]], self.pts[bad[:, 2]]
        d = 2.0 * (
            a[:, 0] * (b[:, 1] - c[:, 1])
            + b[:, 0] * (c[:, 1] - a[:, 1])
            + c[:, 0] * (a[:, 1] - b[:, 1])
        )
        ok = np.abs(d) > 1e-300
        d_safe = np.where(ok, d, 1.0)
        a2 = (a**2).sum(axis=1)
        b2 = (b**2).sum(axis=1)
        c2 = (c**2).sum(axis=1)
        ux = (a2 * (b[:, 1] - c[:, 1]) + b2 * (c[:, 1] - a[:, 1]) + c2 * (a[:, 1] - b[:, 1])) / d_safe
        uy = (a2 * (c[:, 0] - b[:, 0]) + b2 * (a[:, 0] - c[:, 0]) + c2 * (b[:, 0] - a[:, 0])) / d_safe
        cc = np.column_stack([ux, uy])[ok]
        rad = np.linalg.norm(cc - a[ok], axis=1)
        inside = np.hypot(cc[:, 0], cc[:, 1]) < self.spec.outer_radius * 0.999
        for idx, tag in zip(self.loop_idx, self.exclusion_tags):
            if tag == OUTER:
                continue
            inside &= ~_points_in_polygon(cc, self.pts[idx])
        cc, rad = cc[inside], rad[inside]
        if len(cc) == 0:
            return False
        dmin, _ = cKDTree(self.pts).query(cc, k=1)
        sel = dmin >= 0.45 * rad
        cc, rad = cc[sel], rad[sel]
        if len(cc) == 0:
            return False
        kept = []
        for i in range(len(cc)):
            if all(
                math.hypot(cc[i, 0] - cc[j, 0], cc[i, 1] - cc[j, 1]) >= 0.45 * rad[i]
                for j in kept
            ):
                kept.append(i)
        cc = cc[kept]
        self.pts = np.vstack([self.pts, cc])
        self.classes = np.concatenate(
            [self.classes, np.zeros(len(cc), dtype=np.int8)]
        )
        return True

    def polish(self):
        for it in range(_QUALITY_PASSES):
            ang = _tri_min_angles(self.pts, self.tris)
            bad = ang < MIN_ANGLE_DEG
            if not bad.any():
                return
            changed = self.smooth_bad(bad)
            if it >= 1:
                changed |= self.insert_circumcenters(bad)
            if not changed:
                break
            self.triangulate_conforming()
            self.carve()
        ang = _tri_min_angles(self.pts, self.tris)
        if ang.min() < MIN_ANGLE_DEG:
            raise MeshError(
                f"minimum angle {ang.min():.2f} deg below {MIN_ANGLE_DEG} after "
                f"{_QUALITY_PASSES} quality passes"
            )

    def finish(self) -> Mesh:
        edges, tags = [], []
        for idx, t in zip(self.loop_idx, self.vtags):
            n = len(idx)
            for i in range(n):
                edges.append((int(idx[i]), int(idx[(i + 1) % n])))
                ta, tb = int(t[i]), int(t[(i + 1) % n])
                tags.append(ta if ta == tb else min(ta, tb))
        mesh = Mesh(
            vertices=self.pts,
            triangles=self.tris,
            vertex_class=self.classes,
            boundary_edges=np.array(edges, dtype=np.int64),
            boundary_tags=np.array(tags, dtype=np.int8),
            spec=self.spec,
            loops=[idx.copy() for idx in self.loop_idx],
        )
        # exact tiling check: triangle areas against the loop polygons
        areas = triangle_areas(mesh.vertices, mesh.triangles)
        if (areas <= 0.0).any():
            raise MeshError("nonpositive triangle area")
        target = sum(polygon_area(self.pts[idx]) for idx in self.loop_idx)
        total = float(areas.sum())
        if abs(total - target) > 1e-10 * abs(target):
            raise MeshError(
                f"triangulation does not tile the polygon: {total!r} vs {target!r}"
            )
        return mesh


def _run_builder(spec, loops_pts, loops_vtags, channel_pts, h_far, s_floor) -> Mesh:
    builder = _Builder(spec, loops_pts, loops_vtags, channel_pts, h_far, s_floor)
    builder.triangulate_conforming()
    builder.carve()
    builder.polish()
    return builder.finish()


# ---------------------------------------------------------------------------
# Public generation entry points


def generate_disk(radius: float, h_far: float) -> Mesh:
    """Plain disk mesh (no inclusions): far-field machinery sanity case."""
    if radius <= 0.0 or h_far <= 0.0:
        raise ValueError("radius and h_far must be positive")
    from types import SimpleNamespace

    shim = SimpleNamespace(outer_radius=radius)
    n = max(16, int(math.ceil(2.0 * math.pi * radius / h_far)))
    if n % 2:
        n += 1
    th = 2.0 * math.pi * np.arange(n) / n
    outer = np.column_stack([radius * np.cos(th), radius * np.sin(th)])
    mesh = _run_builder(
        shim,
        [outer],
        [np.full(len(outer), OUTER, dtype=np.int8)],
        np.empty((0, 2)),
        h_far,
        h_far,
    )
    mesh.spec = None
    return mesh


def generate(spec: DomainSpec, h_far: float, neck_fraction: float = 0.25) -> Mesh:
    """Graded conforming mesh of the eps > 0 two-inclusion domain.

    Local target edge length is min(h_far, neck_fraction * delta(x'))
    inside the neck and h_far elsewhere; all angles end up >= 20 degrees.
    """
    if h_far <= 0.0:
        raise ValueError("h_far must be positive")
    if not 0.0 < neck_fraction <= 0.5:
        raise ValueError("neck_fraction must lie in (0, 1/2]")
    if spec.epsilon <= 0.0:
        raise ValueError("generate requires eps > 0; use generate_merged for the touching limit")
    spacing = _column_spacing_fn(spec, h_far, neck_fraction)
    xs = _march_graph_positions(spec, spacing)
    cap_max = min(h_far, math.sqrt(8.0 * spec.cap_radius * 0.003 * spec.profile.patch_radius))
    inc1 = _inclusion_polyline(spec, 1, spacing, cap_max)
    inc2 = _inclusion_polyline(spec, 2, spacing, cap_max)
    outer = _outer_polyline(spec, h_far)
    _validate_curves(spec, inc1, inc2, outer)
    channel = _channel_columns(spec, xs, neck_fraction)
    s_floor = 0.8 * spacing(spec.profile.patch_radius)
    return _run_builder(
        spec,
        [inc1, inc2, outer],
        [
            np.full(len(inc1), INCLUSION1, dtype=np.int8),
            np.full(len(inc2), INCLUSION2, dtype=np.int8),
            np.full(len(outer), OUTER, dtype=np.int8),
        ],
        channel,
        h_far,
        s_floor,
    )


def generate_merged(
    spec: DomainSpec,
    h_far: float,
    neck_fraction: float = 0.25,
    tip_cut: float | None = None,
) -> Mesh:
    """Mesh of the touching limit (flat profile, eps = 0).

    The two inclusions merge across the flat segment into a single hole;
    the quadratic wedge tips are truncated at distance tip_cut from the
    flat segment, where the field is exponentially suppressed.  Hole
    vertices above the symmetry line carry the inclusion-1 tag, those
    below inclusion-2, so the flux split remains available.
    """
    if not isinstance(spec.profile, FlatProfile):
        raise MeshError("the touching limit is meshed for the flat profile only")
    if spec.epsilon != 0.0:
        spec = spec.with_epsilon(0.0)
    prof = spec.profile
    R, w = prof.patch_radius, prof.sigma_half_width
    if tip_cut is None:
        tip_cut = 0.02 * R
    if not 0.0 < tip_cut < (R - w) / 4.0:
        raise ValueError("tip_cut must lie in (0, (patch_radius - w)/4)")

    spacing = _column_spacing_fn(spec, h_far, neck_fraction)
    xs = _merged_wedge_columns(spec, spacing, tip_cut)
    x_tip = prof.sigma_half_width + tip_cut
    # The tip verticals are boundary segments; interior fibers there would
    # sit on the boundary edge and break conformity.
    xs_interior = xs[np.abs(np.abs(xs) - x_tip) > 1e-12 * R]
    channel = _channel_columns(spec, xs_interior, neck_fraction)

    xs_right = xs[xs > 0]
    xs_left = xs[xs < 0]
    cap_max = min(h_far, math.sqrt(8.0 * spec.cap_radius * 0.003 * R))
    junction_len = spacing(R)
    arcs1, _ = _inclusion_arcs(spec, 1)
    arcs2, _ = _inclusion_arcs(spec, 2)

    pts, tags = [], []

    def add(p, tag):
        if pts and math.hypot(pts[-1][0] - p[0], pts[-1][1] - p[1]) < 1e-14:
            return
        pts.append((float(p[0]), float(p[1])))
        tags.append(tag)

    def add_tip(x, descending=True):
        """Boundary samples along the tiny vertical cut at the tip."""
        hi, lo = spec.upper_graph(x), spec.lower_graph(x)
        m = max(1, int(math.ceil((hi - lo) / max(spacing(x), 1e-300))))
        ks = range(1, m) if descending else range(m - 1, 0, -1)
        for k in ks:
            y = hi + (lo - hi) * k / m
            add((x, y), INCLUSION1 if y > 0 else INCLUSION2)

    for x in xs_right:  # upper right graph, tip -> patch edge
        add((x, spec.upper_graph(x)), INCLUSION1)
    for arc in arcs1:  # over the top of inclusion 1, right to left
        for ang in [arc.ang0] + _sample_arc(arc, junction_len, cap_max) + [arc.ang1]:
            add(arc.point(ang), INCLUSION1)
    for x in xs_left:  # upper left graph, patch edge -> tip
        add((x, spec.upper_graph(x)), INCLUSION1)
    add_tip(xs_left[-1])  # left tip vertical, descending
    for x in xs_left[::-1]:  # lower left graph, tip -> patch edge
        add((x, spec.lower_graph(x)), INCLUSION2)
    # under the bottom of inclusion 2: its build-frame arcs run right
    # junction -> left junction; mirrored and reversed they run left -> right.
    for arc in arcs2[::-1]:
        angs = [arc.ang0] + _sample_arc(arc, junction_len, cap_max) + [arc.ang1]
        for ang in angs[::-1]:
            p = arc.point(ang)
            add((p[0], -p[1]), INCLUSION2)
    for x in xs_right[::-1]:  # lower right graph, patch edge -> tip
        add((x, spec.lower_graph(x)), INCLUSION2)
    add_tip(xs_right[0], descending=False)  # right tip vertical, ascending

    hole = np.array(pts)
    hole_tags = np.array(tags, dtype=np.int8)
    if polygon_area(hole) > 0.0:
        hole = hole[::-1].copy()
        hole_tags = hole_tags[::-1].copy()
    L = spec.outer_radius
    if L - float(np.max(np.hypot(hole[:, 0], hole[:, 1]))) <= L / 4.0:
        raise MeshError("merged hole comes within L/4 of the outer boundary")
    outer = _outer_polyline(spec, h_far)
    s_floor = 0.8 * spacing(R)
    return _run_builder(
        spec,
        [hole, outer],
        [hole_tags, np.full(len(outer), OUTER, dtype=np.int8)],
        channel,
        h_far,
        s_floor,
    )


# ---------------------------------------------------------------------------
# Uniform refinement


def refine_uniform(mesh: Mesh, projector=None) -> Mesh:
    """Split every triangle in four; re-project boundary midpoints.

    New vertex count is V + E (one vertex per parent edge).  Midpoints of
    tagged boundary edges inherit the tag and are projected back onto the
    exact curve when the generating DomainSpec is available; meshes built
    by hand may pass projector(point, tag) -> point instead.
    """
    pts = mesh.vertices
    tris = mesh.triangles
    classes = mesh.vertex_class

    boundary = {}
    for (a, b), tag in zip(mesh.boundary_edges, mesh.boundary_tags):
        boundary[(min(int(a), int(b)), max(int(a), int(b)))] = int(tag)

    tri_edges = np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    uniq = np.unique(np.sort(tri_edges, axis=1), axis=0)
    edge_key = {}
    mid_coords, mid_class = [], []
    next_idx = len(pts)
    for a, b in uniq:
        key = (int(a), int(b))
        mid = 0.5 * (pts[a] + pts[b])
        tag = boundary.get(key)
        if tag is None:
            mid_class.append(FREE)
        else:
            ca, cb = int(classes[a]), int(classes[b])
            if ca == cb:
                proj = None
                if projector is not None:
                    proj = np.asarray(projector(mid, tag), dtype=float)
                elif mesh.spec is not None:
                    if tag == OUTER:
                        proj = np.array(project_to_outer(mesh.spec, mid))
                    elif tag in (INCLUSION1, INCLUSION2):
                        proj = np.array(project_to_inclusion(mesh.spec, tag, mid))
                if proj is not None:
                    # A genuine curve midpoint moves by the chord sagitta,
                    # far less than the edge length; artificial straight
                    # segments (the merged tip cut) must stay put.
                    edge_len = float(np.hypot(*(pts[b] - pts[a])))
                    if float(np.hypot(*(proj - mid))) <= 0.3 * edge_len:
                        mid = proj
            mid_class.append(tag)
        edge_key[key] = next_idx
        mid_coords.append(mid)
        next_idx += 1

    all_pts = np.vstack([pts, np.array(mid_coords)])
    all_classes = np.concatenate([classes, np.array(mid_class, dtype=np.int8)])

    def mid_of(a, b):
        return edge_key[(min(int(a), int(b)), max(int(a), int(b)))]

    children = []
    for a, b, c in tris:
        ab, bc, ca = mid_of(a, b), mid_of(b, c), mid_of(c, a)
        children += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
    children = np.array(children, dtype=np.int64)
    flip = triangle_areas(all_pts, children) < 0.0
    children[flip] = children[flip][:, [0, 2, 1]]

    new_edges, new_tags = [], []
    for (a, b), tag in zip(mesh.boundary_edges, mesh.boundary_tags):
        m = mid_of(a, b)
        new_edges += [(int(a), m), (m, int(b))]
        new_tags += [int(tag), int(tag)]

    new_loops = []
    for loop in mesh.loops:
        refined = []
        n = len(loop)
        for i in range(n):
            a, b = int(loop[i]), int(loop[(i + 1) % n])
            refined += [a, mid_of(a, b)]
        new_loops.append(np.array(refined, dtype=np.int64))

    return Mesh(
        vertices=all_pts,
        triangles=children,
        vertex_class=all_classes,
        boundary_edges=np.array(new_edges, dtype=np.int64),
        boundary_tags=np.array(new_tags, dtype=np.int8),
        spec=mesh.spec,
        loops=new_loops,
    )


# ---------------------------------------------------------------------------
# Plain-text export (bit-exact round trip)


def save_text(mesh: Mesh, path, u: np.ndarray | None = None):
    """Line-oriented format: header `V T`, V vertex lines, T index lines.

    Vertex lines are `x y class` (repr round-trips doubles exactly), with
    an optional fourth column for a per-vertex field.
    """
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_vertices} {mesh.n_triangles}\n")
        for i in range(mesh.n_vertices):
            x, y = mesh.vertices[i]
            line = f"{float(x)!r} {float(y)!r} {int(mesh.vertex_class[i])}"
            if u is not None:
                line += f" {float(u[i])!r}"
            fh.write(line + "\n")
        for a, b, c in mesh.triangles:
            fh.write(f"{int(a)} {int(b)} {int(c)}\n")


def load_text(path):
    """Inverse of save_text; boundary edges are rebuilt from adjacency.

    Returns (mesh, u) where u is None unless the file carries the
    optional field column.
    """
    with open(path) as fh:
        nv, nt = (int(tok) for tok in fh.readline().split())
        verts = np.empty((nv, 2))
        classes = np.empty(nv, dtype=np.int8)
        u = None
        for i in range(nv):
            toks = fh.readline().split()
            verts[i] = (float(toks[0]), float(toks[1]))
            classes[i] = int(toks[2])
            if len(toks) > 3:
                if u is None:
                    u = np.empty(nv)
                u[i] = float(toks[3])
        tris = np.empty((nt, 3), dtype=np.int64)
        for i in range(nt):
            tris[i] = [int(tok) for tok in fh.readline().split()]
    edges, tags = _boundary_from_triangulation(tris, classes)
    mesh = Mesh(
        vertices=verts,
        triangles=tris,
        vertex_class=classes,
        boundary_edges=edges,
        boundary_tags=tags,
        spec=None,
        loops=[],
    )
    return mesh, u


def _boundary_from_triangulation(tris, classes):
    e = np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    es = np.sort(e, axis=1)
    uniq, counts = np.unique(es, axis=0, return_counts=True)
    bnd = uniq[counts == 1]
    tags = []
    for a, b in bnd:
        ca, cb = int(classes[a]), int(classes[b])
        if ca == cb:
            tags.append(ca)
        else:
            nonfree = [x for x in (ca, cb) if x != FREE]
            tags.append(min(nonfree) if nonfree else FREE)
    return bnd.astype(np.int64), np.array(tags, dtype=np.int8)
