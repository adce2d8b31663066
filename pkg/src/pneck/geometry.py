"""Neck-gap profiles and the two-inclusion domain geometry (n = 2).

Two gap regimes are supported: a partially flat gap (the inclusion
boundaries coincide on a segment and separate quadratically) and a
power-law cusp gap delta = eps + a|x|^(1+gamma).  The local boundary
graphs are capped into closed convex C1 curves by three tangent circular
arcs per inclusion: a transition arc at each end of the graph turning the
tangent to vertical, joined by a top arc centered on the symmetry axis.
A single tangent arc cannot close a shallow graph without overshooting
the outer boundary, which is why the closure uses three arcs.

The vertical split of the gap between the two inclusions is controlled
by ``split_fraction`` t: h1 = t*(gap - eps), h2 = -(1-t)*(gap - eps).
Everything downstream depends on h1 - h2 only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "FlatProfile",
    "PowerProfile",
    "TrigPoly",
    "DomainSpec",
    "GeometryError",
    "gap",
    "dist_to_flat",
    "boundary_curves",
    "spec_to_json",
    "spec_from_json",
    "default_flat_spec",
    "default_cusp_spec",
]


class GeometryError(ValueError):
    """Invalid geometric configuration (intersections, range violations)."""


@dataclass(frozen=True)
class FlatProfile:
    """Gap closed on the segment (-w, w), opening quadratically outside.

    sigma_half_width is w (so the flat set has length 2w), curvature_coeff
    is the quadratic growth coefficient q in h1 - h2 = q * d(x)^2, and
    patch_radius bounds the region where the boundaries are graphs.
    """

    sigma_half_width: float
    curvature_coeff: float
    patch_radius: float

    def __post_init__(self):
        if self.sigma_half_width <= 0.0:
            raise ValueError("sigma_half_width must be positive")
        if self.curvature_coeff <= 0.0:
            raise ValueError("curvature_coeff must be positive")
        if self.patch_radius <= self.sigma_half_width:
            raise ValueError("patch_radius must exceed sigma_half_width")

    def gap_growth(self, xp: float) -> float:
        d = dist_to_flat(self, xp)
        return self.curvature_coeff * d * d

    def gap_growth_slope(self, xp: float) -> float:
        d = dist_to_flat(self, xp)
        return 2.0 * self.curvature_coeff * d * math.copysign(1.0, xp)


@dataclass(frozen=True)
class PowerProfile:
    """Gap opening like a|x|^(1+gamma) from a single touching point.

    amp may be a positive constant or a callable of the direction
    (sign(x) in the plane).  c0 declares the bound 1/c0 <= a <= c0; it
    defaults to max(amp, 1/amp) for constant amplitudes and must be given
    for direction-dependent ones.
    """

    gamma: float
    amp: object
    patch_radius: float
    c0: float | None = None

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.patch_radius <= 0.0:
            raise ValueError("patch_radius must be positive")
        if callable(self.amp):
            if self.c0 is None:
                raise ValueError("direction-dependent amp requires an explicit c0")
        else:
            amp = float(self.amp)
            if amp <= 0.0:
                raise ValueError("amp must be positive")
            if self.c0 is None:
                object.__setattr__(self, "c0", max(amp, 1.0 / amp))
        if self.c0 is not None and self.c0 < 1.0:
            raise ValueError("c0 must be >= 1")
        if not callable(self.amp):
            a = float(self.amp)
            if not (1.0 / self.c0 - 1e-15 <= a <= self.c0 + 1e-15):
                raise ValueError("amp violates the declared c0 bounds")

    def amp_at(self, xp: float) -> float:
        if callable(self.amp):
            return float(self.amp(1.0 if xp >= 0.0 else -1.0))
        return float(self.amp)

    def gap_growth(self, xp: float) -> float:
        return self.amp_at(xp) * abs(xp) ** (1.0 + self.gamma)

    def gap_growth_slope(self, xp: float) -> float:
        return (
            (1.0 + self.gamma)
            * self.amp_at(xp)
            * abs(xp) ** self.gamma
            * math.copysign(1.0, xp)
        )


@dataclass(frozen=True)
class TrigPoly:
    """Trigonometric polynomial a0 + sum a_k cos(k t) + b_k sin(k t)."""

    a0: float = 0.0
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = (1.0,)

    def __post_init__(self):
        if len(self.cos_coeffs) > 4 or len(self.sin_coeffs) > 4:
            raise ValueError("boundary data is limited to degree 4")
        object.__setattr__(self, "cos_coeffs", tuple(float(c) for c in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(float(c) for c in self.sin_coeffs))

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.full_like(theta, self.a0)
        for k, c in enumerate(self.cos_coeffs, start=1):
            out = out + c * np.cos(k * theta)
        for k, c in enumerate(self.sin_coeffs, start=1):
            out = out + c * np.sin(k * theta)
        return out if out.ndim else float(out)

    def max_abs(self) -> float:
        th = np.linspace(0.0, 2.0 * math.pi, 4096, endpoint=False)
        return float(np.max(np.abs(self(th))))


EPS_RANGE = (1e-5, 0.1)  # supported eps, relative to patch_radius


@dataclass(frozen=True)
class DomainSpec:
    """Outer disk, two inclusions, and Dirichlet data, parameterized by eps.

    epsilon = 0 is accepted only for the flat profile (the touching limit
    used by the direct limit-flux solve); positive eps must lie in the
    supported range [1e-5, 0.1] * patch_radius.
    """

    profile: object
    epsilon: float
    outer_radius: float | None = None
    dirichlet: TrigPoly = field(default_factory=TrigPoly)
    split_fraction: float = 0.5
    cap_radius: float | None = None

    def __post_init__(self):
        R = self.profile.patch_radius
        if self.outer_radius is None:
            object.__setattr__(self, "outer_radius", 4.0 * R)
        if self.cap_radius is None:
            object.__setattr__(self, "cap_radius", 0.4 * R)
        if not 0.0 <= self.split_fraction <= 1.0:
            raise ValueError("split_fraction must lie in [0, 1]")
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be nonnegative")
        if self.epsilon == 0.0:
            if not isinstance(self.profile, FlatProfile):
                raise ValueError("epsilon = 0 is only meaningful for the flat profile")
        elif not (
            EPS_RANGE[0] * R * (1.0 - 1e-12)
            <= self.epsilon
            <= EPS_RANGE[1] * R * (1.0 + 1e-12)
        ):
            raise ValueError(
                f"epsilon {self.epsilon} outside the supported range "
                f"[{EPS_RANGE[0] * R}, {EPS_RANGE[1] * R}]"
            )
        if self.outer_radius <= 2.0 * R:
            raise ValueError("outer_radius too small for the inclusion pair")

    def with_epsilon(self, eps: float) -> "DomainSpec":
        return replace(self, epsilon=eps)

    # -- gap split -----------------------------------------------------

    def h1(self, xp: float) -> float:
        return self.split_fraction * self.profile.gap_growth(xp)

    def h2(self, xp: float) -> float:
        return -(1.0 - self.split_fraction) * self.profile.gap_growth(xp)

    def upper_graph(self, xp: float) -> float:
        """Lower boundary of inclusion 1 above x' = xp."""
        return 0.5 * self.epsilon + self.h1(xp)

    def lower_graph(self, xp: float) -> float:
        """Upper boundary of inclusion 2 above x' = xp."""
        return -0.5 * self.epsilon + self.h2(xp)

    def graph_gap(self, xp: float) -> float:
        return self.upper_graph(xp) - self.lower_graph(xp)


def gap(profile, epsilon: float, xp: float) -> float:
    """Vertical gap delta(xp) = eps + h1 - h2; defined on the patch only."""
    if abs(xp) > profile.patch_radius * (1.0 + 1e-12):
        raise GeometryError(
            f"|xp| = {abs(xp)} outside the patch radius {profile.patch_radius}"
        )
    return epsilon + profile.gap_growth(xp)


def dist_to_flat(profile: FlatProfile, xp: float) -> float:
    """Distance from xp to the flat segment (-w, w); zero inside."""
    return max(abs(xp) - profile.sigma_half_width, 0.0)


# ---------------------------------------------------------------------------
# Closure arcs


@dataclass(frozen=True)
class _Arc:
    center: tuple
    radius: float
    ang0: float
    ang1: float  # traversed ang0 -> ang1 (increasing in the build frame)

    def point(self, ang: float) -> tuple:
        return (
            self.center[0] + self.radius * math.cos(ang),
            self.center[1] + self.radius * math.sin(ang),
        )


def _upper_style_arcs(graph_y_at_R: float, slope_at_R: float, R: float, r_cap: float):
    """Three tangent arcs closing an upward inclusion over its graph.

    The graph ends at (+-R, graph_y_at_R) with slope +-slope_at_R; the
    right transition arc turns the tangent from the graph direction to
    vertical, and the top arc joins the two transition ends with a
    vertical tangent at both because its center sits on the symmetry
    axis at the transition-end height.
    """
    s = slope_at_R
    norm = math.hypot(1.0, s)
    # inward normal of the graph (toward the inclusion, i.e. upward)
    nx, ny = -s / norm, 1.0 / norm
    jx, jy = R, graph_y_at_R
    ox, oy = jx + r_cap * nx, jy + r_cap * ny
    ang_start = math.atan2(jy - oy, jx - ox)  # in (-pi/2, 0]
    right = _Arc((ox, oy), r_cap, ang_start, 0.0)
    px, py = ox + r_cap, oy
    if px <= 0.0:
        raise GeometryError("cap_radius too large: transition arcs overlap")
    top = _Arc((0.0, py), px, 0.0, math.pi)
    left = _Arc((-ox, oy), r_cap, math.pi, math.pi - ang_start)
    return [right, top, left]


def _inclusion_arcs(spec: DomainSpec, which: int):
    """Closure arcs for inclusion 1 (upper) or 2 (lower) in the build frame.

    Inclusion 2 is built in the reflected frame where it looks like an
    upper inclusion; the second return value flags that reflection.
    """
    R = spec.profile.patch_radius
    if which == 1:
        y_R = spec.upper_graph(R)
        slope = spec.split_fraction * spec.profile.gap_growth_slope(R)
        return _upper_style_arcs(y_R, slope, R, spec.cap_radius), False
    if which == 2:
        y_R = -spec.lower_graph(R)
        slope = (1.0 - spec.split_fraction) * spec.profile.gap_growth_slope(R)
        return _upper_style_arcs(y_R, slope, R, spec.cap_radius), True
    raise ValueError("which must be 1 or 2")


# ---------------------------------------------------------------------------
# Sampling


def _march_graph_positions(spec: DomainSpec, spacing_fn) -> np.ndarray:
    """x-samples of the graph region from -R to R, symmetric, with x = 0.

    spacing_fn(x) gives the local target spacing; the final step is
    merged when shorter than 40% of the local target so no sliver
    segment is produced at the patch edge.
    """
    R = spec.profile.patch_radius
    xs = [0.0]
    while xs[-1] < R:
        dx = spacing_fn(xs[-1])
        if dx <= 0.0:
            raise GeometryError("nonpositive spacing in graph sampling")
        nxt = xs[-1] + dx
        if nxt >= R - 0.4 * dx:
            xs.append(R)
            break
        xs.append(nxt)
    xs = np.array(xs)
    return np.concatenate([-xs[:0:-1], xs])


def _sample_arc(arc: _Arc, start_len: float, max_len: float, growth: float = 1.3):
    """Interior angles of an arc-length march with geometric growth.

    Chord lengths grow from start_len toward max_len, symmetrized so both
    ends of the arc meet their neighbors at comparable spacing.
    """
    total = (arc.ang1 - arc.ang0) * arc.radius
    if total <= 0.0:
        return []
    step = max(min(start_len, max_len), 1e-14)
    lens = [0.0]
    while lens[-1] < total:
        lens.append(lens[-1] + step)
        step = min(step * growth, max_len)
    lens = np.array(lens)
    lens *= total / lens[-1]
    lens = 0.5 * (lens + (total - lens[::-1]))
    angs = arc.ang0 + lens / arc.radius
    return list(angs[1:-1])


def _graph_y(spec: DomainSpec, which: int, xs) -> np.ndarray:
    fn = spec.upper_graph if which == 1 else spec.lower_graph
    return np.array([fn(x) for x in np.atleast_1d(xs)])


def _inclusion_polyline(spec: DomainSpec, which: int, spacing_fn, cap_max_len: float):
    """Closed polyline (first point not repeated), oriented clockwise."""
    xs = _march_graph_positions(spec, spacing_fn)
    arcs, mirrored = _inclusion_arcs(spec, which)
    sign = -1.0 if mirrored else 1.0
    ys = sign * _graph_y(spec, which, xs)  # build frame: inclusion above

    pts = list(zip(xs.tolist(), ys.tolist()))
    junction_len = spacing_fn(spec.profile.patch_radius)
    for arc in arcs:
        start = arc.point(arc.ang0)
        if math.hypot(pts[-1][0] - start[0], pts[-1][1] - start[1]) > 1e-12:
            pts.append(start)
        for ang in _sample_arc(arc, junction_len, cap_max_len):
            pts.append(arc.point(ang))
        pts.append(arc.point(arc.ang1))
    # The last arc ends at the left end of the graph; drop the duplicate.
    if math.hypot(pts[-1][0] - pts[0][0], pts[-1][1] - pts[0][1]) < 1e-10:
        pts.pop()
    poly = np.array(pts)
    if mirrored:
        poly = poly * np.array([1.0, -1.0])  # reflection flips CCW to CW
    else:
        poly = poly[::-1].copy()  # reversal flips CCW to CW
    return poly


def _outer_polyline(spec: DomainSpec, chord: float) -> np.ndarray:
    L = spec.outer_radius
    n = max(16, int(math.ceil(2.0 * math.pi * L / chord)))
    if n % 2:
        n += 1  # even count keeps the circle symmetric under y -> -y
    th = 2.0 * math.pi * np.arange(n) / n
    return np.column_stack([L * np.cos(th), L * np.sin(th)])


def polygon_area(poly: np.ndarray) -> float:
    """Signed shoelace area (positive for counterclockwise loops)."""
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _validate_curves(spec: DomainSpec, inc1, inc2, outer):
    L = spec.outer_radius
    for poly, name in ((inc1, "inclusion 1"), (inc2, "inclusion 2")):
        r_max = float(np.max(np.hypot(poly[:, 0], poly[:, 1])))
        if L - r_max <= L / 4.0:
            raise GeometryError(
                f"{name} comes within L/4 of the outer boundary (max radius {r_max:.3f})"
            )
        if polygon_area(poly) >= 0.0:
            raise GeometryError(f"{name} polyline is not clockwise")
    if polygon_area(outer) <= 0.0:
        raise GeometryError("outer polyline is not counterclockwise")
    # The graphs are separated by delta > 0, so only the closure arcs
    # could conceivably touch; compare the point sets directly.
    from scipy.spatial import cKDTree

    d = float(cKDTree(inc1).query(inc2, k=1)[0].min())
    if d <= 0.0:
        raise GeometryError("inclusion polylines intersect")


def boundary_curves(spec: DomainSpec, arc_tol: float):
    """Polylines (inclusion-1, inclusion-2, outer) at chord tolerance arc_tol.

    Inclusions are closed clockwise polylines, the outer circle is
    counterclockwise; vertex spacing near the neck is bounded by
    min(arc_tol, delta(x)/4).
    """
    if arc_tol <= 0.0:
        raise ValueError("arc_tol must be positive")
    prof = spec.profile
    R = prof.patch_radius

    def spacing(x):
        delta = spec.epsilon + prof.gap_growth(x)
        s = min(arc_tol, max(delta, 1e-300) / 4.0, R / 8.0)
        kappa = _graph_curvature_bound(spec, x)
        if kappa > 0.0:
            s = min(s, math.sqrt(8.0 * arc_tol / kappa))
        return max(s, 1e-9 * R)

    cap_max = math.sqrt(8.0 * arc_tol * spec.cap_radius)
    inc1 = _inclusion_polyline(spec, 1, spacing, cap_max)
    inc2 = _inclusion_polyline(spec, 2, spacing, cap_max)
    outer = _outer_polyline(spec, math.sqrt(8.0 * arc_tol * spec.outer_radius))
    _validate_curves(spec, inc1, inc2, outer)
    return inc1, inc2, outer


def _graph_curvature_bound(spec: DomainSpec, x: float) -> float:
    prof = spec.profile
    t = max(spec.split_fraction, 1.0 - spec.split_fraction)
    if isinstance(prof, FlatProfile):
        if abs(x) <= prof.sigma_half_width:
            return 0.0
        return 2.0 * prof.curvature_coeff * t
    g = prof.gamma
    xa = max(abs(x), 1e-12 * prof.patch_radius)
    return t * prof.amp_at(x) * (1.0 + g) * g * xa ** (g - 1.0)


# ---------------------------------------------------------------------------
# Boundary projection (used by uniform refinement)


def project_to_inclusion(spec: DomainSpec, which: int, xy) -> tuple:
    """Project a point near inclusion `which` onto its exact curve."""
    x, y = float(xy[0]), float(xy[1])
    R = spec.profile.patch_radius
    candidates = []
    if abs(x) <= R:
        gy = spec.upper_graph(x) if which == 1 else spec.lower_graph(x)
        candidates.append(((x, gy), abs(y - gy)))
    arcs, mirrored = _inclusion_arcs(spec, which)
    qx, qy = (x, -y) if mirrored else (x, y)
    for arc in arcs:
        ang = math.atan2(qy - arc.center[1], qx - arc.center[0])
        if ang < arc.ang0 - math.pi:
            ang += 2.0 * math.pi
        ang = min(max(ang, arc.ang0), arc.ang1)
        px, py = arc.point(ang)
        if mirrored:
            py = -py
        candidates.append(((px, py), math.hypot(px - x, py - y)))
    return min(candidates, key=lambda c: c[1])[0]


def project_to_outer(spec: DomainSpec, xy) -> tuple:
    x, y = float(xy[0]), float(xy[1])
    r = math.hypot(x, y)
    if r == 0.0:
        return (spec.outer_radius, 0.0)
    s = spec.outer_radius / r
    return (x * s, y * s)


# ---------------------------------------------------------------------------
# JSON document round trip


def spec_to_json(spec: DomainSpec) -> str:
    prof = spec.profile
    if isinstance(prof, FlatProfile):
        pdoc = {
            "kind": "flat",
            "params": {
                "sigma_half_width": prof.sigma_half_width,
                "curvature_coeff": prof.curvature_coeff,
                "patch_radius": prof.patch_radius,
            },
        }
    elif isinstance(prof, PowerProfile):
        if callable(prof.amp):
            raise ValueError("direction-dependent amp is not JSON-serializable")
        pdoc = {
            "kind": "power",
            "params": {
                "gamma": prof.gamma,
                "amp": float(prof.amp),
                "patch_radius": prof.patch_radius,
                "c0": prof.c0,
            },
        }
    else:
        raise TypeError(f"unsupported profile {type(prof)!r}")
    doc = {
        "profile": pdoc,
        "epsilon": spec.epsilon,
        "outer": {"radius": spec.outer_radius},
        "dirichlet": {
            "coeffs": {
                "a0": spec.dirichlet.a0,
                "cos": list(spec.dirichlet.cos_coeffs),
                "sin": list(spec.dirichlet.sin_coeffs),
            }
        },
        "split_fraction": spec.split_fraction,
        "cap_radius": spec.cap_radius,
    }
    return json.dumps(doc, indent=2)


def spec_from_json(text: str) -> DomainSpec:
    doc = json.loads(text)
    pdoc = doc["profile"]
    params = pdoc["params"]
    if pdoc["kind"] == "flat":
        profile = FlatProfile(
            sigma_half_width=params["sigma_half_width"],
            curvature_coeff=params["curvature_coeff"],
            patch_radius=params["patch_radius"],
        )
    elif pdoc["kind"] == "power":
        profile = PowerProfile(
            gamma=params["gamma"],
            amp=params["amp"],
            patch_radius=params["patch_radius"],
            c0=params.get("c0"),
        )
    else:
        raise ValueError(f"unknown profile kind {pdoc['kind']!r}")
    coeffs = doc["dirichlet"]["coeffs"]
    return DomainSpec(
        profile=profile,
        epsilon=doc["epsilon"],
        outer_radius=doc["outer"]["radius"],
        dirichlet=TrigPoly(
            a0=coeffs.get("a0", 0.0),
            cos_coeffs=tuple(coeffs.get("cos", ())),
            sin_coeffs=tuple(coeffs.get("sin", ())),
        ),
        split_fraction=doc.get("split_fraction", 0.5),
        cap_radius=doc.get("cap_radius"),
    )


def default_flat_spec(epsilon: float, **kwargs) -> DomainSpec:
    """Reference flat geometry: w = 0.5, q = 1, patch radius 1."""
    profile = FlatProfile(sigma_half_width=0.5, curvature_coeff=1.0, patch_radius=1.0)
    return DomainSpec(profile=profile, epsilon=epsilon, **kwargs)


def default_cusp_spec(epsilon: float, gamma: float = 0.5, amp: float = 1.0, **kwargs) -> DomainSpec:
    """Reference cusp geometry: constant amplitude, patch radius 1."""
    profile = PowerProfile(gamma=gamma, amp=amp, patch_radius=1.0)
    return DomainSpec(profile=profile, epsilon=epsilon, **kwargs)
