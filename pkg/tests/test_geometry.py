"""Gap profiles, curve construction, and spec serialization."""

import math

import numpy as np
import pytest

from pneck.geometry import (
    FlatProfile,
    GeometryError,
    PowerProfile,
    TrigPoly,
    boundary_curves,
    default_cusp_spec,
    default_flat_spec,
    dist_to_flat,
    gap,
    polygon_area,
    spec_from_json,
    spec_to_json,
)

FLAT = FlatProfile(sigma_half_width=0.5, curvature_coeff=1.0, patch_radius=1.0)


def test_gap_flat_examples():
    assert gap(FLAT, 0.01, 0.3) == pytest.approx(0.01, abs=0.0)
    assert gap(FLAT, 0.01, 0.7) == pytest.approx(0.01 + 0.2**2, rel=1e-14)
    prof = PowerProfile(gamma=0.5, amp=1.0, patch_radius=1.0)
    assert gap(prof, 0.001, 0.04) == pytest.approx(0.001 + 0.04**1.5, rel=1e-14)


def test_gap_patch_gate():
    with pytest.raises(GeometryError):
        gap(FLAT, 0.01, 1.2)


def test_gap_properties():
    rng = np.random.default_rng(5)
    prof = PowerProfile(gamma=0.3, amp=2.0, patch_radius=1.0)
    for _ in range(100):
        xp = rng.uniform(-1.0, 1.0)
        eps = rng.uniform(1e-5, 0.1)
        assert gap(FLAT, eps, xp) >= eps
        assert gap(prof, eps, xp) >= eps
    assert gap(prof, 0.02, 0.0) == 0.02
    for xp in np.linspace(-0.5, 0.5, 7):
        assert gap(FLAT, 0.02, xp) == 0.02
    # gap - eps is exactly q * d^2 on the patch
    for xp in np.linspace(-1.0, 1.0, 17):
        d = dist_to_flat(FLAT, xp)
        assert gap(FLAT, 0.01, xp) - 0.01 == pytest.approx(1.0 * d * d, abs=1e-16)


def test_dist_to_flat():
    assert dist_to_flat(FLAT, 0.2) == 0.0
    assert dist_to_flat(FLAT, 0.5) == 0.0
    assert dist_to_flat(FLAT, -1.3) == pytest.approx(0.8, rel=1e-15)


def test_profile_validation():
    with pytest.raises(ValueError):
        FlatProfile(sigma_half_width=0.0, curvature_coeff=1.0, patch_radius=1.0)
    with pytest.raises(ValueError):
        FlatProfile(sigma_half_width=0.5, curvature_coeff=1.0, patch_radius=0.4)
    with pytest.raises(ValueError):
        PowerProfile(gamma=1.5, amp=1.0, patch_radius=1.0)
    with pytest.raises(ValueError):
        PowerProfile(gamma=0.5, amp=-1.0, patch_radius=1.0)
    with pytest.raises(ValueError):
        PowerProfile(gamma=0.5, amp=lambda t: 1.0, patch_radius=1.0)  # needs c0
    prof = PowerProfile(gamma=0.5, amp=2.0, patch_radius=1.0)
    assert prof.c0 == pytest.approx(2.0)


def test_spec_epsilon_range():
    with pytest.raises(ValueError):
        default_flat_spec(0.5)  # above 0.1 * patch_radius
    with pytest.raises(ValueError):
        default_flat_spec(1e-7)
    default_flat_spec(0.0)  # touching limit allowed for flat
    with pytest.raises(ValueError):
        default_cusp_spec(0.0)


def test_boundary_curves_structure():
    spec = default_flat_spec(0.1)
    inc1, inc2, outer = boundary_curves(spec, arc_tol=0.01)
    # closed, simple, correctly oriented
    assert polygon_area(inc1) < 0.0
    assert polygon_area(inc2) < 0.0
    assert polygon_area(outer) > 0.0
    # minimal vertical distance across the flat segment equals eps
    for poly, sign in ((inc1, 1.0), (inc2, -1.0)):
        on_flat = poly[np.abs(poly[:, 0]) <= 0.5]
        assert np.min(sign * on_flat[:, 1]) == pytest.approx(0.05, abs=1e-12)


def test_boundary_curves_cusp_lowest_point():
    spec = default_cusp_spec(0.01)
    inc1, inc2, outer = boundary_curves(spec, arc_tol=0.01)
    tip = inc1[np.argmin(inc1[:, 1])]
    assert tip[0] == pytest.approx(0.0, abs=1e-12)
    assert tip[1] == pytest.approx(0.005, abs=1e-14)


def test_boundary_curves_origin_region():
    spec = default_flat_spec(0.1)
    inc1, inc2, outer = boundary_curves(spec, arc_tol=0.01)
    from pneck.mesh import _points_in_polygon

    probe = np.array([[0.0, 0.0]])  # center of the gap
    assert not _points_in_polygon(probe, inc1)[0]
    assert not _points_in_polygon(probe, inc2)[0]
    assert _points_in_polygon(np.array([[0.0, 1.0]]), inc1)[0]
    assert _points_in_polygon(np.array([[0.0, -1.0]]), inc2)[0]


def test_boundary_spacing_near_neck():
    spec = default_flat_spec(0.01)
    arc_tol = 0.05
    inc1, _, _ = boundary_curves(spec, arc_tol)
    on_flat = inc1[np.abs(inc1[:, 0]) <= 0.4]
    order = np.argsort(on_flat[:, 0])
    dx = np.diff(on_flat[order, 0])
    assert (dx <= min(arc_tol, 0.01 / 4.0) + 1e-12).all()


def test_boundary_curves_symmetry():
    spec = default_flat_spec(0.01)  # symmetric split by default
    inc1, inc2, _ = boundary_curves(spec, arc_tol=0.01)
    mirrored = inc1 * np.array([1.0, -1.0])
    # inclusion 2 is the mirror image of inclusion 1 vertex by vertex
    assert len(inc1) == len(inc2)
    d = np.abs(np.sort(mirrored[:, 1]) - np.sort(inc2[:, 1])).max()
    assert d < 1e-12


def test_boundary_curves_resolution_convergence():
    spec = default_cusp_spec(0.01)

    def hausdorff_to_exact(poly):
        # chord-midpoint deviation from the exact graph where applicable
        worst = 0.0
        for a, b in zip(poly, np.roll(poly, -1, axis=0)):
            mx = 0.5 * (a[0] + b[0])
            if abs(mx) >= 1.0 or abs(a[0]) >= 1.0 or abs(b[0]) >= 1.0:
                continue
            # restrict to chords of the graph portion (caps sit much higher)
            if abs(a[1] - spec.upper_graph(a[0])) > 1e-9 or abs(b[1] - spec.upper_graph(b[0])) > 1e-9:
                continue
            my = 0.5 * (a[1] + b[1])
            exact = spec.upper_graph(mx)
            worst = max(worst, abs(my - exact))
        return worst

    d1 = hausdorff_to_exact(boundary_curves(spec, arc_tol=0.02)[0])
    d2 = hausdorff_to_exact(boundary_curves(spec, arc_tol=0.01)[0])
    assert d2 <= 0.5 * d1 + 1e-9


def test_split_fraction_moves_gap():
    spec0 = default_flat_spec(0.01, split_fraction=0.0)
    spec1 = default_flat_spec(0.01, split_fraction=1.0)
    x = 0.8
    # the gap itself is split-invariant
    assert spec0.graph_gap(x) == pytest.approx(spec1.graph_gap(x), rel=1e-14)
    assert spec0.h1(x) == 0.0
    assert spec1.h2(x) == 0.0


def test_trigpoly():
    phi = TrigPoly(a0=0.5, cos_coeffs=(1.0,), sin_coeffs=(0.0, 2.0))
    th = 0.7
    want = 0.5 + math.cos(th) + 2.0 * math.sin(2 * th)
    assert phi(th) == pytest.approx(want, rel=1e-14)
    with pytest.raises(ValueError):
        TrigPoly(sin_coeffs=(1.0,) * 5)


def test_spec_json_round_trip():
    for spec in (
        default_flat_spec(0.01, split_fraction=0.3),
        default_cusp_spec(0.02, gamma=0.4, amp=2.0),
    ):
        doc = spec_to_json(spec)
        back = spec_from_json(doc)
        assert spec_to_json(back) == doc
        assert back.epsilon == spec.epsilon
        assert back.profile.patch_radius == spec.profile.patch_radius
        assert back.dirichlet.sin_coeffs == spec.dirichlet.sin_coeffs


def test_json_keys_documented_schema():
    import json

    doc = json.loads(spec_to_json(default_flat_spec(0.01)))
    assert doc["profile"]["kind"] == "flat"
    assert set(doc["profile"]["params"]) == {
        "sigma_half_width",
        "curvature_coeff",
        "patch_radius",
    }
    assert "radius" in doc["outer"]
    assert "coeffs" in doc["dirichlet"]
