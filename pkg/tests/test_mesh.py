"""Mesh generation, conformity, refinement, and text round trip."""

import numpy as np
import pytest

from pneck.geometry import default_cusp_spec, default_flat_spec, polygon_area
from pneck.mesh import (
    FREE,
    INCLUSION1,
    INCLUSION2,
    OUTER,
    MeshError,
    generate,
    generate_merged,
    load_text,
    min_angle_deg,
    refine_uniform,
    save_text,
    triangle_areas,
)


@pytest.fixture(scope="module")
def flat_mesh():
    return generate(default_flat_spec(0.01), h_far=0.25, neck_fraction=0.25)


@pytest.fixture(scope="module")
def cusp_mesh():
    return generate(default_cusp_spec(0.01), h_far=0.25, neck_fraction=0.25)


@pytest.fixture(scope="module")
def merged_mesh():
    return generate_merged(default_flat_spec(0.0), h_far=0.25, neck_fraction=0.25)


def _check_valid(mesh):
    areas = triangle_areas(mesh.vertices, mesh.triangles)
    assert (areas > 0.0).all()
    assert min_angle_deg(mesh) >= 20.0
    # conforming: every edge occurs in at most two triangles, boundary
    # edges in exactly one
    e = np.vstack(
        [mesh.triangles[:, [0, 1]], mesh.triangles[:, [1, 2]], mesh.triangles[:, [2, 0]]]
    )
    es = np.sort(e, axis=1)
    uniq, counts = np.unique(es, axis=0, return_counts=True)
    assert counts.max() <= 2
    once = {tuple(x) for x in uniq[counts == 1]}
    for a, b in mesh.boundary_edges:
        assert (min(a, b), max(a, b)) in once


def test_mesh_valid(flat_mesh, cusp_mesh, merged_mesh):
    for mesh in (flat_mesh, cusp_mesh, merged_mesh):
        _check_valid(mesh)


def test_area_identity(flat_mesh, cusp_mesh, merged_mesh):
    # triangles tile the polygon: outer loop area minus inclusion areas
    for mesh in (flat_mesh, cusp_mesh, merged_mesh):
        total = triangle_areas(mesh.vertices, mesh.triangles).sum()
        target = sum(polygon_area(mesh.vertices[loop]) for loop in mesh.loops)
        assert abs(total - target) <= 1e-10 * abs(target)


def test_vertex_classes_partition(flat_mesh):
    cls = flat_mesh.vertex_class
    assert set(np.unique(cls)) == {FREE, INCLUSION1, INCLUSION2, OUTER}
    # tagged loops carry the right classes
    for loop, tag in ((0, INCLUSION1), (1, INCLUSION2), (2, OUTER)):
        assert (cls[flat_mesh.loops[loop]] == tag).all()


def test_boundary_loops_closed(flat_mesh):
    # boundary edges grouped by tag form closed cycles
    for tag in (INCLUSION1, INCLUSION2, OUTER):
        sel = flat_mesh.boundary_tags == tag
        edges = flat_mesh.boundary_edges[sel]
        degree = {}
        for a, b in edges:
            degree[a] = degree.get(a, 0) + 1
            degree[b] = degree.get(b, 0) + 1
        assert all(d == 2 for d in degree.values())


def test_gap_resolution(flat_mesh):
    # at least 4 vertices across the gap at x' = 0 (neck_fraction = 0.25)
    v = flat_mesh.vertices
    sel = (np.abs(v[:, 0]) < 1e-12) & (np.abs(v[:, 1]) <= 0.005 + 1e-12)
    assert sel.sum() >= 4


def test_determinism():
    spec = default_flat_spec(0.003)
    m1 = generate(spec, h_far=0.3, neck_fraction=0.25)
    m2 = generate(spec, h_far=0.3, neck_fraction=0.25)
    assert np.array_equal(m1.vertices, m2.vertices)
    assert np.array_equal(m1.triangles, m2.triangles)
    assert np.array_equal(m1.vertex_class, m2.vertex_class)


def test_h_far_halving_growth():
    spec = default_cusp_spec(0.01)
    coarse = generate(spec, h_far=0.4, neck_fraction=0.25)
    fine = generate(spec, h_far=0.2, neck_fraction=0.25)

    def far_count(mesh):
        # strictly outside the inclusion pair and its graded collar
        cent = mesh.vertices[mesh.triangles].mean(axis=1)
        return (np.hypot(cent[:, 0], cent[:, 1]) > 2.4).sum()

    ratio = far_count(fine) / far_count(coarse)
    assert 3.0 <= ratio <= 6.0, ratio


def test_disk_without_inclusions():
    from pneck.mesh import generate_disk

    mesh = generate_disk(2.0, 0.2)
    _check_valid(mesh)
    assert (mesh.vertex_class != INCLUSION1).all()
    total = triangle_areas(mesh.vertices, mesh.triangles).sum()
    target = polygon_area(mesh.vertices[mesh.loops[0]])
    assert abs(total - target) <= 1e-10 * target


def test_generate_parameter_gates():
    spec = default_flat_spec(0.01)
    with pytest.raises(ValueError):
        generate(spec, h_far=-1.0)
    with pytest.raises(ValueError):
        generate(spec, h_far=0.25, neck_fraction=0.7)
    with pytest.raises(ValueError):
        generate(default_flat_spec(0.0), h_far=0.25)
    with pytest.raises(MeshError):
        generate_merged(default_cusp_spec(0.01), h_far=0.25)


def test_merged_tags(merged_mesh):
    # the split is by sign of y; points exactly on the symmetry line (tip
    # midpoints for the symmetric gap split) may land on either side
    cls = merged_mesh.vertex_class
    v = merged_mesh.vertices
    assert (v[cls == INCLUSION1, 1] > 0.0).all()
    assert (v[cls == INCLUSION2, 1] <= 0.0).all()
    assert (cls == INCLUSION1).sum() > 100 and (cls == INCLUSION2).sum() > 100


def test_refine_uniform_counts(cusp_mesh):
    refined = refine_uniform(cusp_mesh)
    e = np.vstack(
        [cusp_mesh.triangles[:, [0, 1]], cusp_mesh.triangles[:, [1, 2]], cusp_mesh.triangles[:, [2, 0]]]
    )
    n_edges = len(np.unique(np.sort(e, axis=1), axis=0))
    assert refined.n_vertices == cusp_mesh.n_vertices + n_edges
    assert refined.n_triangles == 4 * cusp_mesh.n_triangles


def test_refine_uniform_quality_and_area(cusp_mesh):
    refined = refine_uniform(cusp_mesh)
    # projection may cost at most one degree of minimum angle
    assert min_angle_deg(refined) >= min_angle_deg(cusp_mesh) - 1.0
    # tiling stays exact against the refined polygon
    total = triangle_areas(refined.vertices, refined.triangles).sum()
    target = sum(polygon_area(refined.vertices[loop]) for loop in refined.loops)
    assert abs(total - target) <= 1e-10 * abs(target)
    # and the polygon area approaches the exact region area from below
    parent = sum(polygon_area(cusp_mesh.vertices[loop]) for loop in cusp_mesh.loops)
    assert abs(total - parent) < 5e-3 * parent


def test_refine_projects_to_curves(cusp_mesh):
    refined = refine_uniform(cusp_mesh)
    spec = cusp_mesh.spec
    v = refined.vertices
    new = np.arange(cusp_mesh.n_vertices, refined.n_vertices)
    sel = new[
        (refined.vertex_class[new] == INCLUSION1)
        & (np.abs(v[new, 0]) < 0.9)
        & (v[new, 1] < 0.5)
    ]
    assert len(sel) > 0
    for i in sel:
        assert abs(v[i, 1] - spec.upper_graph(v[i, 0])) < 1e-12
    outer_new = new[refined.vertex_class[new] == OUTER]
    radii = np.hypot(v[outer_new, 0], v[outer_new, 1])
    assert np.abs(radii - spec.outer_radius).max() < 1e-12


def test_text_round_trip(tmp_path, cusp_mesh):
    path = tmp_path / "mesh.txt"
    u = np.linspace(0.0, 1.0, cusp_mesh.n_vertices)
    save_text(cusp_mesh, path, u=u)
    back, u_back = load_text(path)
    assert np.array_equal(back.vertices, cusp_mesh.vertices)
    assert np.array_equal(back.triangles, cusp_mesh.triangles)
    assert np.array_equal(back.vertex_class, cusp_mesh.vertex_class)
    assert np.array_equal(u_back, u)
    # second round trip is bit-identical
    path2 = tmp_path / "mesh2.txt"
    save_text(back, path2, u=u_back)
    assert path.read_text().splitlines()[1:] == path2.read_text().splitlines()[1:]


def test_text_format_header(tmp_path, flat_mesh):
    path = tmp_path / "m.txt"
    save_text(flat_mesh, path)
    first = path.read_text().splitlines()[0].split()
    assert first == [str(flat_mesh.n_vertices), str(flat_mesh.n_triangles)]
