import numpy as np
import pytest

from longwave.errors import InvalidArgumentError, MeshFormatError, MeshTopologyError
from longwave.mesh import (
    build_rectangle_mesh,
    build_rectangle_mesh_with_hole,
    import_mesh,
    make_triangulation,
    mesh_metrics,
    perturb_interior,
    write_mesh,
)

UNIT = (0.0, 1.0, 0.0, 1.0)


def test_counts_2x2():
    m = build_rectangle_mesh(UNIT, 2, 2)
    assert m.n_triangles == 8
    assert m.n_vertices == 9


def test_total_area_exact():
    m = build_rectangle_mesh(UNIT, 4, 4)
    assert mesh_metrics(m).total_area == pytest.approx(1.0, abs=1e-15)


def test_zero_subdivision_rejected():
    with pytest.raises(InvalidArgumentError):
        build_rectangle_mesh(UNIT, 0, 2)


def test_degenerate_bounds_rejected():
    with pytest.raises(InvalidArgumentError):
        build_rectangle_mesh((0.0, 0.0, 0.0, 1.0), 2, 2)


def test_unit_right_triangle_metrics():
    m = make_triangulation([[0, 0], [1, 0], [0, 1]], [[0, 1, 2]])
    mm = mesh_metrics(m)
    assert mm.h_min == mm.h_max == pytest.approx(np.sqrt(2.0))
    assert mm.total_area == pytest.approx(0.5)


def test_h_max_halves_under_refinement():
    hs = [mesh_metrics(build_rectangle_mesh(UNIT, n, n)).h_max for n in (2, 4, 8)]
    assert hs[0] / hs[1] == pytest.approx(2.0, abs=1e-14)
    assert hs[1] / hs[2] == pytest.approx(2.0, abs=1e-14)


def test_boundary_closed_normal_sum():
    # Sum of outward normal * facet length over a closed boundary is zero.
    for mesh in (
        build_rectangle_mesh(UNIT, 3, 5),
        build_rectangle_mesh(UNIT, 4, 4, diagonal="crossed"),
        build_rectangle_mesh_with_hole((0, 4, 0, 2), 16, 8, (2.0, 1.0), 0.4),
    ):
        total = (mesh.facet_normals * mesh.facet_lengths[:, None]).sum(axis=0)
        scale = mesh.facet_lengths.sum()
        assert np.linalg.norm(total) <= 1e-12 * scale


def test_orientation_fixed_on_import():
    m = make_triangulation([[0, 0], [1, 0], [0, 1]], [[0, 2, 1]])
    assert m.triangle_areas()[0] > 0
    p = m.vertices[m.triangles[0]]
    a, b = p[1] - p[0], p[2] - p[0]
    assert a[0] * b[1] - a[1] * b[0] > 0


def test_import_single_triangle(tmp_path):
    path = tmp_path / "tri.txt"
    path.write_text("nodes 3 elements 1 boundary 0\n0 0\n1 0\n0 1\n0 1 2\n")
    m = import_mesh(path)
    assert m.n_boundary_facets == 3
    assert all(t == "wall" for t in m.facet_tags)


def test_import_roundtrip(tmp_path):
    m = build_rectangle_mesh_with_hole((0, 4, 0, 2), 12, 6, (2.0, 1.0), 0.45)
    path = tmp_path / "mesh.txt"
    write_mesh(path, m)
    m2 = import_mesh(path)
    assert np.array_equal(m.triangles, m2.triangles)
    assert np.allclose(m.vertices, m2.vertices)
    assert m.facet_tags == m2.facet_tags


def test_hole_normals_point_into_hole():
    center = np.array([2.0, 1.0])
    m = build_rectangle_mesh_with_hole((0, 4, 0, 2), 16, 8, center, 0.4)
    idx = m.tags["cylinder"]
    assert idx.size >= 6
    mid = 0.5 * (m.vertices[m.facet_vertices[idx, 0]] + m.vertices[m.facet_vertices[idx, 1]])
    to_center = center - mid
    dots = np.einsum("ij,ij->i", m.facet_normals[idx], to_center)
    assert np.all(dots > 0)


def test_dangling_vertex_index_is_topology_error(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("nodes 3 elements 1 boundary 0\n0 0\n1 0\n0 1\n0 1 5\n")
    with pytest.raises(MeshTopologyError):
        import_mesh(path)


def test_malformed_file_reports_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("nodes 2 elements 0 boundary 0\n0 0\n1 oops\n")
    with pytest.raises(MeshFormatError) as err:
        import_mesh(path)
    assert err.value.line == 3


def test_nonconforming_edge_rejected():
    # Three triangles sharing the edge (0, 1).
    verts = [[0, 0], [1, 0], [0, 1], [1, 1], [0.5, -1]]
    tris = [[0, 1, 2], [0, 1, 3], [0, 1, 4]]
    with pytest.raises(MeshTopologyError):
        make_triangulation(verts, tris)


def test_perturb_keeps_validity_and_boundary():
    m = build_rectangle_mesh(UNIT, 8, 8)
    p = perturb_interior(m, amplitude=0.15, seed=0)
    assert np.all(p.triangle_areas() > 0)
    boundary = np.unique(m.facet_vertices)
    assert np.allclose(p.vertices[boundary], m.vertices[boundary])
    assert mesh_metrics(p).total_area == pytest.approx(1.0, rel=1e-12)
    # deterministic
    p2 = perturb_interior(m, amplitude=0.15, seed=0)
    assert np.array_equal(p.vertices, p2.vertices)
