import numpy as np
import pytest

from longwave.fem import FieldState, FunctionSpace, interpolate
from longwave.mesh import build_rectangle_mesh, make_triangulation
from longwave.snapshots import lattice_subtriangles, read_vtk_snapshot, write_vtk_snapshot

GOLDEN = """\
# vtk DataFile Version 3.0
longwave snapshot t=0.5 r1=1 r2=1
ASCII
DATASET UNSTRUCTURED_GRID
POINTS 4 double
0 0 0
0 1 0
1 0 0
1 1 0
CELLS 2 8
3 0 2 3
3 0 3 1
CELL_TYPES 2
5
5
POINT_DATA 4
SCALARS eta double 1
LOOKUP_TABLE default
0
2
1
3
VECTORS u double
0 -0 0
1 -2 0
0.5 -1 0
1.5 -3 0
"""


def two_triangle_state():
    mesh = build_rectangle_mesh((0.0, 1.0, 0.0, 1.0), 1, 1)
    Veta = FunctionSpace(mesh, 1)
    Vu = FunctionSpace(mesh, 1, components=2)
    eta = interpolate(Veta, lambda x, y: x + 2 * y)
    u = interpolate(Vu, lambda x, y: np.stack([0.5 * x + y, -(x + 2 * y)], axis=-1))
    return FieldState(Veta, Vu, eta, u, 0.5)


def test_golden_two_triangle_file(tmp_path):
    state = two_triangle_state()
    path = tmp_path / "snap.vtk"
    write_vtk_snapshot(path, state)
    assert path.read_text() == GOLDEN


def test_roundtrip_same_degrees(tmp_path):
    state = two_triangle_state()
    path = tmp_path / "snap.vtk"
    write_vtk_snapshot(path, state)
    back = read_vtk_snapshot(path, state.eta_space, state.u_space)
    assert np.allclose(back.eta, state.eta, atol=1e-15)
    assert np.allclose(back.u, state.u, atol=1e-15)
    assert back.time == 0.5


@pytest.mark.parametrize("r1,r2", [(1, 2), (2, 3), (1, 1), (2, 2)])
def test_roundtrip_mixed_degrees(tmp_path, r1, r2):
    mesh = build_rectangle_mesh((0.0, 2.0, 0.0, 1.0), 4, 2)
    Veta = FunctionSpace(mesh, r1)
    Vu = FunctionSpace(mesh, r2, components=2)
    rng = np.random.default_rng(9)
    state = FieldState(Veta, Vu, rng.standard_normal(Veta.dim), rng.standard_normal(Vu.dim), 1.25)
    path = tmp_path / "snap.vtk"
    write_vtk_snapshot(path, state)
    back = read_vtk_snapshot(path, Veta, Vu)
    assert np.allclose(back.eta, state.eta, atol=1e-12)
    assert np.allclose(back.u, state.u, atol=1e-12)


def test_subtriangle_counts():
    for r in (1, 2, 3):
        tris = lattice_subtriangles(r)
        assert len(tris) == r * r


def test_reader_rejects_wrong_space(tmp_path):
    from longwave.errors import ConfigError

    state = two_triangle_state()
    path = tmp_path / "snap.vtk"
    write_vtk_snapshot(path, state)
    other = FunctionSpace(build_rectangle_mesh((0.0, 1.0, 0.0, 1.0), 2, 2), 1, components=2)
    with pytest.raises(ConfigError):
        read_vtk_snapshot(path, state.eta_space, other)
