"""Legacy-VTK ASCII field snapshots (unstructured grid, triangle cells).

One file stores both fields at the velocity space's Lagrange nodes: POINTS
are the u-space DOF coordinates, CELLS the degree-r lattice subtriangles,
POINT_DATA carries SCALARS eta (interpolated onto those nodes) and VECTORS u
(z component zero).  Since the supported degree pairs have r1 <= r2, the eta
samples represent the eta-space function exactly and a snapshot round-trips
both coefficient vectors exactly (up to text precision).
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, InvalidArgumentError
from .fem.fields import FieldState
from .fem.spaces import scalar_twin

__all__ = ["write_vtk_snapshot", "read_vtk_snapshot", "lattice_subtriangles"]


def lattice_subtriangles(degree):
    """Local subtriangle connectivity of the degree-r Lagrange lattice.

    Indices refer to the lattice enumerated as (i, j), j = 0..r, i = 0..r-j,
    row-major in j; returns r^2 CCW triples.
    """
    r = degree

    def idx(i, j):
        # offset of row j is sum_{k<j} (r+1-k)
        return j * (r + 1) - j * (j - 1) // 2 + i

    tris = []
    for j in range(r):
        for i in range(r - j):
            tris.append((idx(i, j), idx(i + 1, j), idx(i, j + 1)))
            if i + j <= r - 2:
                tris.append((idx(i, j + 1), idx(i + 1, j), idx(i + 1, j + 1)))
    return tris


def _lattice_order_map(space):
    """Map the writer's (i, j) lattice enumeration to local DOF indices."""
    r = space.degree
    nodes = space.element.nodes  # local order: vertices, edges, interior
    lookup = {}
    for loc, (x, y) in enumerate(nodes):
        lookup[(round(x * r), round(y * r))] = loc
    order = []
    for j in range(r + 1):
        for i in range(r + 1 - j):
            order.append(lookup[(i, j)])
    return np.asarray(order, dtype=np.int64)


def _point_grid(state):
    u_space = state.u_space
    eta_space = state.eta_space
    if eta_space.degree > u_space.degree:
        raise InvalidArgumentError("snapshots require r1 <= r2")
    order = _lattice_order_map(u_space)
    cells = u_space.cell_dofs[:, order]
    local = lattice_subtriangles(u_space.degree)
    tris = np.concatenate([cells[:, t] for t in local], axis=0) if local else cells
    return u_space.dof_coords, tris


def write_vtk_snapshot(path, state):
    """Write eta and u at one time instant as a legacy VTK unstructured grid."""
    points, tris = _point_grid(state)
    u_space = state.u_space
    n = u_space.n_scalar
    ux = state.u[:n]
    uy = state.u[n:]
    eta_space = state.eta_space
    # eta at u-space nodes: exact FE interpolation (same mesh, nested spaces)
    cells_of = u_space.dof_cells
    eta_vals = eta_space.eval_cells(state.eta, cells_of, points)

    def fmt(v):
        return f"{float(v):.17g}"

    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(
            f"longwave snapshot t={fmt(state.time)} r1={eta_space.degree} r2={u_space.degree}\n"
        )
        fh.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {len(points)} double\n")
        for x, y in points:
            fh.write(f"{fmt(x)} {fmt(y)} 0\n")
        fh.write(f"CELLS {len(tris)} {4 * len(tris)}\n")
        for a, b, c in tris:
            fh.write(f"3 {a} {b} {c}\n")
        fh.write(f"CELL_TYPES {len(tris)}\n")
        fh.write("\n".join(["5"] * len(tris)) + "\n")
        fh.write(f"POINT_DATA {len(points)}\n")
        fh.write("SCALARS eta double 1\nLOOKUP_TABLE default\n")
        for v in eta_vals:
            fh.write(fmt(v) + "\n")
        fh.write("VECTORS u double\n")
        for a, b in zip(ux, uy):
            fh.write(f"{fmt(a)} {fmt(b)} 0\n")


def read_vtk_snapshot(path, eta_space, u_space):
    """Rebuild a FieldState from a snapshot written on the same mesh/degrees."""
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if len(lines) < 5 or not lines[0].startswith("# vtk"):
        raise ConfigError(f"{path} is not a legacy VTK file")
    time = 0.0
    for tok in lines[1].split():
        if tok.startswith("t="):
            time = float(tok[2:])

    def find(prefix):
        for k, ln in enumerate(lines):
            if ln.startswith(prefix):
                return k
        raise ConfigError(f"missing {prefix!r} section in {path}")

    k = find("POINTS")
    npts = int(lines[k].split()[1])
    if npts != u_space.n_scalar:
        raise ConfigError(
            f"snapshot has {npts} points but the velocity space has {u_space.n_scalar} nodes"
        )
    pts = np.array([[float(v) for v in lines[k + 1 + i].split()[:2]] for i in range(npts)])
    if not np.allclose(pts, u_space.dof_coords, atol=1e-9):
        raise ConfigError("snapshot points do not match the velocity space nodes")

    k = find("SCALARS eta")
    eta_vals = np.array([float(lines[k + 2 + i]) for i in range(npts)])
    k = find("VECTORS u")
    uv = np.array([[float(v) for v in lines[k + 1 + i].split()[:2]] for i in range(npts)])
    u = np.concatenate([uv[:, 0], uv[:, 1]])

    # eta samples live at the u-space nodes; the eta-space nodes are a subset
    # only for matching layouts, so evaluate the r2-representation at them.
    carrier = scalar_twin(u_space)
    eta = carrier.eval_cells(eta_vals, eta_space.dof_cells, eta_space.dof_coords)
    return FieldState(eta_space, u_space, eta, u, time)
