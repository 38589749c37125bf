"""Conforming triangulations of polygonal domains, with tagged boundary facets.

Meshes are immutable after construction.  Boundary facets carry the adjacent
triangle, a tag name and an outward unit normal (pointing into holes for hole
boundaries, since "outward" always means out of the fluid domain).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, MeshFormatError, MeshTopologyError

__all__ = [
    "Triangulation",
    "MeshMetrics",
    "build_rectangle_mesh",
    "build_rectangle_mesh_with_hole",
    "import_mesh",
    "write_mesh",
    "mesh_metrics",
    "perturb_interior",
]

_DEFAULT_TAG = "wall"


@dataclass(frozen=True)
class MeshMetrics:
    """Per-mesh size summary; h values are maximum edge lengths per triangle."""

    h_min: float
    h_max: float
    total_area: float
    triangle_count: int


@dataclass(frozen=True)
class Triangulation:
    """A conforming triangle mesh.

    Attributes
    ----------
    vertices : (nv, 2) float array of point coordinates (meters).
    triangles : (nt, 3) int array of vertex indices, counterclockwise.
    facet_vertices : (nb, 2) int array, endpoints of each boundary facet.
    facet_cells : (nb,) int array, triangle adjacent to each boundary facet.
    facet_tags : tuple of tag names, one per boundary facet.
    facet_normals : (nb, 2) outward unit normals.
    facet_lengths : (nb,) facet lengths.
    tags : mapping tag name -> array of facet indices.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    facet_vertices: np.ndarray
    facet_cells: np.ndarray
    facet_tags: tuple
    facet_normals: np.ndarray
    facet_lengths: np.ndarray
    tags: dict = field(repr=False)

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    @property
    def n_boundary_facets(self):
        return self.facet_vertices.shape[0]

    @property
    def boundary_facets(self):
        """Facets as ((v0, v1), cell, tag) triples, per the import format."""
        return [
            ((int(a), int(b)), int(c), t)
            for (a, b), c, t in zip(self.facet_vertices, self.facet_cells, self.facet_tags)
        ]

    def triangle_areas(self):
        p = self.vertices[self.triangles]
        return 0.5 * np.abs(_cross2(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]))

    def edge_lengths(self):
        """Lengths of the three edges of every triangle, shape (nt, 3)."""
        p = self.vertices[self.triangles]
        return np.stack(
            [
                np.linalg.norm(p[:, 1] - p[:, 0], axis=1),
                np.linalg.norm(p[:, 2] - p[:, 1], axis=1),
                np.linalg.norm(p[:, 0] - p[:, 2], axis=1),
            ],
            axis=1,
        )


def _cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _signed_areas(vertices, triangles):
    p = vertices[triangles]
    return 0.5 * _cross2(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])


def make_triangulation(vertices, triangles, facet_tag_map=None):
    """Build a validated Triangulation from raw arrays.

    Triangles with negative signed area are reoriented.  Boundary facets are
    derived from edge adjacency; `facet_tag_map` optionally assigns tag names
    to vertex pairs (order-insensitive), everything else is tagged "wall".
    """
    vertices = np.ascontiguousarray(np.asarray(vertices, dtype=float))
    triangles = np.ascontiguousarray(np.asarray(triangles, dtype=np.int64))
    if vertices.ndim != 2 or vertices.shape[1] != 2:
        raise InvalidArgumentError("vertices must be an (n, 2) array")
    if triangles.ndim != 2 or triangles.shape[1] != 3:
        raise InvalidArgumentError("triangles must be an (m, 3) array")
    nv = vertices.shape[0]
    if triangles.size and (triangles.min() < 0 or triangles.max() >= nv):
        raise MeshTopologyError("triangle refers to a vertex index out of range")

    areas = _signed_areas(vertices, triangles)
    flip = areas < 0
    if np.any(flip):
        triangles = triangles.copy()
        triangles[flip, 1], triangles[flip, 2] = (
            triangles[flip, 2].copy(),
            triangles[flip, 1].copy(),
        )
        areas = np.abs(areas)
    if np.any(areas <= 0.0):
        raise MeshTopologyError("degenerate triangle with zero area")

    # Edge adjacency: interior edges are shared by exactly 2 triangles.
    local = [(0, 1), (1, 2), (2, 0)]
    edges = np.concatenate([triangles[:, le] for le in local], axis=0)
    owner = np.tile(np.arange(triangles.shape[0]), 3)
    key = np.sort(edges, axis=1)
    uniq, inverse, counts = np.unique(
        key, axis=0, return_inverse=True, return_counts=True
    )
    if np.any(counts > 2):
        raise MeshTopologyError("an edge is shared by more than two triangles")

    boundary = counts[inverse] == 1
    facet_vertices = edges[boundary]
    facet_cells = owner[boundary]

    # Deterministic facet order: sort by (min vertex, max vertex).
    order = np.lexsort((key[boundary][:, 1], key[boundary][:, 0]))
    facet_vertices = facet_vertices[order]
    facet_cells = facet_cells[order]

    normals, lengths = _facet_normals(vertices, triangles, facet_vertices, facet_cells)

    tag_lookup = {}
    if facet_tag_map:
        tag_lookup = {tuple(sorted(k)): v for k, v in facet_tag_map.items()}
    facet_tags = tuple(
        tag_lookup.get((int(min(a, b)), int(max(a, b))), _DEFAULT_TAG)
        for a, b in facet_vertices
    )
    tags = {}
    for i, t in enumerate(facet_tags):
        tags.setdefault(t, []).append(i)
    tags = {t: np.asarray(ix, dtype=np.int64) for t, ix in tags.items()}

    return Triangulation(
        vertices=vertices,
        triangles=triangles,
        facet_vertices=facet_vertices,
        facet_cells=facet_cells,
        facet_tags=facet_tags,
        facet_normals=normals,
        facet_lengths=lengths,
        tags=tags,
    )


def _facet_normals(vertices, triangles, facet_vertices, facet_cells):
    a = vertices[facet_vertices[:, 0]]
    b = vertices[facet_vertices[:, 1]]
    tangent = b - a
    lengths = np.linalg.norm(tangent, axis=1)
    normals = np.stack([tangent[:, 1], -tangent[:, 0]], axis=1) / lengths[:, None]
    # Orient away from the adjacent triangle's opposite vertex.
    tri = triangles[facet_cells]
    centroid = vertices[tri].mean(axis=1)
    outward = np.einsum("ij,ij->i", normals, a - centroid) > 0
    normals[~outward] *= -1.0
    return normals, lengths


def graded_lines(lo, hi, fine_lo, fine_hi, h_fine, h_coarse):
    """Gridline positions from lo to hi, refined to ~h_fine on [fine_lo, fine_hi]."""
    if not (lo <= fine_lo < fine_hi <= hi):
        raise InvalidArgumentError("refinement window must lie inside the interval")
    parts = []
    if fine_lo > lo:
        n = max(1, round((fine_lo - lo) / h_coarse))
        parts.append(np.linspace(lo, fine_lo, n + 1)[:-1])
    n = max(1, round((fine_hi - fine_lo) / h_fine))
    parts.append(np.linspace(fine_lo, fine_hi, n + 1)[:-1])
    if fine_hi < hi:
        n = max(1, round((hi - fine_hi) / h_coarse))
        parts.append(np.linspace(fine_hi, hi, n + 1)[:-1])
    return np.concatenate(parts + [np.array([hi])])


def build_rectangle_mesh(bounds, nx, ny, diagonal="right", x_lines=None, y_lines=None):
    """Structured triangulation of an axis-aligned rectangle.

    Parameters
    ----------
    bounds : (xmin, xmax, ymin, ymax).
    nx, ny : number of cells per direction (>= 1).
    diagonal : "right" splits every cell along the lower-left to upper-right
        diagonal (the reproducible default); "crossed" adds the cell center
        and makes four triangles per cell (mirror symmetric).
    x_lines, y_lines : optional explicit gridline arrays (for graded meshes);
        they override bounds/nx/ny in their direction.

    All boundary facets are tagged "wall".
    """
    if x_lines is None or y_lines is None:
        if nx < 1 or ny < 1:
            raise InvalidArgumentError("nx and ny must be at least 1")
        xmin, xmax, ymin, ymax = map(float, bounds)
        if not (xmax > xmin and ymax > ymin):
            raise InvalidArgumentError("bounds are degenerate")
    if diagonal not in ("right", "crossed"):
        raise InvalidArgumentError(f"unknown diagonal kind {diagonal!r}")

    x = np.asarray(x_lines, dtype=float) if x_lines is not None else np.linspace(xmin, xmax, nx + 1)
    y = np.asarray(y_lines, dtype=float) if y_lines is not None else np.linspace(ymin, ymax, ny + 1)
    if x.size < 2 or y.size < 2 or np.any(np.diff(x) <= 0) or np.any(np.diff(y) <= 0):
        raise InvalidArgumentError("gridlines must be strictly increasing with >= 2 entries")
    nx, ny = x.size - 1, y.size - 1
    X, Y = np.meshgrid(x, y, indexing="ij")
    vertices = np.stack([X.ravel(), Y.ravel()], axis=1)

    def vid(i, j):
        return i * (ny + 1) + j

    tris = []
    if diagonal == "right":
        for i in range(nx):
            for j in range(ny):
                v00, v10 = vid(i, j), vid(i + 1, j)
                v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
                tris.append((v00, v10, v11))
                tris.append((v00, v11, v01))
    else:
        centers = []
        base = vertices.shape[0]
        for i in range(nx):
            for j in range(ny):
                v00, v10 = vid(i, j), vid(i + 1, j)
                v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
                c = base + len(centers)
                centers.append(
                    (0.5 * (x[i] + x[i + 1]), 0.5 * (y[j] + y[j + 1]))
                )
                tris.append((v00, v10, c))
                tris.append((v10, v11, c))
                tris.append((v11, v01, c))
                tris.append((v01, v00, c))
        vertices = np.concatenate([vertices, np.asarray(centers)], axis=0)

    return make_triangulation(vertices, np.asarray(tris, dtype=np.int64))


def build_rectangle_mesh_with_hole(
    bounds, nx, ny, center, radius, hole_tag="cylinder", diagonal="crossed",
    x_lines=None, y_lines=None,
):
    """Structured rectangle mesh with a polygonal hole approximating a circle.

    Triangles whose centroid lies inside the circle are removed and the
    exposed ring of vertices is snapped onto the circle, so the hole boundary
    is a conforming polygonal approximation.  A snap that would flatten an
    adjacent triangle below a quarter of its area is skipped (sliver guard).
    Hole facets are tagged `hole_tag`, the outer boundary "wall".
    """
    base = build_rectangle_mesh(bounds, nx, ny, diagonal=diagonal,
                                x_lines=x_lines, y_lines=y_lines)
    cx, cy = center
    centroid = base.vertices[base.triangles].mean(axis=1)
    inside = np.hypot(centroid[:, 0] - cx, centroid[:, 1] - cy) < radius
    if not np.any(inside):
        raise InvalidArgumentError("hole radius too small for this mesh resolution")
    keep = base.triangles[~inside]

    used = np.unique(keep)
    remap = -np.ones(base.n_vertices, dtype=np.int64)
    remap[used] = np.arange(used.size)
    vertices = base.vertices[used].copy()
    triangles = remap[keep]

    # Vertices that belonged to a removed triangle sit on the new hole ring.
    removed_verts = np.unique(base.triangles[inside])
    ring = np.intersect1d(removed_verts, used)
    ring_new = remap[ring]
    d = vertices[ring_new] - np.array([cx, cy])
    r = np.linalg.norm(d, axis=1)
    if np.any(r == 0):
        raise MeshTopologyError("hole center coincides with a kept vertex")
    snapped = np.array([cx, cy]) + d * (radius / r)[:, None]

    # Base triangles are CCW (positive signed area); a snap must keep every
    # touched triangle positively oriented and above a quarter of its area.
    areas0 = _signed_areas(vertices, triangles)
    for k, v in enumerate(ring_new):
        old = vertices[v].copy()
        vertices[v] = snapped[k]
        touched = np.any(triangles == v, axis=1)
        a = _signed_areas(vertices, triangles[touched])
        if np.any(a < 0.25 * areas0[touched]):
            vertices[v] = old

    mesh = make_triangulation(vertices, triangles)
    # Retag facets on the hole ring.
    ring_set = set(ring_new.tolist())
    tag_map = {}
    for (a, b) in mesh.facet_vertices:
        if int(a) in ring_set and int(b) in ring_set:
            tag_map[(int(a), int(b))] = hole_tag
    if not tag_map:
        raise MeshTopologyError("hole cut produced no boundary facets")
    return make_triangulation(vertices, triangles, facet_tag_map=tag_map)


def perturb_interior(mesh, amplitude=0.15, seed=0):
    """Jiggle interior vertices by a fraction of the local edge length.

    Deterministic for a fixed seed; boundary vertices never move.  Used to
    break grid alignment in convergence studies.
    """
    if not 0 <= amplitude < 0.3:
        raise InvalidArgumentError("amplitude must be in [0, 0.3) to keep validity")
    rng = np.random.default_rng(seed)
    boundary = np.unique(mesh.facet_vertices)
    interior = np.setdiff1d(np.arange(mesh.n_vertices), boundary)

    # Local scale: shortest edge incident to each vertex.
    scale = np.full(mesh.n_vertices, np.inf)
    lengths = mesh.edge_lengths()
    for k, (i, j) in enumerate([(0, 1), (1, 2), (2, 0)]):
        for v in (mesh.triangles[:, i], mesh.triangles[:, j]):
            np.minimum.at(scale, v, lengths[:, k])

    shift = rng.uniform(-1.0, 1.0, size=(interior.size, 2))
    vertices = mesh.vertices.copy()
    vertices[interior] += amplitude * scale[interior, None] * shift
    facet_tag_map = {
        (int(a), int(b)): t for (a, b), t in zip(mesh.facet_vertices, mesh.facet_tags)
    }
    return make_triangulation(vertices, mesh.triangles, facet_tag_map=facet_tag_map)


def mesh_metrics(mesh):
    """Compute h_min / h_max (max edge length per triangle) and total area."""
    h = mesh.edge_lengths().max(axis=1)
    return MeshMetrics(
        h_min=float(h.min()),
        h_max=float(h.max()),
        total_area=float(mesh.triangle_areas().sum()),
        triangle_count=mesh.n_triangles,
    )


def import_mesh(path):
    """Read the ASCII node/element format.

    Format: header `nodes N elements M boundary B`; N lines `x y`; M lines
    `i j k` (0-based); B lines `i j tagname`.  Whitespace separated.
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()

    def tokens(lineno):
        if lineno >= len(lines):
            raise MeshFormatError("unexpected end of file", line=lineno + 1)
        return lines[lineno].split()

    head = tokens(0)
    if len(head) != 6 or head[0] != "nodes" or head[2] != "elements" or head[4] != "boundary":
        raise MeshFormatError("expected header 'nodes N elements M boundary B'", line=1)
    try:
        n_nodes, n_elems, n_bnd = int(head[1]), int(head[3]), int(head[5])
    except ValueError:
        raise MeshFormatError("header counts must be integers", line=1) from None

    vertices = np.empty((n_nodes, 2))
    for i in range(n_nodes):
        t = tokens(1 + i)
        if len(t) != 2:
            raise MeshFormatError("expected 'x y'", line=2 + i)
        try:
            vertices[i] = [float(t[0]), float(t[1])]
        except ValueError:
            raise MeshFormatError("bad coordinate", line=2 + i) from None

    triangles = np.empty((n_elems, 3), dtype=np.int64)
    for i in range(n_elems):
        t = tokens(1 + n_nodes + i)
        if len(t) != 3:
            raise MeshFormatError("expected 'i j k'", line=2 + n_nodes + i)
        try:
            triangles[i] = [int(t[0]), int(t[1]), int(t[2])]
        except ValueError:
            raise MeshFormatError("bad vertex index", line=2 + n_nodes + i) from None

    tag_map = {}
    for i in range(n_bnd):
        t = tokens(1 + n_nodes + n_elems + i)
        if len(t) != 3:
            raise MeshFormatError("expected 'i j tagname'", line=2 + n_nodes + n_elems + i)
        try:
            a, b = int(t[0]), int(t[1])
        except ValueError:
            raise MeshFormatError("bad facet index", line=2 + n_nodes + n_elems + i) from None
        if not (0 <= a < n_nodes and 0 <= b < n_nodes):
            raise MeshTopologyError(f"boundary facet ({a}, {b}) out of range")
        tag_map[(a, b)] = t[2]

    return make_triangulation(vertices, triangles, facet_tag_map=tag_map)


def write_mesh(path, mesh):
    """Write a Triangulation in the ASCII node/element format."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(
            f"nodes {mesh.n_vertices} elements {mesh.n_triangles} "
            f"boundary {mesh.n_boundary_facets}\n"
        )
        for x, y in mesh.vertices:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i} {j} {k}\n")
        for (a, b), t in zip(mesh.facet_vertices, mesh.facet_tags):
            fh.write(f"{a} {b} {t}\n")
