"""Cell-centered admissible meshes for the two-point flux scheme.

Cells are triangles (cell center = circumcenter) or axis-aligned rectangles
(cell center = barycenter).  In both cases the segment joining the centers
of two neighboring cells is orthogonal to their shared edge, which is what
makes the two-point transmissibility tau = measure/center_distance a
consistent approximation of the normal diffusive flux.

Homogeneous Neumann boundaries need no ghost cells: boundary edges simply
contribute nothing to the stiffness pattern.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InadmissibleMeshError, MeshFormatError

# relative (to mesh size h) floor on the signed center distance
DEGENERACY_REL_TOL = 1e-12


@dataclass(eq=False)
class EdgeTable:
    """Interior edges, one row per edge, cell_a < cell_b."""

    cell_a: np.ndarray
    cell_b: np.ndarray
    vertices: np.ndarray        # (E, 2) endpoint indices into Mesh.points
    measure: np.ndarray         # edge length
    center_distance: np.ndarray
    transmissibility: np.ndarray
    unit_normal: np.ndarray     # (E, 2), oriented from cell_a toward cell_b
    diamond_area: np.ndarray    # 0.5 * measure * center_distance

    def __len__(self):
        return len(self.measure)


@dataclass(eq=False)
class BoundaryEdgeTable:
    cell: np.ndarray
    measure: np.ndarray

    def __len__(self):
        return len(self.measure)


@dataclass(eq=False)
class Mesh:
    """Admissible mesh with precomputed two-point flux geometry.

    Attributes
    ----------
    points : (P, 2) array
        Vertex coordinates.
    cells : list of index arrays
        Vertex indices per cell (length 3 or 4), counterclockwise.
    cell_area, cell_center : per-cell geometry
    edges : EdgeTable
        Interior edges with transmissibilities.
    boundary_edges : BoundaryEdgeTable
    cell_to_edges : list of arrays
        Interior-edge indices incident to each cell.
    h : float
        Largest cell diameter.
    """

    points: np.ndarray
    cells: list
    cell_area: np.ndarray
    cell_center: np.ndarray
    edges: EdgeTable
    boundary_edges: BoundaryEdgeTable
    cell_to_edges: list
    h: float

    @property
    def n_cells(self) -> int:
        return len(self.cell_area)

    @property
    def n_interior_edges(self) -> int:
        return len(self.edges)


def _circumcenters(points, triangles):
    a = points[triangles[:, 0]]
    b = points[triangles[:, 1]]
    c = points[triangles[:, 2]]
    dd = 2.0 * (a[:, 0] * (b[:, 1] - c[:, 1])
                + b[:, 0] * (c[:, 1] - a[:, 1])
                + c[:, 0] * (a[:, 1] - b[:, 1]))
    a2 = (a * a).sum(axis=1)
    b2 = (b * b).sum(axis=1)
    c2 = (c * c).sum(axis=1)
    ux = (a2 * (b[:, 1] - c[:, 1]) + b2 * (c[:, 1] - a[:, 1])
          + c2 * (a[:, 1] - b[:, 1])) / dd
    uy = (a2 * (c[:, 0] - b[:, 0]) + b2 * (a[:, 0] - c[:, 0])
          + c2 * (b[:, 0] - a[:, 0])) / dd
    return np.column_stack([ux, uy])


def _finish(points, cells, cell_area, cell_center, interior, boundary, h):
    """Assemble the edge tables from raw per-edge records."""
    interior.sort(key=lambda r: (r[2], r[3]))
    if interior:
        cell_a = np.array([r[0] for r in interior])
        cell_b = np.array([r[1] for r in interior])
        verts = np.array([(r[2], r[3]) for r in interior])
    else:
        cell_a = np.empty(0, dtype=int)
        cell_b = np.empty(0, dtype=int)
        verts = np.empty((0, 2), dtype=int)

    p = points[verts[:, 0]] if len(verts) else np.empty((0, 2))
    q = points[verts[:, 1]] if len(verts) else np.empty((0, 2))
    measure = np.linalg.norm(q - p, axis=1)
    tangent = (q - p) / measure[:, None] if len(measure) else np.empty((0, 2))
    normal = np.column_stack([-tangent[:, 1], tangent[:, 0]]) if len(measure) else np.empty((0, 2))

    # orient the normal from cell_a toward cell_b using barycenters (robust
    # even when a circumcenter sits outside its triangle)
    if len(measure):
        bary = np.array([points[c].mean(axis=0) for c in cells])
        flip = ((bary[cell_b] - bary[cell_a]) * normal).sum(axis=1) < 0.0
        normal[flip] *= -1.0

    delta = cell_center[cell_b] - cell_center[cell_a] if len(measure) else np.empty((0, 2))
    dist = (delta * normal).sum(axis=1) if len(measure) else np.empty(0)

    bad = np.where(dist <= DEGENERACY_REL_TOL * h)[0] if len(measure) else []
    if len(bad):
        i = bad[0]
        raise InadmissibleMeshError(
            f"degenerate center distance {dist[i]:.3e} on edge between cells "
            f"{cell_a[i]} and {cell_b[i]} (threshold {DEGENERACY_REL_TOL * h:.3e}); "
            f"{len(bad)} edge(s) affected")

    tau = measure / dist
    diamond = 0.5 * measure * dist

    edges = EdgeTable(cell_a, cell_b, verts, measure, dist, tau,
                      normal, diamond)

    if boundary:
        b_cell = np.array([r[0] for r in boundary])
        b_measure = np.array([r[1] for r in boundary])
    else:
        b_cell = np.empty(0, dtype=int)
        b_measure = np.empty(0)
    bedges = BoundaryEdgeTable(b_cell, b_measure)

    incident = [[] for _ in range(len(cells))]
    for e in range(len(measure)):
        incident[cell_a[e]].append(e)
        incident[cell_b[e]].append(e)
    cell_to_edges = [np.array(lst, dtype=int) for lst in incident]

    return Mesh(points, cells, cell_area, cell_center, edges, bedges,
                cell_to_edges, h)


def from_triangulation(points: np.ndarray, triangles: np.ndarray) -> Mesh:
    """Build an admissible mesh from a triangle list.

    Raises InadmissibleMeshError when any pair of neighboring circumcenters
    is closer than DEGENERACY_REL_TOL * h along the edge normal (right
    triangles sharing their hypotenuse are the canonical offender).
    """
    points = np.asarray(points, dtype=float)
    triangles = np.asarray(triangles, dtype=int)
    if triangles.ndim != 2 or triangles.shape[1] != 3:
        raise MeshFormatError("triangle array must have shape (n, 3)")

    a = points[triangles[:, 0]]
    b = points[triangles[:, 1]]
    c = points[triangles[:, 2]]
    signed = 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                    - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1]))
    flip = signed < 0
    triangles = triangles.copy()
    triangles[flip] = triangles[flip][:, ::-1]
    area = np.abs(signed)
    if np.any(area <= 0):
        raise InadmissibleMeshError("zero-area triangle in input")

    centers = _circumcenters(points, triangles)

    # longest edge per triangle = cell diameter
    edge_len = np.stack([
        np.linalg.norm(points[triangles[:, 1]] - points[triangles[:, 0]], axis=1),
        np.linalg.norm(points[triangles[:, 2]] - points[triangles[:, 1]], axis=1),
        np.linalg.norm(points[triangles[:, 0]] - points[triangles[:, 2]], axis=1),
    ])
    h = float(edge_len.max())

    seen = {}
    for t in range(len(triangles)):
        for k in range(3):
            v0, v1 = triangles[t, k], triangles[t, (k + 1) % 3]
            key = (min(v0, v1), max(v0, v1))
            seen.setdefault(key, []).append(t)

    interior, boundary = [], []
    for (v0, v1), owners in seen.items():
        if len(owners) == 2:
            ca, cb = sorted(owners)
            interior.append((ca, cb, v0, v1))
        elif len(owners) == 1:
            boundary.append((owners[0], float(np.linalg.norm(points[v1] - points[v0]))))
        else:
            raise MeshFormatError(f"edge ({v0},{v1}) shared by {len(owners)} cells")

    cells = [triangles[t] for t in range(len(triangles))]
    return _finish(points, cells, area, centers, interior, boundary, h)


def build_structured_rect(nx: int, ny: int, lx: float = 1.0, ly: float = 1.0) -> Mesh:
    """Uniform rectangular mesh on [0,lx] x [0,ly], cell k = j*nx + i."""
    if nx < 1 or ny < 1:
        raise MeshFormatError("nx and ny must be positive")
    hx, hy = lx / nx, ly / ny

    xs = np.linspace(0.0, lx, nx + 1)
    ys = np.linspace(0.0, ly, ny + 1)
    points = np.array([(x, y) for y in ys for x in xs])

    def pid(i, j):
        return j * (nx + 1) + i

    def cid(i, j):
        return j * nx + i

    cells = []
    for j in range(ny):
        for i in range(nx):
            cells.append(np.array([pid(i, j), pid(i + 1, j),
                                   pid(i + 1, j + 1), pid(i, j + 1)]))

    n = nx * ny
    area = np.full(n, hx * hy)
    cx = (np.arange(nx) + 0.5) * hx
    cy = (np.arange(ny) + 0.5) * hy
    centers = np.array([(x, y) for y in cy for x in cx])

    interior, boundary = [], []
    for j in range(ny):
        for i in range(nx):
            if i + 1 < nx:   # vertical edge shared with the right neighbor
                interior.append((cid(i, j), cid(i + 1, j),
                                 pid(i + 1, j), pid(i + 1, j + 1)))
            if j + 1 < ny:   # horizontal edge shared with the upper neighbor
                interior.append((cid(i, j), cid(i, j + 1),
                                 pid(i, j + 1), pid(i + 1, j + 1)))
    for i in range(nx):
        boundary.append((cid(i, 0), hx))
        boundary.append((cid(i, ny - 1), hx))
    for j in range(ny):
        boundary.append((cid(0, j), hy))
        boundary.append((cid(nx - 1, j), hy))

    h = float(np.hypot(hx, hy))
    return _finish(points, cells, area, centers, interior, boundary, h)


def load_msh(path) -> Mesh:
    """Read a Gmsh MSH 2.2 ASCII file (triangles only).

    Line (type 1) and point (type 15) elements are skipped; any other
    element type is an error.
    """
    with open(path) as f:
        lines = [ln.strip() for ln in f]

    def section(name):
        try:
            start = lines.index("$" + name)
            end = lines.index("$End" + name)
        except ValueError:
            raise MeshFormatError(f"missing ${name} section in {path}")
        return lines[start + 1:end]

    fmt = section("MeshFormat")
    if not fmt or not fmt[0].split()[0].startswith("2.2"):
        found = fmt[0].split()[0] if fmt else "?"
        raise MeshFormatError(f"unsupported MSH version {found} (need 2.2 ASCII)")
    if fmt[0].split()[1] != "0":
        raise MeshFormatError("binary MSH is not supported")

    node_lines = section("Nodes")
    n_nodes = int(node_lines[0])
    ids = {}
    coords = []
    for ln in node_lines[1:1 + n_nodes]:
        parts = ln.split()
        ids[int(parts[0])] = len(coords)
        coords.append((float(parts[1]), float(parts[2])))
    points = np.array(coords)

    elem_lines = section("Elements")
    n_elems = int(elem_lines[0])
    triangles = []
    for ln in elem_lines[1:1 + n_elems]:
        parts = ln.split()
        etype = int(parts[1])
        ntags = int(parts[2])
        nodes = parts[3 + ntags:]
        if etype == 2:
            triangles.append([ids[int(v)] for v in nodes])
        elif etype in (1, 15):
            continue
        else:
            raise MeshFormatError(
                f"unsupported element type {etype} in {path} "
                "(only 3-node triangles, lines, and points)")
    if not triangles:
        raise MeshFormatError(f"no triangles in {path}")
    return from_triangulation(points, np.array(triangles))


def write_msh(mesh: Mesh, path) -> None:
    """Write a triangular mesh as MSH 2.2 ASCII (round-trips to 1e-12)."""
    for cell in mesh.cells:
        if len(cell) != 3:
            raise MeshFormatError("write_msh supports triangular meshes only")
    with open(path, "w") as f:
        f.write("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n")
        f.write(f"$Nodes\n{len(mesh.points)}\n")
        for i, (x, y) in enumerate(mesh.points, start=1):
            f.write(f"{i} {x:.17g} {y:.17g} 0\n")
        f.write("$EndNodes\n")
        f.write(f"$Elements\n{len(mesh.cells)}\n")
        for i, cell in enumerate(mesh.cells, start=1):
            v = " ".join(str(int(p) + 1) for p in cell)
            f.write(f"{i} 2 2 0 0 {v}\n")
        f.write("$EndElements\n")


def validate_admissibility(mesh: Mesh, tol: float = 1e-8) -> dict:
    """Check orthogonality of center segments to their edges.

    Returns {"ok", "worst_angle_deviation", "offending_edges"}; the
    deviation is the angle (radians) between the center segment and the
    edge normal, zero for an exactly admissible mesh.
    """
    e = mesh.edges
    if len(e) == 0:
        return {"ok": True, "worst_angle_deviation": 0.0, "offending_edges": []}

    p = mesh.points[e.vertices[:, 0]]
    q = mesh.points[e.vertices[:, 1]]
    tangent = (q - p) / np.linalg.norm(q - p, axis=1)[:, None]

    delta = mesh.cell_center[e.cell_b] - mesh.cell_center[e.cell_a]
    norms = np.linalg.norm(delta, axis=1)
    degenerate = norms <= DEGENERACY_REL_TOL * mesh.h
    align = np.zeros(len(e))
    good = ~degenerate
    align[good] = np.abs((delta[good] / norms[good, None] * tangent[good]).sum(axis=1))
    align[degenerate] = 1.0

    offending = np.where((align > tol) | degenerate)[0]
    worst = float(np.arcsin(np.clip(align.max(initial=0.0), 0.0, 1.0)))
    return {
        "ok": len(offending) == 0,
        "worst_angle_deviation": worst,
        "offending_edges": offending.tolist(),
    }
