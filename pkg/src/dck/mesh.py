"""Structured simplicial meshes for the example domains.

Two domain families are supported: the convex pentagon with vertices
(-0.5,-0.5), (0.5,-0.5), (0.5,0), (0,0.5), (-0.5,0.5), triangulated on a
uniform grid of step 1/n, and the unit cube (-0.5,0.5)^3 split into
tetrahedra. Meshes refine dyadically and the refinement hierarchy is
recorded so that nodal values can be prolonged from coarse to fine.
"""

from dataclasses import dataclass, field
import itertools

import numpy as np


class MeshError(ValueError):
    pass


@dataclass
class Mesh:
    """Simplicial mesh with boundary facet information.

    Attributes
    ----------
    dim : int
        Spatial dimension, 2 (triangles) or 3 (tetrahedra).
    nodes : (N, dim) float array
        Node coordinates.
    cells : (C, dim+1) int array
        Node indices of each simplex, positively oriented.
    boundary_facets : (F, dim) int array
        Node indices of each boundary facet.
    facet_owner : (F,) int array
        Index of the unique cell owning each boundary facet.
    h : float
        Nominal mesh size (grid step of the structured construction).
    level : int
        Refinement depth from the base mesh.
    kind : str
        'pentagon' or 'cube'; drives the refinement rule.
    n : int
        Structured subdivision parameter (h == 1/n).
    parent_nnodes : int or None
        Number of nodes of the parent mesh if this mesh was produced by
        refine_uniform, else None.
    parent_edges : (N, 2) int array or None
        For refined meshes, row i holds the parent node pair whose
        midpoint is node i; copied coarse nodes store (i, i).
    """

    dim: int
    nodes: np.ndarray
    cells: np.ndarray
    boundary_facets: np.ndarray
    facet_owner: np.ndarray
    h: float
    level: int
    kind: str
    n: int
    parent_nnodes: int | None = None
    parent_edges: np.ndarray | None = None
    _boundary_nodes: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def boundary_nodes(self) -> np.ndarray:
        """Sorted indices of nodes lying on some boundary facet."""
        if self._boundary_nodes is None:
            self._boundary_nodes = np.unique(self.boundary_facets)
        return self._boundary_nodes

    def cell_volumes(self) -> np.ndarray:
        """Signed volumes of all cells."""
        v = self.nodes[self.cells]
        edges = v[:, 1:, :] - v[:, :1, :]
        det = np.linalg.det(edges)
        return det / _factorial(self.dim)

    def facet_measures(self) -> np.ndarray:
        """Lengths (2D) or areas (3D) of the boundary facets."""
        v = self.nodes[self.boundary_facets]
        if self.dim == 2:
            return np.linalg.norm(v[:, 1] - v[:, 0], axis=1)
        cr = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
        return 0.5 * np.linalg.norm(cr, axis=1)


@dataclass
class IndexSets:
    """Interior/boundary node partition plus the constrained region nodes."""

    interior: np.ndarray
    boundary: np.ndarray
    omega: np.ndarray

    @property
    def n_interior(self) -> int:
        return self.interior.size

    @property
    def n_boundary(self) -> int:
        return self.boundary.size


def _factorial(d: int) -> int:
    return 1 if d <= 1 else d * _factorial(d - 1)


def _boundary_from_cells(cells: np.ndarray, dim: int):
    """Extract boundary facets (appearing in exactly one cell) with owners."""
    nloc = dim + 1
    # all facets of all cells: drop one local vertex at a time
    facets = []
    owners = []
    for drop in range(nloc):
        keep = [k for k in range(nloc) if k != drop]
        facets.append(cells[:, keep])
        owners.append(np.arange(cells.shape[0]))
    facets = np.concatenate(facets, axis=0)
    owners = np.concatenate(owners)
    key = np.sort(facets, axis=1)
    order = np.lexsort(key.T[::-1])
    key = key[order]
    facets = facets[order]
    owners = owners[order]
    same_as_next = np.zeros(len(key), dtype=bool)
    same_as_next[:-1] = np.all(key[:-1] == key[1:], axis=1)
    same_as_prev = np.zeros(len(key), dtype=bool)
    same_as_prev[1:] = same_as_next[:-1]
    shared = same_as_next | same_as_prev
    if np.any(same_as_next & np.roll(same_as_next, 1) & (np.arange(len(key)) > 0)):
        raise MeshError("facet shared by more than two cells")
    bmask = ~shared
    return facets[bmask], owners[bmask]


def build_pentagon_mesh(n: int) -> Mesh:
    """Structured triangulation of the pentagon; grid step 1/n, n even >= 2.

    The unit square [-0.5, 0.5]^2 is gridded with step 1/n, every square
    split along the diagonal parallel to the cut line x + y = 0.5, and
    triangles above the cut removed.
    """
    if n < 2 or n % 2 != 0:
        raise MeshError(f"pentagon subdivision must be even and >= 2, got {n}")
    cut = 3 * n // 2  # node (i, j) is kept iff i + j <= cut

    node_id = -np.ones((n + 1, n + 1), dtype=np.int64)
    coords = []
    k = 0
    for j in range(n + 1):
        for i in range(n + 1):
            if i + j <= cut:
                node_id[i, j] = k
                coords.append((i / n - 0.5, j / n - 0.5))
                k += 1
    nodes = np.array(coords, dtype=float)

    cells = []
    for j in range(n):
        for i in range(n):
            s = i + j
            bl, br = node_id[i, j], node_id[i + 1, j]
            tl, tr = node_id[i, j + 1], node_id[i + 1, j + 1]
            if s + 1 <= cut:
                cells.append((bl, br, tl))
            if s + 2 <= cut:
                cells.append((br, tr, tl))
    cells = np.array(cells, dtype=np.int64)

    facets, owners = _boundary_from_cells(cells, 2)
    return Mesh(2, nodes, cells, facets, owners, 1.0 / n, 0, "pentagon", n)


def build_cube_mesh(n: int) -> Mesh:
    """Kuhn triangulation of (-0.5, 0.5)^3 with n cubes per axis.

    Every cube is split into the 6 tetrahedra sharing its main diagonal,
    one per permutation of the coordinate directions; the split is
    translation-invariant so face triangulations of neighbouring cubes
    match.
    """
    if n < 1:
        raise MeshError(f"cube subdivision must be >= 1, got {n}")
    m = n + 1
    idx = np.arange(m ** 3, dtype=np.int64).reshape(m, m, m)  # idx[i, j, k]
    ii, jj, kk = np.meshgrid(np.arange(m), np.arange(m), np.arange(m),
                             indexing="ij")
    nodes = np.stack([ii, jj, kk], axis=-1).reshape(-1, 3) / n - 0.5

    # vertex chains 0 -> e_{p0} -> e_{p0}+e_{p1} -> (1,1,1)
    offsets = []
    for perm in itertools.permutations(range(3)):
        o = np.zeros((4, 3), dtype=np.int64)
        o[1] = np.eye(3, dtype=np.int64)[perm[0]]
        o[2] = o[1] + np.eye(3, dtype=np.int64)[perm[1]]
        o[3] = 1
        offsets.append(o)

    base = np.stack(np.meshgrid(np.arange(n), np.arange(n), np.arange(n),
                                indexing="ij"), axis=-1).reshape(-1, 3)
    cells = np.empty((6 * n ** 3, 4), dtype=np.int64)
    for t, o in enumerate(offsets):
        corner = base[:, None, :] + o[None, :, :]  # (n^3, 4, 3)
        cells[t::6] = idx[corner[..., 0], corner[..., 1], corner[..., 2]]

    # enforce positive orientation
    v = nodes[cells]
    det = np.linalg.det(v[:, 1:, :] - v[:, :1, :])
    flip = det < 0
    cells[flip] = cells[flip][:, [0, 2, 1, 3]]

    facets, owners = _boundary_from_cells(cells, 3)
    return Mesh(3, nodes, cells, facets, owners, 1.0 / n, 0, "cube", n)


def refine_uniform(mesh: Mesh) -> Mesh:
    """Dyadic refinement preserving coarse nodes (coordinates and indices).

    2D meshes are red-refined (each triangle split into 4 via the edge
    midpoints). Cube meshes are rebuilt with 2n and renumbered so the
    coarse nodes come first; every new node is the midpoint of a coarse
    mesh edge, which is recorded for prolongation.
    """
    if mesh.dim == 2:
        return _red_refine_2d(mesh)
    if mesh.kind == "cube":
        return _refine_cube(mesh)
    raise MeshError(f"no refinement rule for dim={mesh.dim}, kind={mesh.kind}")


def _red_refine_2d(mesh: Mesh) -> Mesh:
    nc = mesh.n_nodes
    cells = mesh.cells
    pairs = np.concatenate([cells[:, [0, 1]], cells[:, [1, 2]],
                            cells[:, [0, 2]]], axis=0)
    pairs = np.sort(pairs, axis=1)
    edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
    mid_id = nc + inverse.reshape(3, -1)  # rows: m01, m12, m02 per cell

    mid_coords = 0.5 * (mesh.nodes[edges[:, 0]] + mesh.nodes[edges[:, 1]])
    nodes = np.vstack([mesh.nodes, mid_coords])

    v0, v1, v2 = cells[:, 0], cells[:, 1], cells[:, 2]
    m01, m12, m02 = mid_id[0], mid_id[1], mid_id[2]
    new_cells = np.concatenate([
        np.stack([v0, m01, m02], axis=1),
        np.stack([v1, m12, m01], axis=1),
        np.stack([v2, m02, m12], axis=1),
        np.stack([m01, m12, m02], axis=1),
    ], axis=0)

    parent_edges = np.empty((nodes.shape[0], 2), dtype=np.int64)
    parent_edges[:nc, 0] = parent_edges[:nc, 1] = np.arange(nc)
    parent_edges[nc:] = edges

    facets, owners = _boundary_from_cells(new_cells, 2)
    return Mesh(2, nodes, new_cells, facets, owners, mesh.h / 2,
                mesh.level + 1, mesh.kind, 2 * mesh.n,
                parent_nnodes=nc, parent_edges=parent_edges)


def _refine_cube(mesh: Mesh) -> Mesh:
    n = mesh.n
    fine = build_cube_mesh(2 * n)
    m_c, m_f = n + 1, 2 * n + 1

    fi, fj, fk = np.meshgrid(np.arange(m_f), np.arange(m_f), np.arange(m_f),
                             indexing="ij")
    fi, fj, fk = fi.ravel(), fj.ravel(), fk.ravel()
    coarse_like = (fi % 2 == 0) & (fj % 2 == 0) & (fk % 2 == 0)

    def coarse_id(ci, cj, ck):
        return (ci * m_c + cj) * m_c + ck

    def fine_id(i, j, k):
        return (i * m_f + j) * m_f + k

    old_of_coarse = fine_id(2 * np.arange(m_c)[:, None, None],
                            2 * np.arange(m_c)[None, :, None],
                            2 * np.arange(m_c)[None, None, :]).ravel()
    rest = np.where(~coarse_like)[0]
    new_order = np.concatenate([old_of_coarse, rest])
    perm = np.empty(fine.n_nodes, dtype=np.int64)  # old index -> new index
    perm[new_order] = np.arange(fine.n_nodes)

    nodes = fine.nodes[new_order]
    cells = perm[fine.cells]
    facets = perm[fine.boundary_facets]

    # parent edge of every fine node: offset the odd components by +-1
    oi, oj, ok = fi % 2, fj % 2, fk % 2
    lo = coarse_id((fi - oi) // 2, (fj - oj) // 2, (fk - ok) // 2)
    hi = coarse_id((fi + oi) // 2, (fj + oj) // 2, (fk + ok) // 2)
    parent_edges = np.empty((fine.n_nodes, 2), dtype=np.int64)
    parent_edges[perm, 0] = lo
    parent_edges[perm, 1] = hi

    return Mesh(3, nodes, cells, facets, fine.facet_owner, mesh.h / 2,
                mesh.level + 1, "cube", 2 * n,
                parent_nnodes=mesh.n_nodes, parent_edges=parent_edges)


def classify_indices(mesh: Mesh, omega=None) -> IndexSets:
    """Partition nodes into interior and boundary; collect omega nodes.

    `omega` is a closed-region membership predicate mapping an (m, dim)
    coordinate array to a boolean array. Nodes satisfying the predicate
    must be interior (the constrained region must not touch the
    boundary).
    """
    bnodes = mesh.boundary_nodes
    mask = np.zeros(mesh.n_nodes, dtype=bool)
    mask[bnodes] = True
    interior = np.where(~mask)[0]
    if omega is None:
        om = np.empty(0, dtype=np.int64)
    else:
        inside = np.asarray(omega(mesh.nodes), dtype=bool)
        if np.any(inside & mask):
            raise MeshError("constrained region touches the boundary")
        om = np.where(inside & ~mask)[0]
    return IndexSets(interior=interior, boundary=bnodes, omega=om)


def _check_nested(coarse: Mesh, fine: Mesh):
    if fine.parent_edges is None or fine.parent_nnodes != coarse.n_nodes:
        raise MeshError("meshes are not a nested coarse/fine pair")
    if not np.array_equal(fine.nodes[:coarse.n_nodes], coarse.nodes):
        raise MeshError("fine mesh does not preserve coarse node coordinates")


def prolong(values: np.ndarray, coarse: Mesh, fine: Mesh,
            lower=None, upper=None) -> np.ndarray:
    """P1 interpolation of nodal values from a coarse mesh to a refinement.

    Accepts full nodal fields (length N) or boundary traces (length
    N_B); boundary traces are returned on the fine boundary nodes. With
    `lower`/`upper` given (constants or coordinate functions), the result
    is clipped into the bounds nodewise, the conservative substitute for
    a feasibility-preserving interpolate used when warm-starting
    constrained solves.
    """
    _check_nested(coarse, fine)
    values = np.asarray(values, dtype=float)
    pe = fine.parent_edges
    if values.shape[0] == coarse.n_nodes:
        out = 0.5 * (values[pe[:, 0]] + values[pe[:, 1]])
        coords = fine.nodes
    elif values.shape[0] == coarse.boundary_nodes.size:
        cb = coarse.boundary_nodes
        fb = fine.boundary_nodes
        full = np.full(coarse.n_nodes, np.nan)
        full[cb] = values
        out = 0.5 * (full[pe[fb, 0]] + full[pe[fb, 1]])
        if np.any(np.isnan(out)):
            raise MeshError("boundary prolongation hit an interior parent")
        coords = fine.nodes[fb]
    else:
        raise MeshError("value vector matches neither node nor boundary count")
    if lower is not None:
        lo = lower(coords) if callable(lower) else lower
        out = np.maximum(out, lo)
    if upper is not None:
        up = upper(coords) if callable(upper) else upper
        out = np.minimum(out, up)
    return out


def write_vtk(path, mesh: Mesh, point_data=None, title="dck field output"):
    """Write the mesh and nodal scalar fields as legacy ASCII VTK."""
    point_data = point_data or {}
    cell_type = 5 if mesh.dim == 2 else 10
    nloc = mesh.dim + 1
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write(f"{title}\n")
        f.write("ASCII\n")
        f.write("DATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {mesh.n_nodes} double\n")
        xyz = np.zeros((mesh.n_nodes, 3))
        xyz[:, :mesh.dim] = mesh.nodes
        for p in xyz:
            f.write(f"{p[0]:.16g} {p[1]:.16g} {p[2]:.16g}\n")
        f.write(f"CELLS {mesh.n_cells} {mesh.n_cells * (nloc + 1)}\n")
        for c in mesh.cells:
            f.write(" ".join([str(nloc)] + [str(v) for v in c]) + "\n")
        f.write(f"CELL_TYPES {mesh.n_cells}\n")
        for _ in range(mesh.n_cells):
            f.write(f"{cell_type}\n")
        if point_data:
            f.write(f"POINT_DATA {mesh.n_nodes}\n")
            for name, arr in point_data.items():
                arr = np.asarray(arr, dtype=float)
                if arr.shape[0] != mesh.n_nodes:
                    raise MeshError(f"point data '{name}' has wrong length")
                f.write(f"SCALARS {name} double 1\n")
                f.write("LOOKUP_TABLE default\n")
                for v in arr:
                    f.write(f"{v:.16g}\n")
