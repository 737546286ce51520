"""Structured triangular meshes of the unit square with tagged boundary parts.

The boundary is split into a clamped left side, a traction-loaded top and
right side, and a contact side along the bottom.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np


class BoundaryTag(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    CONTACT = "contact"


class MeshError(ValueError):
    """Raised when a mesh cannot be built or is queried inconsistently."""


@dataclass(frozen=True)
class BoundaryEdge:
    vertices: tuple[int, int]
    tag: BoundaryTag
    normal: tuple[float, float]


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming P1 triangulation.

    Attributes
    ----------
    vertices : (nv, 2) float array
    triangles : (nt, 3) int array, counter-clockwise
    boundary_edges : list of BoundaryEdge
    contact_nodes : all vertex indices on the closed contact side, in order
        along it (clamped corners included; the FE space drops those)
    dirichlet_nodes : vertex indices on the clamped side
    h_contact : length of a contact edge
    n : number of subdivisions per side (structured meshes only)
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: list[BoundaryEdge]
    contact_nodes: np.ndarray
    dirichlet_nodes: np.ndarray
    h_contact: float
    n: int
    _areas: np.ndarray = field(init=False, repr=False)
    _grads: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        areas, grads = _triangle_geometry(self.vertices, self.triangles)
        if np.any(areas <= 0.0):
            bad = int(np.argmin(areas))
            raise MeshError(f"triangle {bad} has non-positive area {areas[bad]:.3e}")
        for arr in (self.vertices, self.triangles, self.contact_nodes, self.dirichlet_nodes, areas, grads):
            arr.setflags(write=False)
        object.__setattr__(self, "_areas", areas)
        object.__setattr__(self, "_grads", grads)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def areas(self) -> np.ndarray:
        return self._areas

    @property
    def gradients(self) -> np.ndarray:
        """(nt, 3, 2) constant gradients of the barycentric basis functions."""
        return self._grads

    def element_geometry(self, index: int) -> tuple[float, np.ndarray]:
        if not 0 <= index < self.n_triangles:
            raise IndexError(f"triangle index {index} out of range")
        return float(self._areas[index]), self._grads[index].copy()

    def edges_with_tag(self, tag: BoundaryTag) -> list[BoundaryEdge]:
        return [e for e in self.boundary_edges if e.tag == tag]

    def contact_edges(self) -> list[BoundaryEdge]:
        """Contact edges ordered along the contact side."""
        edges = self.edges_with_tag(BoundaryTag.CONTACT)
        return sorted(edges, key=lambda e: self.vertices[list(e.vertices), 0].min())

    def contact_weights(self) -> np.ndarray:
        """Lumped quadrature weight of each contact node (half the adjacent edge lengths)."""
        weights = np.zeros(self.n_vertices)
        for e in self.contact_edges():
            a, b = e.vertices
            half = 0.5 * float(np.linalg.norm(self.vertices[a] - self.vertices[b]))
            weights[a] += half
            weights[b] += half
        return weights[self.contact_nodes]

    def outward_normal(self, edge: BoundaryEdge) -> np.ndarray:
        return np.array(edge.normal, dtype=float)

    def contact_normal(self) -> np.ndarray:
        """Normal of the (flat) contact side."""
        normals = {e.normal for e in self.edges_with_tag(BoundaryTag.CONTACT)}
        if len(normals) != 1:
            raise MeshError("contact boundary is not a single flat piece")
        return np.array(normals.pop(), dtype=float)

    def locate(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Triangle index and barycentric coordinates of points in a structured mesh."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = self.n
        scaled = pts * n
        i = np.clip(np.floor(scaled[:, 0]).astype(int), 0, n - 1)
        j = np.clip(np.floor(scaled[:, 1]).astype(int), 0, n - 1)
        lx = scaled[:, 0] - i
        ly = scaled[:, 1] - j
        upper = ly > lx
        tri = 2 * (j * n + i) + upper.astype(int)
        verts = self.vertices[self.triangles[tri]]
        bary = _barycentric(verts, pts)
        return tri, bary

    def evaluate(self, nodal: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Evaluate a P1 field given by nodal values at arbitrary points."""
        tri, bary = self.locate(points)
        vals = np.asarray(nodal)[self.triangles[tri]]
        if vals.ndim == 2:
            return np.einsum("pk,pk->p", bary, vals)
        return np.einsum("pk,pkc->pc", bary, vals)

    def write_vtk(self, path, displacement: np.ndarray | None = None, point_data: dict | None = None,
                  title: str = "wearfem mesh") -> Path:
        """Write a VTK legacy ASCII unstructured grid.

        When ``displacement`` (nv, 2) is given, points are moved by it and it is
        also stored as the point vector field ``displacement``.
        """
        path = Path(path)
        pts = np.asarray(self.vertices, dtype=float)
        if displacement is not None:
            displacement = np.asarray(displacement, dtype=float)
            pts = pts + displacement
        nt = self.n_triangles
        lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID",
                 f"POINTS {self.n_vertices} double"]
        lines += [f"{x:.17g} {y:.17g} 0" for x, y in pts]
        lines.append(f"CELLS {nt} {4 * nt}")
        lines += [f"3 {a} {b} {c}" for a, b, c in self.triangles]
        lines.append(f"CELL_TYPES {nt}")
        lines += ["5"] * nt
        fields = dict(point_data or {})
        if displacement is not None:
            fields = {"displacement": displacement, **fields}
        if fields:
            lines.append(f"POINT_DATA {self.n_vertices}")
            for name, data in fields.items():
                data = np.asarray(data, dtype=float)
                if data.ndim == 2:
                    lines.append(f"VECTORS {name} double")
                    lines += [f"{a:.17g} {b:.17g} 0" for a, b in data]
                else:
                    lines.append(f"SCALARS {name} double 1")
                    lines.append("LOOKUP_TABLE default")
                    lines += [f"{a:.17g}" for a in data]
        path.write_text("\n".join(lines) + "\n")
        return path


def _triangle_geometry(vertices, triangles):
    p = vertices[triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    areas = 0.5 * det
    with np.errstate(divide="ignore", invalid="ignore"):
        # grad(lambda_i) = rot90(opposite edge) / (2 area)
        grads = np.empty((len(triangles), 3, 2))
        for k in range(3):
            a = p[:, (k + 1) % 3]
            b = p[:, (k + 2) % 3]
            grads[:, k, 0] = (a[:, 1] - b[:, 1]) / det
            grads[:, k, 1] = (b[:, 0] - a[:, 0]) / det
    return areas, grads


def _barycentric(verts, pts):
    a, b, c = verts[:, 0], verts[:, 1], verts[:, 2]
    v0 = b - a
    v1 = c - a
    v2 = pts - a
    det = v0[:, 0] * v1[:, 1] - v0[:, 1] * v1[:, 0]
    l1 = (v2[:, 0] * v1[:, 1] - v2[:, 1] * v1[:, 0]) / det
    l2 = (v0[:, 0] * v2[:, 1] - v0[:, 1] * v2[:, 0]) / det
    return np.column_stack([1.0 - l1 - l2, l1, l2])


def unit_square_mesh(n: int) -> Mesh:
    """Uniform mesh of (0,1)^2 with n cells per side, each cut along its rising diagonal.

    Boundary parts: x = 0 clamped, y = 1 and x = 1 loaded, y = 0 contact.
    The corner (0, 0) is listed on the contact side but is clamped, so the FE
    space carries no contact or wear unknowns there.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise MeshError(f"subdivision count must be a positive integer, got {n!r}")
    n = int(n)
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (n + 1) + i

    tris = []
    for j in range(n):
        for i in range(n):
            v00, v10, v01, v11 = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    triangles = np.array(tris, dtype=int)

    edges = []
    for i in range(n):
        edges.append(BoundaryEdge((vid(i, 0), vid(i + 1, 0)), BoundaryTag.CONTACT, (0.0, -1.0)))
    for j in range(n):
        edges.append(BoundaryEdge((vid(n, j), vid(n, j + 1)), BoundaryTag.NEUMANN, (1.0, 0.0)))
    for i in range(n):
        edges.append(BoundaryEdge((vid(i + 1, n), vid(i, n)), BoundaryTag.NEUMANN, (0.0, 1.0)))
    for j in range(n):
        edges.append(BoundaryEdge((vid(0, j + 1), vid(0, j)), BoundaryTag.DIRICHLET, (-1.0, 0.0)))

    dirichlet = np.array([vid(0, j) for j in range(n + 1)], dtype=int)
    contact = np.array([vid(i, 0) for i in range(n + 1)], dtype=int)
    return Mesh(vertices, triangles, edges, contact, dirichlet, 1.0 / n, n)


def is_nested(coarse: Mesh, fine: Mesh) -> bool:
    """True when every coarse vertex is a fine vertex and the cells refine regularly."""
    return fine.n % coarse.n == 0
