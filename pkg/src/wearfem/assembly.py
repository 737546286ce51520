"""Stiffness matrix and load vector for isotropic linear elasticity on P1 triangles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp

from .fe_space import FeSpace
from .mesh import BoundaryTag, Mesh

Vector2 = Union[tuple, Callable[[float], tuple]]


@dataclass(frozen=True)
class MaterialParams:
    """Lame coefficients of the law sigma = 2*eta*eps + lam*tr(eps)*I."""

    lam: float
    eta: float

    def __post_init__(self):
        if not (self.lam > 0 and self.eta > 0):
            raise ValueError(f"Lame coefficients must be positive, got lam={self.lam}, eta={self.eta}")

    @property
    def m_F(self) -> float:
        return 2.0 * self.eta

    @property
    def L_F(self) -> float:
        return 2.0 * self.eta + 2.0 * self.lam

    def stress(self, strain: np.ndarray) -> np.ndarray:
        strain = np.asarray(strain, dtype=float)
        tr = np.trace(strain, axis1=-2, axis2=-1)[..., None, None]
        return 2.0 * self.eta * strain + self.lam * tr * np.eye(2)


def _at(value: Vector2, t: float) -> np.ndarray:
    v = value(t) if callable(value) else value
    return np.asarray(v, dtype=float)


@dataclass(frozen=True)
class LoadSpec:
    """Body force f0 and Neumann traction fN, constant 2-vectors or callables of t."""

    f0: Vector2 = (0.0, 0.0)
    fN: Vector2 = (0.0, 0.0)

    def body(self, t: float) -> np.ndarray:
        return _at(self.f0, t)

    def traction(self, t: float) -> np.ndarray:
        return _at(self.fN, t)


def element_strains(mesh: Mesh, nodal: np.ndarray) -> np.ndarray:
    """(nt, 2, 2) constant symmetric gradient of a nodal P1 field."""
    grads = mesh.gradients
    vals = np.asarray(nodal)[mesh.triangles]  # (nt, 3, 2)
    du = np.einsum("tki,tkj->tij", vals, grads)  # du_i/dx_j
    return 0.5 * (du + du.transpose(0, 2, 1))


def element_stress(space: FeSpace, u: np.ndarray, material: MaterialParams, triangle: int) -> np.ndarray:
    strain = element_strains(space.mesh, space.to_nodal(u))[triangle]
    return material.stress(strain)


def _element_matrices(mesh: Mesh, material: MaterialParams) -> np.ndarray:
    lam, eta = material.lam, material.eta
    D = np.array([[2 * eta + lam, lam, 0.0], [lam, 2 * eta + lam, 0.0], [0.0, 0.0, eta]])
    g = mesh.gradients
    nt = mesh.n_triangles
    B = np.zeros((nt, 3, 6))
    B[:, 0, 0::2] = g[:, :, 0]
    B[:, 1, 1::2] = g[:, :, 1]
    B[:, 2, 0::2] = g[:, :, 1]
    B[:, 2, 1::2] = g[:, :, 0]
    return mesh.areas[:, None, None] * np.einsum("tai,ab,tbj->tij", B, D, B)


def assemble_full_stiffness(mesh: Mesh, material: MaterialParams) -> sp.csr_matrix:
    """Stiffness over all 2*nv node DOFs, before clamped DOFs are removed."""
    Ke = _element_matrices(mesh, material)
    dofs = np.empty((mesh.n_triangles, 6), dtype=int)
    dofs[:, 0::2] = 2 * mesh.triangles
    dofs[:, 1::2] = 2 * mesh.triangles + 1
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    n = 2 * mesh.n_vertices
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    K.sum_duplicates()
    return K


def free_selector(space: FeSpace) -> np.ndarray:
    """Full-DOF index of every free DOF, in free-DOF order."""
    sel = np.empty(space.n_free, dtype=int)
    nodes = np.flatnonzero(space.dof_map[:, 0] >= 0)
    sel[space.dof_map[nodes, 0]] = 2 * nodes
    sel[space.dof_map[nodes, 1]] = 2 * nodes + 1
    return sel


def assemble_stiffness(mesh: Mesh, space: FeSpace, material: MaterialParams) -> sp.csr_matrix:
    """Stiffness restricted to free DOFs (clamped rows and columns eliminated)."""
    K = assemble_full_stiffness(mesh, material)
    sel = free_selector(space)
    K = K[sel][:, sel].tocsr()
    # exact structural symmetry
    return ((K + K.T) * 0.5).tocsr()


def assemble_full_load(mesh: Mesh, loads: LoadSpec, t: float) -> np.ndarray:
    """Consistent load over all node DOFs: centroid rule for f0, trapezoid rule for fN."""
    F = np.zeros((mesh.n_vertices, 2))
    f0 = loads.body(t)
    share = (mesh.areas / 3.0)[:, None] * f0[None, :]
    for k in range(3):
        np.add.at(F, mesh.triangles[:, k], share)
    fN = loads.traction(t)
    if np.any(fN != 0.0):
        F += edge_traction_load(mesh, mesh.edges_with_tag(BoundaryTag.NEUMANN), fN)
    return F.ravel()


def edge_traction_load(mesh: Mesh, edges, traction) -> np.ndarray:
    """(nv, 2) trapezoid-rule load of a traction on boundary edges.

    ``traction`` is a 2-vector or a callable ``edge -> 2-vector``.
    """
    F = np.zeros((mesh.n_vertices, 2))
    for e in edges:
        a, b = e.vertices
        tr = np.asarray(traction(e) if callable(traction) else traction, dtype=float)
        half = 0.5 * float(np.linalg.norm(mesh.vertices[a] - mesh.vertices[b]))
        F[a] += half * tr
        F[b] += half * tr
    return F


def assemble_load(mesh: Mesh, space: FeSpace, loads: LoadSpec, t: float) -> np.ndarray:
    return space.reduce(assemble_full_load(mesh, loads, t))
