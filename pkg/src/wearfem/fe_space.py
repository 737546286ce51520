"""P1 vector displacement space with clamped DOFs removed, and the nodal
P1 wear space on the contact side."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh, MeshError

FEAS_TOL = 1e-10


class FeSpace:
    """Displacement DOF bookkeeping over a :class:`Mesh`.

    Free DOFs are numbered node by node (x then y) skipping clamped nodes.
    ``contact_nodes`` are the unclamped vertices of the contact side and
    ``contact_dofs[i]`` holds the (x, y) DOF indices of ``contact_nodes[i]``.
    """

    def __init__(self, mesh: Mesh, gap: float = 0.1):
        if gap <= 0:
            raise ValueError("gap must be positive")
        self.mesh = mesh
        self.gap = float(gap)
        nv = mesh.n_vertices
        clamped = np.zeros(nv, dtype=bool)
        clamped[mesh.dirichlet_nodes] = True
        dof_map = -np.ones((nv, 2), dtype=int)
        free_nodes = np.flatnonzero(~clamped)
        dof_map[free_nodes, 0] = 2 * np.arange(len(free_nodes))
        dof_map[free_nodes, 1] = 2 * np.arange(len(free_nodes)) + 1
        self.dof_map = dof_map
        self.dof_map.setflags(write=False)
        self.n_free = 2 * len(free_nodes)
        keep = dof_map[mesh.contact_nodes, 0] >= 0
        self.contact_nodes = mesh.contact_nodes[keep]
        self.contact_dofs = dof_map[self.contact_nodes]
        self.contact_dofs.setflags(write=False)
        self.normal = mesh.contact_normal()
        self.tangent = np.array([-self.normal[1], self.normal[0]])
        self.contact_weights = mesh.contact_weights()[keep]
        self._keep = keep
        self._strain = None

    @property
    def n_contact(self) -> int:
        return len(self.contact_nodes)

    # -- field conversions ---------------------------------------------------------

    def zero(self) -> np.ndarray:
        return np.zeros(self.n_free)

    def to_nodal(self, u: np.ndarray) -> np.ndarray:
        """(nv, 2) nodal displacements with zeros on clamped nodes."""
        out = np.zeros((self.mesh.n_vertices, 2))
        mask = self.dof_map[:, 0] >= 0
        out[mask] = np.asarray(u)[self.dof_map[mask]]
        return out

    def from_nodal(self, nodal: np.ndarray) -> np.ndarray:
        nodal = np.asarray(nodal, dtype=float)
        mask = self.dof_map[:, 0] >= 0
        u = np.empty(self.n_free)
        u[self.dof_map[mask]] = nodal[mask]
        return u

    def interpolate(self, func) -> np.ndarray:
        """Nodal interpolant of ``func(x, y) -> (ux, uy)``; clamped values are dropped."""
        x, y = self.mesh.vertices.T
        ux, uy = func(x, y)
        nodal = np.column_stack([np.broadcast_to(ux, x.shape), np.broadcast_to(uy, x.shape)])
        return self.from_nodal(nodal)

    def reduce(self, full: np.ndarray) -> np.ndarray:
        """Restrict a vector over all 2*nv node DOFs to the free DOFs."""
        return self.from_nodal(np.asarray(full).reshape(-1, 2))

    # -- contact traces ------------------------------------------------------------

    def contact_values(self, u: np.ndarray) -> np.ndarray:
        """(nc, 2) displacement at contact nodes."""
        return np.asarray(u)[self.contact_dofs]

    def normal_traces(self, u: np.ndarray) -> np.ndarray:
        return self.contact_values(u) @ self.normal

    def tangential_traces(self, u: np.ndarray) -> np.ndarray:
        vals = self.contact_values(u)
        return vals - np.outer(vals @ self.normal, self.normal)

    def normal_trace(self, u: np.ndarray, node: int) -> float:
        return float(self.normal_traces(u)[self._contact_index(node)])

    def tangential_trace(self, u: np.ndarray, node: int) -> np.ndarray:
        return self.tangential_traces(u)[self._contact_index(node)]

    def _contact_index(self, node: int) -> int:
        hits = np.flatnonzero(self.contact_nodes == node)
        if len(hits) == 0:
            raise MeshError(f"vertex {node} is not a contact node")
        return int(hits[0])

    def is_admissible(self, u: np.ndarray, tol: float = FEAS_TOL) -> tuple[bool, np.ndarray]:
        """Check u_nu <= g at contact nodes; returns (ok, violating contact nodes)."""
        un = self.normal_traces(u)
        bad = self.contact_nodes[un > self.gap + tol]
        return len(bad) == 0, bad

    # -- norms ---------------------------------------------------------------------

    @property
    def strain_operator(self) -> sp.csr_matrix:
        """Sparse map u -> sqrt(area)-weighted (e11, e22, sqrt2*e12) per element.

        ``||strain_operator @ u||`` is the V-norm of u.
        """
        if self._strain is None:
            self._strain = self._build_strain_operator()
        return self._strain

    def _build_strain_operator(self):
        mesh = self.mesh
        nt = mesh.n_triangles
        grads = mesh.gradients
        w = np.sqrt(mesh.areas)
        dofs = self.dof_map[mesh.triangles]  # (nt, 3, 2)
        rows, cols, vals = [], [], []
        r = np.arange(nt)
        s2 = np.sqrt(0.5)
        for k in range(3):
            dx, dy = dofs[:, k, 0], dofs[:, k, 1]
            gx, gy = grads[:, k, 0] * w, grads[:, k, 1] * w
            entries = [
                (3 * r, dx, gx),
                (3 * r + 1, dy, gy),
                (3 * r + 2, dx, s2 * gy),
                (3 * r + 2, dy, s2 * gx),
            ]
            for rr, cc, vv in entries:
                keep = cc >= 0
                rows.append(rr[keep])
                cols.append(cc[keep])
                vals.append(vv[keep])
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(3 * nt, self.n_free))

    def v_norm(self, u: np.ndarray) -> float:
        return float(np.linalg.norm(self.strain_operator @ np.asarray(u)))

    def v_norm_nodal(self, nodal: np.ndarray) -> float:
        """V-norm of a full nodal field, clamped values included."""
        nodal = np.asarray(nodal, dtype=float)
        grads = self.mesh.gradients
        du = np.einsum("tki,tkj->tij", nodal[self.mesh.triangles], grads)
        eps = 0.5 * (du + du.transpose(0, 2, 1))
        return float(np.sqrt(np.sum(self.mesh.areas * np.sum(eps * eps, axis=(1, 2)))))

    def v_gram(self) -> sp.csr_matrix:
        """Gram matrix of the V inner product (strain, strain)."""
        S = self.strain_operator
        return (S.T @ S).tocsr()

    def wear_nodes(self) -> np.ndarray:
        """x coordinate of every contact-side vertex, clamped corner included."""
        return self.mesh.vertices[self.mesh.contact_nodes, 0]

    def wear_with_corner(self, w: np.ndarray) -> np.ndarray:
        """Nodal wear along the full contact polyline (zero at clamped corners)."""
        out = np.zeros(len(self.mesh.contact_nodes))
        out[self._keep] = w
        return out

    def w_norm(self, w: np.ndarray) -> float:
        """L2 norm on the contact side of the piecewise-linear wear interpolant."""
        vals = self.wear_with_corner(np.asarray(w, dtype=float))
        pts = self.mesh.vertices[self.mesh.contact_nodes]
        lengths = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        a, b = vals[:-1], vals[1:]
        return float(np.sqrt(np.sum(lengths * (a * a + a * b + b * b) / 3.0)))


@dataclass
class DisplacementField:
    """A displacement over the free DOFs of a space."""

    space: FeSpace
    values: np.ndarray

    def nodal(self) -> np.ndarray:
        return self.space.to_nodal(self.values)


def prolong(u: np.ndarray, coarse: FeSpace, fine: FeSpace) -> np.ndarray:
    """Exact P1 prolongation of a displacement from a coarse to a nested fine mesh."""
    if fine.mesh.n % coarse.mesh.n != 0:
        raise MeshError(f"meshes with n={coarse.mesh.n} and n={fine.mesh.n} are not nested")
    nodal = coarse.to_nodal(u)
    fine_nodal = coarse.mesh.evaluate(nodal, fine.mesh.vertices)
    return fine.from_nodal(fine_nodal)


# descriptive alias
interpolate_between_levels = prolong


def prolong_wear(w: np.ndarray, coarse: FeSpace, fine: FeSpace) -> np.ndarray:
    """Piecewise-linear prolongation of nodal wear to a nested fine contact grid."""
    if fine.mesh.n % coarse.mesh.n != 0:
        raise MeshError(f"meshes with n={coarse.mesh.n} and n={fine.mesh.n} are not nested")
    xs = coarse.wear_nodes()
    vals = coarse.wear_with_corner(w)
    fx = fine.mesh.vertices[fine.contact_nodes, 0]
    return np.interp(fx, xs, vals)
