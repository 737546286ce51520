"""Normal compliance, friction and wear data on the contact side.

All contact integrals use the lumped (nodal trapezoid) rule, so each term is
a weighted sum over contact nodes with weights ``space.contact_weights``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import MaterialParams
from .fe_space import FeSpace
from .mesh import Mesh

log = logging.getLogger(__name__)


class InvalidDataError(ValueError):
    pass


@dataclass(frozen=True)
class ComplianceLaw:
    """p(r) = c_p * max(r, 0)."""

    c_p: float = 100.0

    def __post_init__(self):
        if self.c_p < 0:
            raise InvalidDataError("compliance stiffness must be non-negative")

    @property
    def L_p(self) -> float:
        return self.c_p

    def p(self, r):
        return self.c_p * np.maximum(r, 0.0)

    def potential(self, r):
        r = np.maximum(r, 0.0)
        return 0.5 * self.c_p * r * r

    def slope(self, r):
        # derivative of p; taken as 0 at the kink
        return np.where(np.asarray(r) > 0.0, self.c_p, 0.0)


def p_eval(law: ComplianceLaw, r):
    return law.p(r)


def p_potential(law: ComplianceLaw, r):
    return law.potential(r)


Field = Union[float, np.ndarray]


@dataclass(frozen=True)
class FoundationMotion:
    """Foundation velocity with friction and wear coefficients on the contact side.

    ``mu`` and ``kappa`` are scalars or per-contact-node arrays. ``v_star`` is a
    constant 2-vector or a callable of t.
    """

    v_star: Union[tuple, Callable[[float], tuple]] = (1.0, 0.0)
    mu: Field = 0.0
    kappa: Field = 0.0
    v0: float = 1e-12

    def __post_init__(self):
        if np.any(np.asarray(self.mu) < 0) or np.any(np.asarray(self.kappa) < 0):
            raise InvalidDataError("friction and wear coefficients must be non-negative")

    def velocity(self, t: float) -> np.ndarray:
        v = self.v_star(t) if callable(self.v_star) else self.v_star
        v = np.asarray(v, dtype=float)
        speed = float(np.linalg.norm(v))
        if speed < self.v0 or not np.isfinite(speed):
            raise InvalidDataError(f"foundation speed {speed:g} at t={t:g} is below v0={self.v0:g}")
        return v

    def n_star(self, t: float) -> np.ndarray:
        v = self.velocity(t)
        return -v / np.linalg.norm(v)

    def alpha(self, t: float, n_nodes: int | None = None) -> np.ndarray:
        """kappa * |v*(t)| per contact node (scalar broadcast when n_nodes given)."""
        a = np.asarray(self.kappa, dtype=float) * float(np.linalg.norm(self.velocity(t)))
        if n_nodes is not None:
            a = np.broadcast_to(a, (n_nodes,)).copy()
        return a

    def mu_nodes(self, n_nodes: int) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.mu, dtype=float), (n_nodes,)).copy()

    def mu_max(self) -> float:
        return float(np.max(self.mu))


def n_star(motion: FoundationMotion, t: float) -> np.ndarray:
    return motion.n_star(t)


def alpha(motion: FoundationMotion, t: float, node: int | None = None):
    a = motion.alpha(t)
    if node is None or np.ndim(a) == 0:
        return float(a) if np.ndim(a) == 0 else a
    return float(a[node])


def friction_direction(space: FeSpace, motion: FoundationMotion, t: float) -> np.ndarray:
    """n*(t) . tau on each contact node, tau the contact tangent."""
    return np.full(space.n_contact, float(motion.n_star(t) @ space.tangent))


def phi_eval(space: FeSpace, law: ComplianceLaw, motion: FoundationMotion, t: float,
             w: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    """Lumped value of int p(u_nu - w) [v_nu + mu n*.v_tau] over the contact side."""
    ell = space.contact_weights
    pressure = law.p(space.normal_traces(u) - w)
    vn = space.normal_traces(v)
    vt = space.tangential_traces(v) @ motion.n_star(t)
    mu = motion.mu_nodes(space.n_contact)
    return float(np.sum(ell * pressure * (vn + mu * vt)))


def trace_operator(space: FeSpace) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Sparse maps u -> normal traces and u -> tangential coordinates at contact nodes."""
    nc = space.n_contact
    rows = np.repeat(np.arange(nc), 2)
    cols = space.contact_dofs.ravel()
    Bn = sp.csr_matrix((np.tile(space.normal, nc), (rows, cols)), shape=(nc, space.n_free))
    Bt = sp.csr_matrix((np.tile(space.tangent, nc), (rows, cols)), shape=(nc, space.n_free))
    return Bn, Bt


def contact_gradient_and_hessian(space: FeSpace, law: ComplianceLaw, motion: FoundationMotion,
                                 t: float, w: np.ndarray, u: np.ndarray,
                                 xi: np.ndarray | None = None):
    """Gradient and Hessian of sum ell*P(u_nu - w) + sum ell*mu*xi*n*.u_tau.

    ``xi`` is the frozen normal pressure in the friction term; when omitted it
    is taken from ``u`` itself.
    """
    ell = space.contact_weights
    Bn, Bt = trace_operator(space)
    r = Bn @ u - w
    if xi is None:
        xi = law.p(r)
    mu = motion.mu_nodes(space.n_contact)
    ft = friction_direction(space, motion, t)
    grad = Bn.T @ (ell * law.p(r)) + Bt.T @ (ell * mu * xi * ft)
    H = (Bn.T @ sp.diags(ell * law.slope(r)) @ Bn).tocsr()
    return grad, H


def contact_energy(space: FeSpace, law: ComplianceLaw, motion: FoundationMotion, t: float,
                   w: np.ndarray, u: np.ndarray, xi: np.ndarray) -> float:
    ell = space.contact_weights
    Bn, Bt = trace_operator(space)
    mu = motion.mu_nodes(space.n_contact)
    ft = friction_direction(space, motion, t)
    return float(np.sum(ell * law.potential(Bn @ u - w)) + np.sum(ell * mu * xi * ft * (Bt @ u)))


@dataclass
class SmallnessReport:
    c0: float
    lhs: float
    m_F: float
    satisfied: bool
    iterations: int

    def lines(self) -> list[str]:
        return [
            f"c0 = {self.c0:.6g}",
            f"c0^2 * L_p * |mu|_inf = {self.lhs:.6g}",
            f"m_F = {self.m_F:.6g}",
            f"satisfied = {self.satisfied}",
        ]


class EigenNotConverged(RuntimeError):
    pass


def contact_trace_mass(space: FeSpace) -> sp.csr_matrix:
    """Lumped L2(contact) mass for the full vector trace."""
    ell = space.contact_weights
    nc = space.n_contact
    cols = space.contact_dofs.ravel()
    return sp.csr_matrix((np.repeat(ell, 2), (cols, cols)), shape=(space.n_free, space.n_free)).tocsr() \
        if nc else sp.csr_matrix((space.n_free, space.n_free))


def trace_constant(space: FeSpace, tol: float = 1e-12, max_iter: int = 10_000) -> tuple[float, int]:
    """Discrete trace constant c0 = sup |v|_{L2(contact)} / |v|_V by power iteration."""
    M = contact_trace_mass(space)
    G = space.v_gram().tocsc()
    solve = spla.factorized(G)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(space.n_free)
    lam = 0.0
    for it in range(1, max_iter + 1):
        y = solve(M @ x)
        # Rayleigh quotient in the G inner product
        Gy = G @ y
        lam_new = float(y @ (M @ y)) / float(y @ Gy)
        x = y / np.sqrt(float(y @ Gy))
        if abs(lam_new - lam) <= tol * abs(lam_new):
            return float(np.sqrt(lam_new)), it
        lam = lam_new
    raise EigenNotConverged(f"trace-constant power iteration did not converge in {max_iter} iterations")


def check_smallness(material: MaterialParams, law: ComplianceLaw, mu, mesh: Mesh,
                    space: FeSpace) -> SmallnessReport:
    """Compare c0^2 * L_p * max(mu) against m_F. Failure is logged, not raised."""
    c0, iters = trace_constant(space)
    mu_max = float(np.max(mu))
    lhs = c0 * c0 * law.L_p * mu_max
    ok = lhs < material.m_F
    if not ok:
        log.warning("smallness condition fails on n=%d: %.4g >= m_F=%.4g", mesh.n, lhs, material.m_F)
    return SmallnessReport(c0=c0, lhs=lhs, m_F=material.m_F, satisfied=ok, iterations=iters)
