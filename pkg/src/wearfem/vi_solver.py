"""Per-time-step solver for the discrete contact inequality.

Outer loop: fixed point on the friction pressure xi = p(u_nu - w).
Inner loop: with xi frozen, the step problem is the minimisation of

    J(v) = 1/2 v.K.v - f.v + sum ell*P(v_nu - w) + sum ell*mu*xi*n*.v_tau

subject to v_nu <= g at contact nodes. Interior DOFs are eliminated by static
condensation (K is fixed for a run), and the condensed problem in local
(tangential, normal) contact coordinates is solved by a projected Newton
method with an active set on the bounds.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .contact_law import ComplianceLaw, FoundationMotion, friction_direction, phi_eval
from .fe_space import FEAS_TOL, FeSpace

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverSettings:
    fp_tol: float = 1e-10
    fp_max: int = 200
    newton_tol: float = 1e-12
    newton_max: int = 100

    def __post_init__(self):
        if min(self.fp_tol, self.newton_tol) <= 0 or min(self.fp_max, self.newton_max) < 1:
            raise ValueError("solver tolerances must be positive and iteration caps at least 1")


@dataclass
class StepReport:
    outer_iterations: int
    inner_iterations: int
    increment: float
    active_nodes: np.ndarray
    kkt_residual: float
    multipliers: np.ndarray = field(repr=False)
    increments: list[float] = field(default_factory=list, repr=False)


class SolverError(RuntimeError):
    """Base class for step-solver failures."""


class FixedPointNotConverged(SolverError):
    def __init__(self, increment: float, iterations: int):
        super().__init__(f"friction fixed point did not converge in {iterations} iterations "
                         f"(last increment {increment:.3e})")
        self.increment = increment
        self.iterations = iterations


class NewtonFailure(SolverError):
    def __init__(self, residual: float, iterations: int, reason: str = "iteration cap reached"):
        super().__init__(f"inner Newton failed after {iterations} iterations ({reason}); "
                         f"KKT residual {residual:.3e}")
        self.residual = residual
        self.iterations = iterations


class CondensedContactSolver:
    """Step solver for one space, stiffness and contact data.

    The expensive part (factorising the interior block and forming the Schur
    complement on contact DOFs) happens once in the constructor.
    """

    def __init__(self, space: FeSpace, K: sp.spmatrix, law: ComplianceLaw, motion: FoundationMotion):
        self.space = space
        self.K = K.tocsr()
        self.law = law
        self.motion = motion
        nc = space.n_contact
        self.nc = nc
        cdofs = space.contact_dofs  # (nc, 2)
        is_c = np.zeros(space.n_free, dtype=bool)
        is_c[cdofs.ravel()] = True
        self.idof = np.flatnonzero(~is_c)
        self.cdof = cdofs.ravel()
        Kcsc = self.K.tocsc()
        Kii = Kcsc[self.idof][:, self.idof].tocsc()
        Kic = Kcsc[self.idof][:, self.cdof].toarray()
        Kcc = Kcsc[self.cdof][:, self.cdof].toarray()
        self._lu = spla.splu(Kii)
        self.X = self._lu.solve(Kic) if len(self.idof) else np.zeros((0, 2 * nc))
        S = Kcc - Kic.T @ self.X
        # local coordinates: z = [s_0..s_{nc-1}, n_0..n_{nc-1}]
        Q = np.zeros((2 * nc, 2 * nc))
        for k in range(nc):
            Q[k, 2 * k:2 * k + 2] = space.tangent
            Q[nc + k, 2 * k:2 * k + 2] = space.normal
        self.Q = Q
        A = Q @ S @ Q.T
        self.A = 0.5 * (A + A.T)
        self.ell = space.contact_weights
        self.mu = motion.mu_nodes(nc)

    # -- condensation helpers ---------------------------------------------------

    def condense_load(self, load: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (b, y): condensed load in local coordinates and K_ii^{-1} f_i."""
        fi = load[self.idof]
        y = self._lu.solve(fi) if len(self.idof) else fi
        fc = load[self.cdof] - self.X.T @ fi
        return self.Q @ fc, y

    def expand(self, z: np.ndarray, y: np.ndarray) -> np.ndarray:
        uc = self.Q.T @ z
        u = np.empty(self.space.n_free)
        u[self.cdof] = uc
        u[self.idof] = y - self.X @ uc
        return u

    def local(self, u: np.ndarray) -> np.ndarray:
        return self.Q @ u[self.cdof]

    # -- inner problem -------------------------------------------------------------

    def _pieces(self, w, xi, t):
        nc = self.nc
        lin = np.zeros(2 * nc)
        lin[:nc] = self.ell * self.mu * xi * friction_direction(self.space, self.motion, t)
        return lin

    def energy(self, z, b, w, lin):
        nc = self.nc
        return 0.5 * z @ (self.A @ z) - b @ z + lin @ z + float(np.sum(self.ell * self.law.potential(z[nc:] - w)))

    def gradient(self, z, b, w, lin):
        nc = self.nc
        G = self.A @ z - b + lin
        G[nc:] += self.ell * self.law.p(z[nc:] - w)
        return G

    def kkt(self, z, G):
        nc = self.nc
        g = self.space.gap
        r = G.copy()
        r[nc:] = z[nc:] - np.minimum(z[nc:] - G[nc:], g)
        return float(np.max(np.abs(r))) if len(r) else 0.0

    def inner_solve(self, z0, b, w, xi, t, settings: SolverSettings):
        """Projected Newton on the condensed bound-constrained problem."""
        nc = self.nc
        g = self.space.gap
        lin = self._pieces(w, xi, t)
        z = z0.copy()
        z[nc:] = np.minimum(z[nc:], g)
        G = self.gradient(z, b, w, lin)
        res = self.kkt(z, G)
        scale = max(1.0, float(np.max(np.abs(b))) if len(b) else 1.0)
        tol = settings.newton_tol * scale
        it = 0
        while res > tol:
            if it >= settings.newton_max:
                raise NewtonFailure(res, it)
            it += 1
            eps = min(1e-3 * g, res)
            bound = np.zeros(2 * nc, dtype=bool)
            bound[nc:] = (z[nc:] >= g - eps) & (G[nc:] < 0.0)
            free = ~bound
            H = self.A.copy()
            H[np.arange(nc, 2 * nc), np.arange(nc, 2 * nc)] += self.ell * self.law.slope(z[nc:] - w)
            d = np.zeros(2 * nc)
            if free.any():
                d[free] = -la.solve(H[np.ix_(free, free)], G[free], assume_a="pos")
            d[bound] = -G[bound] / np.diag(H)[bound]
            J0 = self.energy(z, b, w, lin)
            step = 1.0
            while True:
                zt = z + step * d
                zt[nc:] = np.minimum(zt[nc:], g)
                Gt = self.gradient(zt, b, w, lin)
                rt = self.kkt(zt, Gt)
                decrease = J0 - self.energy(zt, b, w, lin)
                predicted = -step * (G[free] @ d[free]) + G[bound] @ (z - zt)[bound]
                if rt <= tol or decrease >= 1e-4 * predicted:
                    break
                step *= 0.5
                if step < 1e-14:
                    raise NewtonFailure(res, it, "line search stalled")
            z, G, res = zt, Gt, rt
        return z, G, res, it

    # -- outer fixed point ---------------------------------------------------------

    def solve(self, load: np.ndarray, w: np.ndarray, t: float, settings: SolverSettings = SolverSettings(),
              u0: np.ndarray | None = None) -> tuple[np.ndarray, StepReport]:
        nc = self.nc
        w = np.asarray(w, dtype=float)
        b, y = self.condense_load(load)
        u = np.zeros(self.space.n_free) if u0 is None else np.array(u0, dtype=float)
        z = self.local(u)
        inner_total = 0
        incs = []
        for outer in range(1, settings.fp_max + 1):
            xi = self.law.p(z[nc:] - w)
            z, G, res, it = self.inner_solve(z, b, w, xi, t, settings)
            inner_total += it
            u_new = self.expand(z, y)
            inc = self.space.v_norm(u_new - u)
            incs.append(inc)
            u = u_new
            if inc <= settings.fp_tol:
                break
        else:
            raise FixedPointNotConverged(incs[-1], settings.fp_max)
        g = self.space.gap
        multipliers = np.maximum(-G[nc:], 0.0)
        active = self.space.contact_nodes[z[nc:] >= g - 1e-8] if nc else np.array([], dtype=int)
        return u, StepReport(outer, inner_total, inc, active, res, multipliers, incs)


def solve_vi(solver: CondensedContactSolver, load: np.ndarray, w: np.ndarray, t: float,
             settings: SolverSettings = SolverSettings(), u0: np.ndarray | None = None):
    return solver.solve(load, w, t, settings, u0)


def vi_residual(space: FeSpace, K: sp.spmatrix, law: ComplianceLaw, motion: FoundationMotion,
                t: float, w: np.ndarray, load: np.ndarray, u: np.ndarray, trials) -> float:
    """Smallest value over trial fields v of

        <Ku, v-u> + phi(t,w,u,v) - phi(t,w,u,u) - <f, v-u>

    which is non-negative for every admissible v exactly when u solves the step
    inequality.
    """
    Ku_f = K @ u - load
    phi_uu = phi_eval(space, law, motion, t, w, u, u)
    best = np.inf
    for v in trials:
        ok, _ = space.is_admissible(v, FEAS_TOL)
        if not ok:
            raise ValueError("trial field is not admissible")
        val = Ku_f @ (v - u) + phi_eval(space, law, motion, t, w, u, v) - phi_uu
        best = min(best, float(val))
    return best
