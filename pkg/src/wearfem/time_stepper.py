"""Time marching: a contact solve at every time node, with wear accumulated
explicitly from the previous node."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assembly import LoadSpec, MaterialParams, assemble_load, assemble_stiffness
from .contact_law import ComplianceLaw, FoundationMotion
from .fe_space import FeSpace
from .mesh import Mesh
from .vi_solver import CondensedContactSolver, SolverError, SolverSettings, StepReport

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProblemData:
    material: MaterialParams
    law: ComplianceLaw
    motion: FoundationMotion
    loads: LoadSpec
    gap: float = 0.1


class TimePartition:
    """Nodes 0 = t_0 < t_1 < ... < t_N = T."""

    def __init__(self, nodes):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 2:
            raise ValueError("a partition needs at least two nodes")
        if nodes[0] != 0.0:
            raise ValueError("partition must start at t = 0")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("partition nodes must be strictly increasing")
        self.nodes = nodes
        self.nodes.setflags(write=False)

    @classmethod
    def uniform(cls, T: float, N: int) -> "TimePartition":
        if N < 1:
            raise ValueError("number of steps must be at least 1")
        return cls(np.arange(N + 1) * (T / N))

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def k(self) -> float:
        return float(self.steps.max())

    @property
    def N(self) -> int:
        return len(self.nodes) - 1

    @property
    def T(self) -> float:
        return float(self.nodes[-1])


@dataclass
class Trajectory:
    space: FeSpace
    times: np.ndarray
    displacements: list = field(default_factory=list)
    wear: list = field(default_factory=list)
    reports: list = field(default_factory=list)

    @property
    def u_final(self) -> np.ndarray:
        return self.displacements[-1]

    @property
    def w_final(self) -> np.ndarray:
        return self.wear[-1]


class StepFailure(SolverError):
    def __init__(self, step: int, t: float, cause: Exception):
        super().__init__(f"time step {step} (t = {t:g}) failed: {cause}")
        self.step = step
        self.t = t
        self.cause = cause


def wear_increment(law: ComplianceLaw, k: float, alpha: np.ndarray, un: np.ndarray, w: np.ndarray) -> np.ndarray:
    return k * alpha * law.p(un - w)


def wear_update(law: ComplianceLaw, history) -> np.ndarray:
    """Wear at the next node from the full history of (k_j, alpha_j, u_nu_j, w_j).

    This is the explicit sum; :func:`run` uses the equivalent running update.
    """
    total = None
    for k, a, un, w in history:
        term = wear_increment(law, k, np.asarray(a), np.asarray(un), np.asarray(w))
        total = term if total is None else total + term
    if total is None:
        raise ValueError("wear_update needs at least one history entry")
    return total


class Simulation:
    """Assembled problem on one mesh, ready to march over any partition."""

    def __init__(self, mesh: Mesh, data: ProblemData):
        self.mesh = mesh
        self.data = data
        self.space = FeSpace(mesh, data.gap)
        self.K = assemble_stiffness(mesh, self.space, data.material)
        self.solver = CondensedContactSolver(self.space, self.K, data.law, data.motion)

    def load(self, t: float) -> np.ndarray:
        return assemble_load(self.mesh, self.space, self.data.loads, t)

    def run(self, partition: TimePartition, settings: SolverSettings = SolverSettings()) -> Trajectory:
        space = self.space
        law = self.data.law
        motion = self.data.motion
        traj = Trajectory(space, partition.nodes.copy())
        w = np.zeros(space.n_contact)
        u = None
        for n, t in enumerate(partition.nodes):
            if n > 0:
                k = partition.steps[n - 1]
                t_prev = partition.nodes[n - 1]
                un_prev = space.normal_traces(u)
                w = w + wear_increment(law, k, motion.alpha(t_prev, space.n_contact), un_prev, w)
            try:
                u, report = self.solver.solve(self.load(t), w, t, settings, u0=u)
            except SolverError as exc:
                raise StepFailure(n, float(t), exc) from exc
            traj.displacements.append(u)
            traj.wear.append(w)
            traj.reports.append(report)
            log.debug("step %d t=%.4g outer=%d inner=%d active=%d", n, t, report.outer_iterations,
                      report.inner_iterations, len(report.active_nodes))
        return traj


def run(mesh: Mesh, data: ProblemData, partition: TimePartition,
        settings: SolverSettings = SolverSettings()) -> Trajectory:
    return Simulation(mesh, data).run(partition, settings)


CHECKPOINT_HEADER = "step t node x y ux uy wear"


def save_trajectory(traj: Trajectory, path) -> Path:
    """Plain-text dump: one header line, then one row per (step, vertex).

    Columns: step index, t_n, vertex index, x, y, ux, uy, wear. Wear is ``nan``
    on vertices that carry no wear value.
    """
    path = Path(path)
    space = traj.space
    mesh = space.mesh
    nv = mesh.n_vertices
    idx = np.arange(nv)
    rows = []
    for n, (t, u, w) in enumerate(zip(traj.times, traj.displacements, traj.wear)):
        nodal = space.to_nodal(u)
        wear = np.full(nv, np.nan)
        wear[space.contact_nodes] = w
        rows.append(np.column_stack([np.full(nv, n), np.full(nv, t), idx, mesh.vertices, nodal, wear]))
    np.savetxt(path, np.vstack(rows), fmt=["%d", "%.17g", "%d"] + ["%.17g"] * 5,
               header=CHECKPOINT_HEADER, comments="")
    return path


def load_trajectory(path, space: FeSpace) -> Trajectory:
    data = np.loadtxt(path, skiprows=1, ndmin=2)
    mesh = space.mesh
    nv = mesh.n_vertices
    steps = int(data[:, 0].max()) + 1
    traj = Trajectory(space, np.empty(steps))
    for n in range(steps):
        block = data[n * nv:(n + 1) * nv]
        traj.times[n] = block[0, 1]
        traj.displacements.append(space.from_nodal(block[:, 5:7]))
        traj.wear.append(block[space.contact_nodes, 7].copy())
    return traj
