"""Preset scenarios, the nested-mesh convergence study and result export."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .assembly import LoadSpec, MaterialParams
from .contact_law import ComplianceLaw, FoundationMotion
from .fe_space import prolong, prolong_wear
from .mesh import unit_square_mesh
from .time_stepper import ProblemData, Simulation, StepFailure, TimePartition, Trajectory, save_trajectory
from .vi_solver import SolverSettings

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Scenario:
    name: str
    lam: float = 4.0
    eta: float = 4.0
    c_p: float = 100.0
    gap: float = 0.1
    f0: tuple = (0.0, -2.0)
    fN: tuple = (0.0, 0.0)
    mu: float = 0.3
    kappa: float = 0.04
    v_star: tuple = (1.0, 0.0)
    T: float = 1.0
    n: int = 16
    N: int = 16

    def problem(self) -> ProblemData:
        return ProblemData(
            material=MaterialParams(self.lam, self.eta),
            law=ComplianceLaw(self.c_p),
            motion=FoundationMotion(tuple(self.v_star), mu=self.mu, kappa=self.kappa),
            loads=LoadSpec(tuple(self.f0), tuple(self.fN)),
            gap=self.gap,
        )

    def partition(self) -> TimePartition:
        return TimePartition.uniform(self.T, self.N)


PRESETS = {
    "fig1": Scenario("fig1", mu=0.3, kappa=0.04, v_star=(1.0, 0.0)),
    "fig2": Scenario("fig2", mu=0.3, kappa=0.08, v_star=(1.0, 0.0)),
    "fig3": Scenario("fig3", mu=1.0, kappa=0.04, v_star=(1.0, 0.0)),
    "fig4": Scenario("fig4", mu=0.3, kappa=0.02, v_star=(-1.0, 0.0)),
    "table1": Scenario("table1", f0=(-0.5, -2.0), fN=(-0.5, -0.5), mu=1.0, kappa=0.05,
                       v_star=(1.0, 0.0), n=64, N=64),
}


def preset(name: str) -> Scenario:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {sorted(PRESETS)}") from None


# -- config overrides -----------------------------------------------------------------

class ConfigError(ValueError):
    pass


def _parse_value(key: str, raw: str, current):
    raw = raw.strip()
    try:
        if isinstance(current, tuple):
            parts = [p for p in raw.strip("()[] ").replace(",", " ").split()]
            if len(parts) != len(current):
                raise ValueError(f"expected {len(current)} components")
            return tuple(float(p) for p in parts)
        if isinstance(current, bool):
            return raw.lower() in ("1", "true", "yes")
        if isinstance(current, int):
            return int(raw)
        if isinstance(current, float):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from None


def parse_config(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def apply_config(scenario: Scenario, overrides: dict[str, str]) -> Scenario:
    known = {f.name for f in fields(Scenario)}
    changes = {}
    for key, raw in overrides.items():
        if key not in known:
            raise ConfigError(f"unknown scenario field {key!r}")
        changes[key] = _parse_value(key, raw, getattr(scenario, key))
    return replace(scenario, **changes)


def load_config(scenario: Scenario, path) -> Scenario:
    return apply_config(scenario, parse_config(Path(path).read_text()))


# -- simulation and export --------------------------------------------------------------

def simulate(scenario: Scenario, settings: SolverSettings = SolverSettings()) -> tuple[Simulation, Trajectory]:
    sim = Simulation(unit_square_mesh(scenario.n), scenario.problem())
    return sim, sim.run(scenario.partition(), settings)


def wear_profile(traj: Trajectory) -> np.ndarray:
    """(x, wear) along the contact side at the final time, clamped corner included."""
    space = traj.space
    return np.column_stack([space.wear_nodes(), space.wear_with_corner(traj.w_final)])


def export_deformed(traj: Trajectory, scenario: Scenario, path) -> tuple[Path, Path]:
    """Write ``<name>_deformed.vtk`` and ``<name>_wear.txt`` into directory ``path``."""
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        space = traj.space
        nodal = space.to_nodal(traj.u_final)
        vtk = space.mesh.write_vtk(out / f"{scenario.name}_deformed.vtk", displacement=nodal,
                                   title=f"{scenario.name} deformed configuration at t = {traj.times[-1]:g}")
        prof = out / f"{scenario.name}_wear.txt"
        np.savetxt(prof, wear_profile(traj), fmt="%.17g", header="x wear", comments="")
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc
    return vtk, prof


# -- convergence study ---------------------------------------------------------------

@dataclass
class ConvergenceRow:
    h_plus_k: float
    err_u_rel: float
    order_u: Optional[float]
    err_w_rel: float
    order_w: Optional[float]


@dataclass
class ConvergenceStudy:
    rows: list[ConvergenceRow]
    levels: list[int]
    ref_level: int
    ref_u_norm: float
    ref_w_norm: float
    max_err_u_rel: list[float] = field(default_factory=list)
    max_err_w_rel: list[float] = field(default_factory=list)


class StudyFailure(RuntimeError):
    def __init__(self, level: int, cause: Exception):
        super().__init__(f"convergence study failed at level n={level}: {cause}")
        self.level = level
        self.cause = cause


def _run_level(scenario: Scenario, n: int, settings: SolverSettings):
    lvl = replace(scenario, n=n, N=n)
    try:
        return simulate(lvl, settings)
    except StepFailure as exc:
        raise StudyFailure(n, exc) from exc


def level_errors(ref: tuple[Simulation, Trajectory], run: tuple[Simulation, Trajectory]):
    """Final-time and max-over-shared-nodes errors of ``run`` against ``ref``."""
    rsim, rtr = ref
    sim, tr = run
    rs = rsim.space
    nref = len(rtr.times) - 1
    stride = nref // (len(tr.times) - 1)
    eu = [rs.v_norm(rtr.displacements[j * stride] - prolong(u, sim.space, rs)) for j, u in enumerate(tr.displacements)]
    ew = [rs.w_norm(rtr.wear[j * stride] - prolong_wear(w, sim.space, rs)) for j, w in enumerate(tr.wear)]
    return eu[-1], ew[-1], max(eu), max(ew)


def convergence_study(scenario: Scenario | None = None, levels=(2, 4, 8, 16, 32), ref_level: int = 64,
                      settings: SolverSettings = SolverSettings()) -> ConvergenceStudy:
    """Errors against a fine run with h = k = 1/ref_level, measured at t = T.

    Level n uses n contact edges and n uniform time steps. Coarse solutions are
    prolonged exactly to the reference mesh before taking norms.
    """
    scenario = scenario or preset("table1")
    levels = list(levels)
    for n in levels:
        if ref_level % n or n >= ref_level:
            raise ValueError(f"level {n} is not nested in reference level {ref_level}")
    ref = _run_level(scenario, ref_level, settings)
    rs = ref[0].space
    unorm = rs.v_norm(ref[1].u_final)
    wnorm = rs.w_norm(ref[1].w_final)
    rows, mu, mw = [], [], []
    prev = None
    for n in levels:
        run = _run_level(scenario, n, settings)
        eu, ew, eu_max, ew_max = level_errors(ref, run)
        eu, ew = eu / unorm, ew / wnorm
        mu.append(eu_max / unorm)
        mw.append(ew_max / wnorm)
        ou = math.log2(prev[0] / eu) if prev else None
        ow = math.log2(prev[1] / ew) if prev else None
        rows.append(ConvergenceRow(scenario.T / n + 1.0 / n, eu, ou, ew, ow))
        log.info("level n=%d: e_u=%.4e e_w=%.4e", n, eu, ew)
        prev = (eu, ew)
    return ConvergenceStudy(rows, levels, ref_level, unorm, wnorm, mu, mw)


CSV_COLUMNS = ["h_plus_k", "err_u_rel", "order_u", "err_w_rel", "order_w"]


def _fmt(x):
    return "" if x is None else repr(float(x))


def write_csv(rows: list[ConvergenceRow], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return path


def read_csv(path) -> list[ConvergenceRow]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        return [ConvergenceRow(**{c: (float(rec[c]) if rec[c] != "" else None) for c in CSV_COLUMNS})
                for rec in reader]


def write_loglog(study: ConvergenceStudy, path) -> Path:
    """Whitespace table of (h+k, relative errors) for log-log plots."""
    data = np.array([[r.h_plus_k, r.err_u_rel, r.err_w_rel] for r in study.rows])
    np.savetxt(path, data, fmt="%.17g", header="h_plus_k err_u_rel err_w_rel", comments="")
    return Path(path)


def scenario_dict(s: Scenario) -> dict:
    return asdict(s)
