"""Finite element simulation of quasistatic frictional contact with wear."""

from .assembly import LoadSpec, MaterialParams, assemble_load, assemble_stiffness, element_stress
from .contact_law import ComplianceLaw, FoundationMotion, check_smallness, phi_eval
from .fe_space import FeSpace, prolong, prolong_wear
from .mesh import Mesh, unit_square_mesh
from .time_stepper import ProblemData, Simulation, TimePartition, Trajectory, run
from .vi_solver import CondensedContactSolver, SolverSettings, StepReport, vi_residual

__all__ = [
    "ComplianceLaw", "CondensedContactSolver", "FeSpace", "FoundationMotion", "LoadSpec",
    "MaterialParams", "Mesh", "ProblemData", "Simulation", "SolverSettings", "StepReport",
    "TimePartition", "Trajectory", "assemble_load", "assemble_stiffness", "check_smallness",
    "element_stress", "phi_eval", "prolong", "prolong_wear", "run", "unit_square_mesh", "vi_residual",
]
