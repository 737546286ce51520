"""Acceptance suite: one PASS/FAIL line per criterion, collected in the terminal summary."""
from dataclasses import replace

import numpy as np
import pytest
import scipy.sparse.linalg as spla

from conftest import ACCEPTANCE_LINES
from helpers import feasible_trials
from test_assembly import MAT
from test_contact_law import four_field_gap
from test_vi_solver import build, grid_oracle
from wearfem.assembly import LoadSpec, assemble_stiffness, edge_traction_load
from wearfem.contact_law import FoundationMotion, trace_constant
from wearfem.experiments import convergence_study, preset, simulate
from wearfem.fe_space import FeSpace
from wearfem.mesh import BoundaryTag, unit_square_mesh
from wearfem.time_stepper import TimePartition
from wearfem.vi_solver import solve_vi, vi_residual

REF_U_NORM = 0.19131
REF_W_NORM = 0.08192
ERR_U = (4.1698e-1, 2.6840e-1, 1.4360e-1, 7.3979e-2, 3.4882e-2)
ERR_W = (2.9009e-1, 1.0328e-1, 3.8385e-2, 1.4694e-2, 5.0891e-3)
NORM_TOL = 0.05
ERR_TOL = 0.30
ORDER_U = (0.75, 1.35)
ORDER_W = (1.1, 1.8)


def record(label, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _within(x, target, tol):
    return abs(x - target) <= tol * target


def _fmt(xs):
    return ", ".join(f"{x:.4g}" for x in xs)


# -- 1: convergence study --------------------------------------------------------------

@pytest.fixture(scope="module")
def study():
    return convergence_study(preset("table1"), levels=(2, 4, 8, 16, 32), ref_level=64)


def test_c1a_reference_displacement_norm(study):
    record("C1a reference |u|_V", _within(study.ref_u_norm, REF_U_NORM, NORM_TOL),
           f"{study.ref_u_norm:.5f} vs {REF_U_NORM} +-5%")


def test_c1b_reference_wear_norm(study):
    record("C1b reference |w|_W", _within(study.ref_w_norm, REF_W_NORM, NORM_TOL),
           f"{study.ref_w_norm:.5f} vs {REF_W_NORM} +-5%")


def test_c1c_displacement_errors(study):
    errs = [r.err_u_rel for r in study.rows]
    ok = all(_within(e, t, ERR_TOL) for e, t in zip(errs, ERR_U))
    record("C1c displacement errors", ok, f"[{_fmt(errs)}] vs [{_fmt(ERR_U)}] +-30%")


def test_c1d_wear_errors(study):
    errs = [r.err_w_rel for r in study.rows]
    ok = all(_within(e, t, ERR_TOL) for e, t in zip(errs, ERR_W))
    record("C1d wear errors", ok, f"[{_fmt(errs)}] vs [{_fmt(ERR_W)}] +-30%")


def test_c1e_displacement_orders(study):
    orders = [r.order_u for r in study.rows[-2:]]
    ok = all(ORDER_U[0] <= o <= ORDER_U[1] for o in orders)
    record("C1e displacement orders", ok, f"last two [{_fmt(orders)}] in {list(ORDER_U)}")


def test_c1f_wear_orders(study):
    orders = [r.order_w for r in study.rows[-2:]]
    ok = all(ORDER_W[0] <= o <= ORDER_W[1] for o in orders)
    record("C1f wear orders", ok, f"last two [{_fmt(orders)}] in {list(ORDER_W)}")


# -- 2: qualitative figure checks --------------------------------------------------------

@pytest.fixture(scope="module")
def figure_runs():
    out = {}
    for name in ("fig1", "fig2", "fig3", "fig4", "table1"):
        out[name] = simulate(preset(name))[1]
    return out


def _mean_tangential(traj):
    return float(np.mean(traj.space.tangential_traces(traj.u_final)))


def test_c2_figures(figure_runs):
    f1, f2, f3, f4 = (figure_runs[k] for k in ("fig1", "fig2", "fig3", "fig4"))
    sp = f1.space
    m1, m3, m4 = _mean_tangential(f1), _mean_tangential(f3), _mean_tangential(f4)
    checks = {
        "fig1 wear>0": f1.w_final.max() > 0,
        "fig1 u_nu<g": bool(np.all(sp.normal_traces(f1.u_final) < sp.gap)),
        "fig1 drift right": m1 > 0,
        "fig2 touches": bool(np.any(np.abs(f2.space.normal_traces(f2.u_final) - sp.gap) <= 1e-6)),
        "fig3 further right": m3 > m1,
        "fig4 opposite": np.sign(m4) == -np.sign(m1) != 0,
    }
    failed = [k for k, v in checks.items() if not v]
    record("C2 figure checks", not failed,
           f"mean u_tau fig1={m1:.4g} fig3={m3:.4g} fig4={m4:.4g}; max wear fig1={f1.w_final.max():.4g}"
           + (f"; failed: {failed}" if failed else ""))


# -- 3: property suites ---------------------------------------------------------------------

def test_c3a_wear_and_admissibility_on_presets(figure_runs):
    worst_neg, worst_dec, worst_gap = 0.0, 0.0, -np.inf
    for traj in figure_runs.values():
        W = np.array(traj.wear)
        worst_neg = min(worst_neg, W.min())
        worst_dec = min(worst_dec, np.diff(W, axis=0).min())
        for u in traj.displacements:
            worst_gap = max(worst_gap, (traj.space.normal_traces(u) - traj.space.gap).max())
    ok = worst_neg >= -1e-14 and worst_dec >= -1e-14 and worst_gap <= 1e-10
    record("C3a wear >=0, monotone, u_nu<=g", ok,
           f"min w={worst_neg:.3g}, min dw={worst_dec:.3g}, max(u_nu-g)={worst_gap:.3g}")


def test_c3b_vi_residual_fig1_every_step():
    s = replace(preset("fig1"), n=8, N=8)
    sim, traj = simulate(s)
    rng = np.random.default_rng(7)
    worst = np.inf
    for t, u, w in zip(traj.times, traj.displacements, traj.wear):
        trials = feasible_trials(sim.space, u, rng, 100)
        worst = min(worst, vi_residual(sim.space, sim.K, sim.data.law, sim.data.motion, t, w, sim.load(t), u, trials))
    record("C3b VI residual fig1 n=N=8", worst >= -1e-8, f"min over steps and 100 trials = {worst:.3g}")


def test_c3c_four_field_inequality():
    space = FeSpace(unit_square_mesh(8), 0.1)
    s = preset("table1")
    motion = FoundationMotion(s.v_star, mu=s.mu, kappa=s.kappa)
    c0, _ = trace_constant(space)
    rng = np.random.default_rng(11)
    gaps = [four_field_gap(space, s.problem().law, motion, c0, rng) for _ in range(1000)]
    record("C3c four-field inequality", min(gaps) >= -1e-8, f"1000 tuples, min(rhs-lhs) = {min(gaps):.4g}")


def test_c3d_stiffness_properties():
    rng = np.random.default_rng(3)
    mesh = unit_square_mesh(8)
    space = FeSpace(mesh)
    K = assemble_stiffness(mesh, space, MAT)
    asym = float(abs(K - K.T).max())
    lam_min = float(spla.eigsh(K.tocsc(), k=1, sigma=0, which="LM", return_eigenvectors=False)[0])
    worst_m, worst_l = np.inf, np.inf
    for _ in range(100):
        u1, u2, v = rng.standard_normal((3, space.n_free))
        d = u1 - u2
        worst_m = min(worst_m, d @ (K @ d) - MAT.m_F * space.v_norm(d) ** 2)
        worst_l = min(worst_l, MAT.L_F * space.v_norm(d) * space.v_norm(v) - abs(v @ (K @ d)))
    ok = asym == 0.0 and lam_min > 0 and worst_m >= -1e-10 and worst_l >= -1e-10
    record("C3d stiffness sym/PD and bounds", ok,
           f"asym={asym:.3g}, min eig={lam_min:.3g}, coercivity slack={worst_m:.3g}, continuity slack={worst_l:.3g}")


def test_c3e_patch_test():
    p, q = 0.03, -0.01
    mesh = unit_square_mesh(8)
    space = FeSpace(mesh)
    sigma = MAT.stress(np.array([[p, 0.5 * q], [0.5 * q, 0.0]]))
    edges = [e for e in mesh.boundary_edges if e.tag != BoundaryTag.DIRICHLET]
    F = edge_traction_load(mesh, edges, lambda e: sigma @ np.asarray(e.normal))
    u = spla.spsolve(assemble_stiffness(mesh, space, MAT).tocsc(), space.reduce(F.ravel()))
    err = float(np.abs(u - space.interpolate(lambda x, y: (p * x, q * x))).max())
    record("C3e patch test", err <= 1e-10, f"max nodal error {err:.3g}")


# -- 4: small-instance oracle -------------------------------------------------------------------

def test_c4_grid_search_oracle():
    space, K, law, motion, f, solver = build(1, LoadSpec((0.0, -2.0)), mu=0.3)
    u, _ = solve_vi(solver, f, np.zeros(space.n_contact), 0.0)
    err = float(np.abs(u - grid_oracle(f, K, 0.3)).max())
    record("C4 n=1 grid-search oracle", err <= 1e-3, f"max DOF difference {err:.3g}")


# -- 5: temporal order ---------------------------------------------------------------------------

def test_c5_temporal_first_order():
    base = replace(preset("table1"), n=16)
    ref = simulate(replace(base, N=64))[1]
    errs = []
    for N in (4, 8, 16, 32):
        tr = simulate(replace(base, N=N))[1]
        stride = 64 // N
        errs.append(max(ref.space.v_norm(ref.displacements[j * stride] - u) for j, u in enumerate(tr.displacements)))
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    record("C5 temporal order", all(r >= 1.7 for r in ratios),
           f"errors [{_fmt(errs)}], ratios [{_fmt(ratios)}] >= 1.7")
