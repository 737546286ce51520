"""Command line entry point: ``wearfem simulate | converge | check``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .contact_law import check_smallness
from .experiments import (PRESETS, export_deformed, load_config, preset, simulate, convergence_study,
                          write_csv, write_loglog)
from .mesh import unit_square_mesh
from .time_stepper import save_trajectory
from .fe_space import FeSpace

log = logging.getLogger("wearfem")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wearfem", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario and export the final state")
    sim.add_argument("--scenario", required=True, choices=sorted(PRESETS))
    sim.add_argument("--n", type=_positive_int, help="contact edges (mesh cells per side)")
    sim.add_argument("--nsteps", type=_positive_int, help="number of uniform time steps")
    sim.add_argument("--out", type=Path, default=Path("results"))
    sim.add_argument("--config", type=Path, help="key = value overrides of scenario fields")

    conv = sub.add_parser("converge", help="nested-mesh convergence study")
    conv.add_argument("--scenario", default="table1", choices=sorted(PRESETS))
    conv.add_argument("--max-level", type=_positive_int, default=32)
    conv.add_argument("--ref-level", type=_positive_int, default=64)
    conv.add_argument("--out", type=Path, default=Path("results"))
    conv.add_argument("--config", type=Path)

    chk = sub.add_parser("check", help="report the friction smallness condition")
    chk.add_argument("--scenario", required=True, choices=sorted(PRESETS))
    chk.add_argument("--n", type=_positive_int)
    chk.add_argument("--config", type=Path)
    return parser


def _scenario(args):
    s = preset(args.scenario)
    if args.config:
        s = load_config(s, args.config)
    return s


def _levels(max_level: int) -> list[int]:
    levels, n = [], 2
    while n <= max_level:
        levels.append(n)
        n *= 2
    return levels


def cmd_simulate(args) -> int:
    s = _scenario(args)
    if args.n:
        s = replace(s, n=args.n)
    if args.nsteps:
        s = replace(s, N=args.nsteps)
    sim, traj = simulate(s)
    vtk, prof = export_deformed(traj, s, args.out)
    dump = save_trajectory(traj, args.out / f"{s.name}_trajectory.txt")
    space = sim.space
    print(f"{s.name}: n={s.n} N={s.N} |u(T)|_V={space.v_norm(traj.u_final):.6g} "
          f"|w(T)|_W={space.w_norm(traj.w_final):.6g} max wear={traj.w_final.max():.6g}")
    for p in (vtk, prof, dump):
        print(f"wrote {p}")
    return 0


def cmd_converge(args) -> int:
    s = _scenario(args)
    levels = _levels(args.max_level)
    if not levels or args.ref_level <= levels[-1] or args.ref_level % levels[-1]:
        raise ValueError("reference level must be a power-of-two multiple above the finest level")
    study = convergence_study(s, levels, args.ref_level)
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = write_csv(study.rows, args.out / f"{s.name}_convergence.csv")
    ll_path = write_loglog(study, args.out / f"{s.name}_loglog.dat")
    print(f"reference n=N={args.ref_level}: |u|_V={study.ref_u_norm:.5f} |w|_W={study.ref_w_norm:.5f}")
    print(f"{'h+k':>10} {'e_u':>12} {'order':>8} {'e_w':>12} {'order':>8}")
    for r in study.rows:
        ou = "" if r.order_u is None else f"{r.order_u:.4f}"
        ow = "" if r.order_w is None else f"{r.order_w:.4f}"
        print(f"{r.h_plus_k:>10.5g} {r.err_u_rel:>12.4e} {ou:>8} {r.err_w_rel:>12.4e} {ow:>8}")
    print(f"wrote {csv_path}")
    print(f"wrote {ll_path}")
    return 0


def cmd_check(args) -> int:
    s = _scenario(args)
    if args.n:
        s = replace(s, n=args.n)
    data = s.problem()
    mesh = unit_square_mesh(s.n)
    space = FeSpace(mesh, s.gap)
    report = check_smallness(data.material, data.law, s.mu, mesh, space)
    print(f"scenario {s.name}, n = {s.n}")
    for line in report.lines():
        print(line)
    return 0


COMMANDS = {"simulate": cmd_simulate, "converge": cmd_converge, "check": cmd_check}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:  # noqa: BLE001 - report any failure as one diagnostic line
        print(f"wearfem: error: {exc}", file=sys.stderr)
        return 1


cli_main = main

if __name__ == "__main__":
    sys.exit(main())
