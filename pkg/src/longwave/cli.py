"""Command-line interface: scenario runs, verification studies, wave generation.

Subcommands: run <config>, mms, elliptic, solitary, dispersion.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import verify
from .errors import LongwaveError
from .fem import FunctionSpace
from .mesh import build_rectangle_mesh
from .models import phase_speed
from .scenario import BUILTIN_NAMES, builtin_scenario, load_config, run_scenario
from .snapshots import write_vtk_snapshot
from .solitary import (
    SolitaryWaveProblem,
    petviashvili_bbm,
    petviashvili_peregrine,
    recover_fields,
)


def _parser():
    p = argparse.ArgumentParser(prog="longwave",
                                description="Boussinesq-Peregrine long-wave FEM solver")
    p.add_argument("--out-dir", default="out", help="output directory (default: ./out)")
    p.add_argument("--seedless-deterministic", dest="deterministic", action="store_true",
                   default=True, help="fixed seeds everywhere (default on)")
    p.add_argument("--no-seedless-deterministic", dest="deterministic", action="store_false")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario from a TOML config or builtin name")
    run.add_argument("config", help=f"TOML path or one of {', '.join(BUILTIN_NAMES)}")
    run.add_argument("--dt", type=float)
    run.add_argument("--tmax", type=float)
    run.add_argument("--model", choices=("classical", "simplified", "modified", "bbm"))
    run.add_argument("--theta", type=float)
    run.add_argument("--degree-eta", type=int)
    run.add_argument("--degree-u", type=int)

    mms = sub.add_parser("mms", help="manufactured-solution convergence study")
    mms.add_argument("--model", default="classical",
                     choices=("classical", "simplified", "modified", "bbm"))
    mms.add_argument("--theta", type=float)
    mms.add_argument("--degree-eta", type=int, default=1)
    mms.add_argument("--degree-u", type=int, default=1)
    mms.add_argument("--resolutions", default="8,12,16")
    mms.add_argument("--tmax", type=float, default=1.0)
    mms.add_argument("--dt", type=float, default=5e-3)

    ell = sub.add_parser("elliptic", help="elliptic operator convergence study")
    ell.add_argument("--degree-u", type=int, default=1)
    ell.add_argument("--bathymetry", default="flat", choices=("flat", "slope"))
    ell.add_argument("--nitsche-constant", type=float, default=50.0)
    ell.add_argument("--resolutions", default="8,12,16,24,32")

    sol = sub.add_parser("solitary", help="generate a solitary wave and save it")
    sol.add_argument("--system", default="bbm", choices=("peregrine", "bbm"))
    sol.add_argument("--amplitude", type=float, default=0.3)
    sol.add_argument("--depth", type=float, default=1.0)
    sol.add_argument("--gravity", type=float, default=1.0)
    sol.add_argument("--delta", type=float, default=1e-5)
    sol.add_argument("--channel", default="-20,30,-1,1")
    sol.add_argument("--nx", type=int, default=200)
    sol.add_argument("--ny", type=int, default=8)
    sol.add_argument("--degree-eta", type=int, default=1)
    sol.add_argument("--degree-u", type=int, default=2)

    disp = sub.add_parser("dispersion", help="tabulate the linear phase-speed curves")
    disp.add_argument("--dk-max", type=float, default=3.0)
    disp.add_argument("--samples", type=int, default=121)
    return p


def _resolutions(text):
    return tuple(int(v) for v in text.split(","))


def cmd_run(args):
    if args.config in BUILTIN_NAMES:
        config = builtin_scenario(args.config)
    else:
        config = load_config(args.config)
    from dataclasses import replace

    changes = {}
    if args.dt is not None:
        changes["dt"] = args.dt
    if args.tmax is not None:
        changes["final_time"] = args.tmax
    if args.model is not None:
        changes["model"] = args.model
    if args.theta is not None:
        changes["theta"] = args.theta
    if args.degree_eta is not None:
        changes["degree_eta"] = args.degree_eta
    if args.degree_u is not None:
        changes["degree_u"] = args.degree_u
    if changes:
        config = replace(config, **changes)
    result = run_scenario(config, out_dir=args.out_dir, progress=True)
    print(f"gauge CSV: {result.gauge_csv}")
    print(f"snapshots: {len(result.snapshot_paths)} files in {args.out_dir}")
    print(f"max mass drift: {result.mass_drift.max():.3e}")
    return 0


def cmd_mms(args):
    case = verify.standard_mms_case(args.model, theta=args.theta,
                                    final_time=args.tmax, dt=args.dt)
    rec = verify.run_mms_study(case, args.degree_eta, args.degree_u,
                               resolutions=_resolutions(args.resolutions))
    print(rec.to_text())
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, f"mms_{args.model}_{args.degree_eta}{args.degree_u}.csv")
    rec.to_csv(path)
    print(f"wrote {path}")
    return 0


def cmd_elliptic(args):
    bathy = verify.flat_bathymetry(1.0) if args.bathymetry == "flat" else verify.standard_slope()
    rec = verify.run_elliptic_study(
        bathy, args.degree_u, nitsche_constant=args.nitsche_constant,
        resolutions=_resolutions(args.resolutions),
    )
    print(rec.to_text())
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, f"elliptic_{args.bathymetry}_r{args.degree_u}.csv")
    rec.to_csv(path)
    print(f"wrote {path}")
    return 0


def cmd_solitary(args):
    bounds = tuple(float(v) for v in args.channel.split(","))
    mesh = build_rectangle_mesh(bounds, args.nx, args.ny, diagonal="crossed")
    eta_space = FunctionSpace(mesh, args.degree_eta)
    u_space = FunctionSpace(mesh, args.degree_u, components=2)
    problem = SolitaryWaveProblem(
        amplitude=args.amplitude, depth=args.depth, gravity=args.gravity,
        tolerance=args.delta,
    )
    if args.system == "bbm":
        state = petviashvili_bbm(problem, eta_space, u_space)
    else:
        state = petviashvili_peregrine(problem, u_space)
    fields = recover_fields(problem, state, eta_space, u_space)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, f"solitary_{args.system}_A{args.amplitude:g}.vtk")
    write_vtk_snapshot(path, fields)
    print(f"{args.system}: converged in {state.iterations} iterations "
          f"(residual {state.residual:.2e}, multiplier {state.multiplier:.8f})")
    print(f"wrote {path}")
    return 0


def cmd_dispersion(args):
    dk = np.linspace(0.0, args.dk_max, args.samples)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, "dispersion.csv")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("Dk,bbm,peregrine,euler\n")
        for k in dk:
            row = (k, phase_speed("bbm", k), phase_speed("peregrine", k),
                   phase_speed("euler", k))
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    print(f"wrote {path}")
    return 0


def main(argv=None):
    args = _parser().parse_args(argv)
    handlers = {
        "run": cmd_run,
        "mms": cmd_mms,
        "elliptic": cmd_elliptic,
        "solitary": cmd_solitary,
        "dispersion": cmd_dispersion,
    }
    try:
        return handlers[args.command](args)
    except LongwaveError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
