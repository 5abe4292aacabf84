"""Command-line front end.

Subcommands: potential, critical, simulate, portrait, wire. Works in the
normalized system (rho = 1, mass = 1) unless --rho and one of
--lam / --mass override it. Human-readable text by default, --json for
machine output, --out for bulk CSV data.

Exit codes: 0 success (simulate: run completed), 1 simulate run ended in a
collision, 2 usage or domain error, 3 numerical failure (partial output is
still written).
"""

import argparse
import json
import math
import sys

import numpy as np

from . import planar, wire
from .errors import DomainError, IntegrationError, StateError
from .potential import Circle, agm_potential, dist_extremes, gradient, potential
from .simulate import (
    CartesianState,
    integrate_cartesian,
    read_trajectory_csv,
    summarize_trajectory,
    write_trajectory_csv,
)

__all__ = ["main", "build_parser"]


def _floats(text, n, what):
    parts = [p for p in text.replace(";", ",").split(",") if p != ""]
    try:
        vals = [float(p) for p in parts]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"bad {what}: {err}") from None
    if len(vals) != n:
        raise argparse.ArgumentTypeError(f"{what} needs {n} comma-separated numbers")
    return vals


def _point3(text):
    return _floats(text, 3, "point")


def _state6(text):
    return _floats(text, 6, "state")


def _grid_spec(text):
    lo_hi_n = text.split(":")
    if len(lo_hi_n) != 3:
        raise argparse.ArgumentTypeError("grid spec must be lo:hi:n")
    try:
        lo, hi, n = float(lo_hi_n[0]), float(lo_hi_n[1]), int(lo_hi_n[2])
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"bad grid spec: {err}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("grid needs at least one point")
    return np.linspace(lo, hi, n)


def _pairs(text):
    out = []
    for chunk in text.split(";"):
        if chunk == "":
            continue
        out.append(tuple(_floats(chunk, 2, "point")))
    if not out:
        raise argparse.ArgumentTypeError("no points given")
    return out


def _eps_list(text):
    vals = [float(p) for p in text.split(",") if p != ""]
    if not vals:
        raise argparse.ArgumentTypeError("no epsilon values given")
    return vals


def build_parser():
    ap = argparse.ArgumentParser(
        prog="ringdyn",
        description="Dynamics in the field of a fixed homogeneous circle.",
    )
    ap.add_argument("--rho", type=float, default=1.0, help="circle radius (default 1)")
    group = ap.add_mutually_exclusive_group()
    group.add_argument("--lam", type=float, default=None, help="linear mass density")
    group.add_argument("--mass", type=float, default=None, help="total mass (default 1)")
    ap.add_argument("--json", action="store_true", help="machine-readable output")
    ap.add_argument("--out", default=None, help="write bulk CSV data to this file")

    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("potential", help="evaluate V and grad V at a point")
    p.add_argument("--point", type=_point3, required=True, help="x,y,z")

    p = sub.add_parser("critical", help="critical radius/angular momentum data")
    p.add_argument("--K", type=float, default=None, help="also solve g(r) = K^2")

    p = sub.add_parser("simulate", help="integrate a trajectory and write CSV")
    p.add_argument("--state", type=_state6, required=True, help="x,y,z,vx,vy,vz")
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--atol", type=float, default=1e-12)
    p.add_argument("--d-stop", type=float, default=None)
    p.add_argument("--max-steps", type=int, default=10_000_000)

    p = sub.add_parser("portrait", help="effective-potential energy grid as CSV")
    p.add_argument("--side", choices=("inside", "outside"), required=True)
    p.add_argument("--K", type=float, default=0.0)
    p.add_argument("--r", type=_grid_spec, required=True, help="lo:hi:n")
    p.add_argument("--rdot", type=_grid_spec, required=True, help="lo:hi:n")

    p = sub.add_parser("wire", help="large-circle limit convergence table as CSV")
    p.add_argument("--points", type=_pairs, required=True, help="x,z;x,z;...")
    p.add_argument("--eps", type=_eps_list, required=True, help="comma-separated epsilons")

    return ap


def _circle_from_args(args):
    if args.lam is not None and args.mass is not None:
        raise DomainError("give at most one of --lam / --mass")
    if args.lam is not None:
        return Circle(rho=args.rho, lam=args.lam)
    mass = 1.0 if args.mass is None else args.mass
    return Circle.with_mass(rho=args.rho, mass=mass)


def _emit(args, payload, text_lines):
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _write_csv(args, header, rows):
    lines = [header] + [",".join(f"{v:.17g}" for v in row) for row in rows]
    data = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data)


def cmd_potential(args):
    circle = _circle_from_args(args)
    p = np.array(args.point)
    pair = dist_extremes(p, circle)
    V = potential(p, circle)
    grad = gradient(p, circle)
    sigma = -circle.mass / V
    payload = {
        "rho": circle.rho,
        "lam": circle.lam,
        "mass": circle.mass,
        "V": V,
        "grad": [float(g) for g in grad],
        "d": pair.d,
        "D": pair.D,
        "agm": sigma,
    }
    _emit(
        args,
        payload,
        [
            f"V        = {V:.17g}",
            f"grad V   = ({grad[0]:.17g}, {grad[1]:.17g}, {grad[2]:.17g})",
            f"d, D     = {pair.d:.17g}, {pair.D:.17g}",
            f"agm(d,D) = {sigma:.17g}",
            f"circle   rho = {circle.rho:g}, lam = {circle.lam:.17g}, mass = {circle.mass:.17g}",
        ],
    )
    return 0


def cmd_critical(args):
    circle = _circle_from_args(args)
    data = planar.critical_data(circle)
    payload = {
        "rho": circle.rho,
        "lam": circle.lam,
        "mass": circle.mass,
        "r0": data.r0,
        "K0": data.K0,
        "gprime_residual": data.gprime_residual,
    }
    lines = [
        f"r0 = {data.r0:.17g}",
        f"K0 = {data.K0:.17g}",
        f"|g'(r0)| residual = {data.gprime_residual:.3g}",
    ]
    if args.K is not None:
        pair = planar.critical_radii(args.K, data)
        if pair is None:
            payload.update({"K": args.K, "r1": None, "r2": None})
            lines.append(f"K = {args.K:g}: no critical radii (|K| < K0)")
        else:
            r1, r2 = pair
            K2 = args.K * args.K
            res1 = abs(planar.g(r1, circle) - K2)
            res2 = abs(planar.g(r2, circle) - K2)
            payload.update(
                {"K": args.K, "r1": r1, "r2": r2, "g_residuals": [res1, res2]}
            )
            lines.append(f"K = {args.K:g}: r1 = {r1:.17g}, r2 = {r2:.17g}")
            lines.append(f"|g - K^2| residuals = {res1:.3g}, {res2:.3g}")
    _emit(args, payload, lines)
    return 0


def cmd_simulate(args):
    circle = _circle_from_args(args)
    s = args.state
    s0 = CartesianState(position=s[:3], velocity=s[3:])
    out_path = args.out or "trajectory.csv"
    code = 0
    try:
        traj = integrate_cartesian(
            s0,
            circle,
            args.t_end,
            rtol=args.rtol,
            atol=args.atol,
            d_stop=args.d_stop,
            max_steps=args.max_steps,
        )
    except IntegrationError as err:
        traj = err.trajectory
        if traj is None:
            raise
        code = 3
    else:
        if traj.termination == "collision":
            code = 1
    write_trajectory_csv(traj, out_path)
    summary = summarize_trajectory(*read_trajectory_csv(out_path))
    summary["file"] = out_path
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        for key in (
            "termination",
            "t_final",
            "samples",
            "energy_drift",
            "momentum_drift",
            "file",
        ):
            print(f"{key} = {summary[key]}")
        if summary["collision"]:
            c = summary["collision"]
            print(
                f"collision at t = {c['t_collision']:.12g}, theta* = {c['theta_star']:.12g}, side = {c['side']}"
            )
    return code


def cmd_portrait(args):
    circle = _circle_from_args(args)
    table = planar.phase_portrait(args.side, args.K, args.r, args.rdot, circle)
    if not np.all(np.isfinite(table)):
        raise DomainError("grid leaves the domain of the effective potential")
    rows = [
        (r, rd, table[i, j])
        for i, r in enumerate(args.r)
        for j, rd in enumerate(args.rdot)
    ]
    _write_csv(args, "r,rdot,E", rows)
    return 0


def cmd_wire(args):
    circle = _circle_from_args(args)
    rows = wire.convergence_scan(args.points, args.eps, lam=circle.lam)
    _write_csv(args, "x,z,eps,deviation", rows)
    return 0


_DISPATCH = {
    "potential": cmd_potential,
    "critical": cmd_critical,
    "simulate": cmd_simulate,
    "portrait": cmd_portrait,
    "wire": cmd_wire,
}


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except DomainError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (IntegrationError, StateError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
