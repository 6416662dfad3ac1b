"""Command line front end: run each experiment, emit CSV/JSON artifacts.

Subcommands: static, evolve, charge, residual, decompose, equilibria,
identity-check.  Moduli are given either as the c-triple (--c1 --c2 --c3)
or the couplings (--lambda1 --lambda2), never both.  Flags override an
optional key=value config file (--config); identical configuration and
seed produce bit-identical outputs.  Exit codes: 0 success, 2 bad usage or
configuration, 3 solver divergence (with a diagnostic JSON record on
stdout).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .fields import random_smooth_field
from .kinematics import (
    Moduli,
    RotorGrid,
    check_identity_TT,
    decompose,
    quadratic_invariants,
    save_grid_csv,
)
from .field_equations import residual_grid
from .radial import (
    DivergenceError,
    equilibria,
    evolve_dynamic,
    lift_hedgehog,
    load_profile_csv,
    resample_uniform,
    save_profile_csv,
    solve_static,
)
from .topology import total_charge

SCHEMA_VERSION = 1


def _emit(payload: dict, path: str | None) -> None:
    text = json.dumps({"schema_version": SCHEMA_VERSION, **payload}, sort_keys=True, indent=2)
    if path:
        with open(path, "w", newline="\n") as f:
            f.write(text + "\n")
    print(text)


def _fail_usage(message: str) -> int:
    print(json.dumps({"schema_version": SCHEMA_VERSION, "error": "usage", "detail": message},
                     sort_keys=True), file=sys.stderr)
    return 2


def _moduli_from_args(args) -> Moduli:
    have_c = args.c1 is not None or args.c2 is not None or args.c3 is not None
    have_l = args.lambda1 is not None or args.lambda2 is not None
    if have_c == have_l:
        raise ValueError("give exactly one of (--c1 --c2 --c3) or (--lambda1 --lambda2)")
    if have_c:
        if None in (args.c1, args.c2, args.c3):
            raise ValueError("all of --c1 --c2 --c3 are required together")
        return Moduli.from_constants(args.c1, args.c2, args.c3)
    if None in (args.lambda1, args.lambda2):
        raise ValueError("both --lambda1 and --lambda2 are required together")
    return Moduli.from_couplings(args.lambda1, args.lambda2)


def _add_moduli_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--c1", type=float, default=None, help="elastic modulus c1 (with --c2 --c3)")
    p.add_argument("--c2", type=float, default=None, help="elastic modulus c2")
    p.add_argument("--c3", type=float, default=None, help="elastic modulus c3")
    p.add_argument("--lambda1", type=float, default=None, help="coupling lambda1 (with --lambda2)")
    p.add_argument("--lambda2", type=float, default=None, help="coupling lambda2")


def _load_config(path: str) -> dict:
    out = {}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = line.split("=", 1)
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _coerce(raw: str):
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    for conv in (int, float):
        try:
            return conv(raw)
        except ValueError:
            pass
    return raw


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill unset args from the config file; explicit flags win."""
    if not getattr(args, "config", None):
        return
    cfg = _load_config(args.config)
    for key, raw in cfg.items():
        if not hasattr(args, key):
            raise ValueError(f"unknown config key: {key}")
        if getattr(args, key) is None:
            setattr(args, key, _coerce(raw))


def cmd_static(args, parser) -> int:
    _apply_config(args, parser)
    m = _moduli_from_args(args)
    try:
        profile = solve_static(m, slope0=args.slope0, r_max=args.rmax, tol=args.tol)
    except DivergenceError as exc:
        print(json.dumps({"schema_version": SCHEMA_VERSION, "error": "divergence",
                          "detail": str(exc), "radius": exc.radius}, sort_keys=True))
        return 3
    if args.output:
        save_profile_csv(profile, args.output)
    _emit(
        {
            "command": "static",
            "lambda1": m.lambda1,
            "lambda2": m.lambda2,
            "slope0": args.slope0,
            "r_max": args.rmax,
            "tol": args.tol,
            "w_end": float(profile.w[-1]),
            "w_max": float(profile.w.max()),
            "output": args.output,
        },
        args.summary,
    )
    return 0


def cmd_evolve(args, parser) -> int:
    _apply_config(args, parser)
    initial = load_profile_csv(args.from_profile)
    uniform = resample_uniform(initial, n=args.n_grid)
    if uniform.w_t is None:
        uniform.w_t = np.zeros_like(uniform.w)
    dr = uniform.r[1] - uniform.r[0]
    dt = args.dt if args.dt is not None else 0.5 * dr / np.sqrt(uniform.moduli.lambda1)
    try:
        result = evolve_dynamic(uniform, dt=dt, t_end=args.t_end)
    except ValueError as exc:
        return _fail_usage(str(exc))
    final = result.profile(len(result.times) - 1)
    if args.output:
        save_profile_csv(final, args.output)
    e = result.energy
    _emit(
        {
            "command": "evolve",
            "dt": dt,
            "t_end": args.t_end,
            "n_grid": args.n_grid,
            "sup_drift": float(np.abs(result.w - result.w[0]).max()),
            "energy_initial": float(e[0]),
            "energy_rel_drift": float(np.abs(e - e[0]).max() / max(abs(e[0]), 1e-300)),
            "output": args.output,
        },
        args.summary,
    )
    return 0


def cmd_charge(args, parser) -> int:
    _apply_config(args, parser)
    profile = load_profile_csv(args.from_profile)
    field = lift_hedgehog(profile)
    report = total_charge(field, ball_radius=args.radius, grid_spacing=args.spacing,
                          force_3d=args.full_3d)
    _emit(
        {
            "command": "charge",
            "charge": report.charge,
            "ball_radius": report.ball_radius,
            "grid_spacing": report.grid_spacing,
            "estimated_error": report.estimated_error,
        },
        args.output,
    )
    return 0


def cmd_residual(args, parser) -> int:
    _apply_config(args, parser)
    profile = load_profile_csv(args.from_profile)
    field = lift_hedgehog(profile)
    h = args.h
    # cell-centered even-count lattice: origin never on a grid node
    n = int(np.ceil(2 * (args.rmax_annulus + 3 * h) / h))
    n += n % 2
    grid = RotorGrid.from_field(field, dims=(n, n, n), spacing=h,
                                origin=-(n / 2 - 0.5) * h * np.ones(3))
    pts, res = residual_grid(grid, profile.moduli)
    rr = np.linalg.norm(pts, axis=-1)
    mask = (rr >= args.rmin) & (rr <= args.rmax_annulus)
    _emit(
        {
            "command": "residual",
            "h": h,
            "annulus": [args.rmin, args.rmax_annulus],
            "max_residual": float(np.abs(res[mask]).max()),
            "n_cells": int(mask.sum()),
        },
        args.output,
    )
    return 0


def cmd_decompose(args, parser) -> int:
    _apply_config(args, parser)
    vals = [float(v) for v in args.matrix.split(",")]
    if len(vals) != 9:
        raise ValueError("--matrix needs 9 comma-separated entries (row major)")
    mat = np.array(vals).reshape(3, 3)
    parts = decompose(mat)
    trace_sq, axial_sq = quadratic_invariants(mat)
    _emit(
        {
            "command": "decompose",
            "trace_part": parts.trace_part,
            "antisym_part": parts.antisym_part.tolist(),
            "sym_traceless_part": parts.sym_traceless_part.tolist(),
            "trace_sq_invariant": trace_sq,
            "axial_sq_invariant": axial_sq,
        },
        args.output,
    )
    return 0


def cmd_equilibria(args, parser) -> int:
    _apply_config(args, parser)
    m = _moduli_from_args(args)
    eqs = equilibria(m)
    _emit(
        {
            "command": "equilibria",
            "lambda1": m.lambda1,
            "lambda2": m.lambda2,
            "equilibria": [
                {
                    "f_star": e.f_star,
                    "sinh_f_star": float(np.sinh(e.f_star)),
                    "w_star": e.w_star,
                    "eigenvalues": [[ev.real, ev.imag] for ev in e.eigenvalues],
                }
                for e in eqs
            ],
        },
        args.output,
    )
    return 0


def cmd_identity_check(args, parser) -> int:
    _apply_config(args, parser)
    field = random_smooth_field(seed=args.seed)
    results = []
    spacings = [args.h, args.h / 2.0] if args.refine else [args.h]
    for h in spacings:
        n = int(np.ceil(2.0 * args.extent / h)) + 1
        grid = RotorGrid.from_field(field, dims=(n, n, n), spacing=h,
                                    origin=-args.extent * np.ones(3))
        results.append({"h": h, "n": n, "max_residual": check_identity_TT(grid)})
        if args.dump_grid and h == spacings[0]:
            save_grid_csv(grid, args.dump_grid)
    payload = {"command": "identity-check", "seed": args.seed, "results": results}
    if args.refine:
        payload["richardson_ratio"] = results[0]["max_residual"] / results[1]["max_residual"]
    _emit(payload, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotelast",
        description="Rotational elasticity experiments: soliton profiles, dynamics, "
                    "field-equation residuals, torsion decomposition, topological charge.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"rotelast {__version__}")
    sub = parser.add_subparsers(
        dest="command", required=True,
        parser_class=lambda **kw: argparse.ArgumentParser(
            formatter_class=argparse.ArgumentDefaultsHelpFormatter, **kw),
    )

    def common(p):
        p.add_argument("--config", default=None,
                       help="key=value file; explicit flags take precedence")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized commands")

    p = sub.add_parser("static", help="solve the static radial profile")
    common(p)
    _add_moduli_args(p)
    p.add_argument("--slope0", type=float, default=1.0, help="leading series amplitude at r=0")
    p.add_argument("--rmax", type=float, default=50.0, help="outer integration radius")
    p.add_argument("--tol", type=float, default=1e-10, help="solver error tolerance")
    p.add_argument("-o", "--output", default=None, help="profile CSV path")
    p.add_argument("--summary", default=None, help="summary JSON path")
    p.set_defaults(func=cmd_static)

    p = sub.add_parser("evolve", help="integrate the radial dynamics")
    common(p)
    p.add_argument("--from-profile", required=True, help="initial profile CSV")
    p.add_argument("--dt", type=float, default=None, help="time step (default 0.5 dr/sqrt(l1))")
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--n-grid", type=int, default=4001, help="uniform radial grid size")
    p.add_argument("-o", "--output", default=None, help="final profile CSV path")
    p.add_argument("--summary", default=None, help="summary JSON path")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("charge", help="topological charge of a lifted profile")
    common(p)
    p.add_argument("--from-profile", required=True)
    p.add_argument("--radius", type=float, default=40.0, help="integration ball radius")
    p.add_argument("--spacing", type=float, default=0.01, help="quadrature resolution")
    p.add_argument("--full-3d", action="store_true",
                   help="force the 3-d midpoint quadrature instead of the radial fast path")
    p.add_argument("-o", "--output", default=None, help="charge JSON path")
    p.set_defaults(func=cmd_charge)

    p = sub.add_parser("residual", help="field-equation residual of a lifted profile on a grid")
    common(p)
    p.add_argument("--from-profile", required=True)
    p.add_argument("--h", type=float, default=0.2, help="grid spacing")
    p.add_argument("--rmin", type=float, default=1.0, help="annulus inner radius")
    p.add_argument("--rmax-annulus", type=float, default=5.0, help="annulus outer radius")
    p.add_argument("-o", "--output", default=None, help="residual JSON path")
    p.set_defaults(func=cmd_residual)

    p = sub.add_parser("decompose", help="irreducible parts and invariants of a 3x3 matrix")
    common(p)
    p.add_argument("--matrix", required=True, help="9 comma-separated entries, row major")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("equilibria", help="fixed points of the autonomous radial system")
    common(p)
    _add_moduli_args(p)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_equilibria)

    p = sub.add_parser("identity-check", help="quadratic-invariant identity residual on a random field")
    common(p)
    p.add_argument("--h", type=float, default=0.1, help="grid spacing")
    p.add_argument("--extent", type=float, default=2.0, help="half width of the sample box")
    p.add_argument("--refine", action="store_true", help="also run at h/2 and report the ratio")
    p.add_argument("--dump-grid", default=None, help="write the sampled rotor grid as CSV")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_identity_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (ValueError, OSError) as exc:
        return _fail_usage(str(exc))


if __name__ == "__main__":
    sys.exit(main())
