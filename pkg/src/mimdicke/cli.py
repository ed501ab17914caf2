"""Command-line front end: every computation as a subcommand.

Emits plot-ready CSV/JSON data products only (no figure rendering).
Parameters come from a TOML or JSON config file with exactly one of the
top-level tables `dimensionless` / `physical`, possibly overridden by
repeatable `--param key=value` flags (flags win).  Outputs are
deterministic: byte-identical across repeated runs and thread counts.

Exit codes: 0 success, 1 validation/usage error, 2 numerical
non-convergence.  Failures print a machine-readable JSON object
{"error": {"type": ..., "message": ...}} on stderr.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:          # Python 3.10
    import tomli as tomllib

from . import dynamics as dyn
from . import experiment as ex
from . import fockcheck as fc
from . import meanfield as mf
from . import quantum1d as q1
from . import stability as st
from .csvio import format_float, render_csv
from .errors import ConvergenceError, ValidationError
from .model import (DimensionlessParams, PhysicalParams,
                    coupling_from_reflectivity)

POTENTIAL_CSV_HEADER = "x,v_eff"

# accepted spellings in config files / --param; "lambda" is the natural
# name but a reserved word in Python, so the dataclass field is `lam`
_DIMENSIONLESS_ALIASES = {"lambda": "lam"}

_FOCK_OPERATORS = ("hamiltonian", "dicke", "sx", "sy", "sz", "x", "p",
                   "n_tot", "parity_plus", "parity_minus")


# ---------------------------------------------------------------------------
# configuration plumbing

def load_config(path: Path) -> dict:
    """Parse a TOML (default) or JSON (by extension) parameter file."""
    try:
        raw = path.read_bytes()
    except OSError as err:
        raise ValidationError(f"cannot read config {path}: {err}")
    if path.suffix.lower() == ".json":
        try:
            cfg = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as err:
            raise ValidationError(f"cannot parse JSON config {path}: {err}")
    else:
        try:
            cfg = tomllib.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, tomllib.TOMLDecodeError) as err:
            raise ValidationError(f"cannot parse TOML config {path}: {err}")
    if not isinstance(cfg, dict):
        raise ValidationError(f"config {path} must contain a table/object")
    return cfg


def _parse_overrides(pairs) -> dict:
    out = {}
    for item in pairs or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValidationError(f"--param expects key=value, got {item!r}")
        try:
            out[key] = float(value)
        except ValueError:
            raise ValidationError(f"--param {key}: {value!r} is not a number")
    return out


def _coerce(cls, table: dict, aliases: dict):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    out = {}
    for key, value in table.items():
        name = aliases.get(key, key)
        if name not in fields:
            raise ValidationError(
                f"unknown parameter {key!r} for {cls.__name__} "
                f"(valid: {', '.join(sorted(fields))})")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValidationError(f"parameter {key!r} must be a number")
        out[name] = float(value)
    missing = [n for n, f in fields.items()
               if f.default is dataclasses.MISSING and n not in out]
    if missing:
        raise ValidationError(
            f"missing parameters for {cls.__name__}: {', '.join(missing)}")
    return cls(**out)


def _table_from(args, kind: str) -> dict:
    """Collect the `kind` table from --config and --param (flags win)."""
    table = {}
    if args.config:
        cfg = load_config(Path(args.config))
        present = [k for k in ("dimensionless", "physical") if k in cfg]
        if len(present) != 1:
            raise ValidationError(
                "config must contain exactly one of the tables "
                f"'dimensionless' or 'physical', found {present or 'neither'}")
        if present[0] != kind:
            raise ValidationError(
                f"this subcommand needs a [{kind}] table, "
                f"config provides [{present[0]}]")
        body = cfg[kind]
        if not isinstance(body, dict):
            raise ValidationError(f"[{kind}] must be a table/object")
        table.update(body)
    table.update(_parse_overrides(args.param))
    if not table:
        raise ValidationError(
            f"no parameter source: pass --config or --param for [{kind}]")
    return table


def dimensionless_params(args) -> DimensionlessParams:
    return _coerce(DimensionlessParams, _table_from(args, "dimensionless"),
                   _DIMENSIONLESS_ALIASES)


def physical_params(args) -> PhysicalParams:
    return _coerce(PhysicalParams, _table_from(args, "physical"), {})


def _out_dir(args) -> Path:
    return Path(args.out)


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    print(path)
    return path


def _write_json(out_dir: Path, name: str, obj) -> Path:
    return _write(out_dir, name, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _symmetric_grid(x_max: float, n: int) -> np.ndarray:
    # exact +-pair symmetry about 0 (emitted ascending)
    h = 2.0 * x_max / (n - 1)
    return (np.arange(n) - 0.5 * (n - 1)) * h


def _positive(args, **named):
    for name, value in named.items():
        if not value > 0:
            raise ValidationError(f"--{name} must be positive, got {value}")


# ---------------------------------------------------------------------------
# subcommands

def cmd_potential(args) -> int:
    p = dimensionless_params(args)
    lams = [float(s) for s in args.lambdas.split(",") if s.strip()]
    if not lams:
        raise ValidationError("--lambdas must list at least one coupling")
    if any(l < 0 for l in lams):
        raise ValidationError("couplings in --lambdas must be non-negative")
    _positive(args, x_max=args.x_max)
    if args.n_points < 3:
        raise ValidationError(f"--n-points must be >= 3, got {args.n_points}")
    x = _symmetric_grid(args.x_max, args.n_points)

    def curve(lam):
        return mf.effective_potential(dataclasses.replace(p, lam=lam), x)

    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        curves = list(pool.map(curve, lams))
    out = _out_dir(args)
    for lam, v in zip(lams, curves):
        _write(out, f"potential_lambda_{format_float(lam)}.csv",
               render_csv(POTENTIAL_CSV_HEADER, zip(x, v)))
    return 0


def cmd_sweep(args) -> int:
    p = dimensionless_params(args)
    grid = mf.make_mu_grid(args.mu_min, args.mu_max, args.n_points,
                           spacing=args.spacing)
    table = mf.sweep(p, grid)
    _write(_out_dir(args), "sweep.csv", mf.sweep_csv(table))
    return 0


def cmd_spectrum(args) -> int:
    p = dimensionless_params(args)
    if not args.mu_max > args.mu_min:
        raise ValidationError("--mu-max must exceed --mu-min")
    if args.mu_min < 0:
        raise ValidationError("--mu-min must be non-negative")
    if args.n_points < 2:
        raise ValidationError(f"--n-points must be >= 2, got {args.n_points}")
    grid = np.linspace(args.mu_min, args.mu_max, args.n_points)
    scan = st.scan_spectrum(p, grid)
    _write(_out_dir(args), "spectrum.csv", st.scan_csv(scan))
    return 0


def _solve_ground(args, p: DimensionlessParams):
    itc = q1.ImagTimeConfig(max_steps=args.max_steps)
    if args.half_domain:
        grid = q1.default_grid_half(p, n_points=args.n_points)
        return q1.ground_state_half_domain(p, grid=grid, itc=itc)
    grid = q1.default_grid(p, n_points=args.n_points)
    return q1.ground_state(p, grid=grid, itc=itc)


def cmd_groundstate(args) -> int:
    p = dimensionless_params(args)
    psi = _solve_ground(args, p)
    _write(_out_dir(args), "wavefunction.csv", q1.wavefunction_csv(psi))
    return 0


def cmd_wigner(args) -> int:
    p = dimensionless_params(args)
    psi = _solve_ground(args, p)
    p_grid = q1.default_momentum_grid(psi.grid, n_min=args.p_points)
    w = q1.wigner(psi, p_grid=p_grid)
    _write(_out_dir(args), "wigner.csv", q1.wigner_csv(w))
    return 0


def cmd_fock(args) -> int:
    p = dimensionless_params(args)
    t = fc.FockTruncation(args.n_max_a, args.n_max_b, args.n_max_c,
                          budget=args.budget)
    report = {
        "dims": list(t.dims),
        "dim": t.dim,
        "number_conservation": fc.check_number_conservation(p, t),
        "dicke_equivalence": fc.check_dicke_equivalence(p, t),
        "parity_plus": fc.check_parity(p, t, +1),
        "parity_minus": fc.check_parity(p, t, -1),
    }
    out = _out_dir(args)
    _write_json(out, "fock.json", report)
    if args.dump:
        ops = {
            "hamiltonian": lambda: fc.build_hamiltonian(p, t),
            "dicke": lambda: fc.dicke_hamiltonian(p, t),
            "sx": lambda: fc.schwinger_operators(t)[0],
            "sy": lambda: fc.schwinger_operators(t)[1],
            "sz": lambda: fc.schwinger_operators(t)[2],
            "x": lambda: fc.position_operator(t),
            "p": lambda: fc.momentum_operator(t),
            "n_tot": lambda: fc.total_number(t),
            "parity_plus": lambda: fc.parity_operator(t, +1),
            "parity_minus": lambda: fc.parity_operator(t, -1),
        }
        _write(out, f"fock_{args.dump}.csv", fc.operator_csv(ops[args.dump]()))
    return 0


def _lab_inputs(args):
    pp = physical_params(args)
    g = args.g if args.g is not None else coupling_from_reflectivity(pp)
    kappa = args.kappa if args.kappa is not None else pp.omega
    _positive(args, g=g, kappa=kappa)
    echo = {f.name: getattr(pp, f.name) for f in dataclasses.fields(pp)}
    echo.update(g=g, kappa=kappa, P_over_Pc=args.p_over_pc)
    return pp, g, kappa, echo


def cmd_lab(args) -> int:
    pp, g, kappa, echo = _lab_inputs(args)
    rep = ex.lab_report(pp, g, kappa, args.p_over_pc)
    _write_json(_out_dir(args), "lab.json",
                {"input": echo, "estimate": dataclasses.asdict(rep)})
    return 0


def cmd_cat(args) -> int:
    pp, g, kappa, echo = _lab_inputs(args)
    cs = ex.cat_sensitivity(pp, g, kappa, args.p_over_pc)
    _write_json(_out_dir(args), "cat.json",
                {"input": echo, "sensitivity": dataclasses.asdict(cs)})
    return 0


def cmd_dynamics(args) -> int:
    p = dimensionless_params(args)
    _positive(args, t_max=args.t_max)
    if args.stride < 1:
        raise ValidationError(f"--stride must be >= 1, got {args.stride}")
    cfg = dyn.IntegratorConfig(dt=args.dt)
    init = dyn.StateVector(x=args.x0)
    traj = dyn.integrate_trajectory(p, init, args.t_max, cfg, stride=args.stride)
    _write(_out_dir(args), "trajectory.csv", dyn.trajectory_csv(traj))
    return 0


# ---------------------------------------------------------------------------
# parser / entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML/JSON parameter file")
    common.add_argument("--param", action="append", metavar="KEY=VALUE",
                        help="inline parameter override (repeatable; beats --config)")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for parallel sweeps")

    ap = argparse.ArgumentParser(
        prog="mimdicke",
        description="Membrane-in-the-middle Dicke-type transition toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("potential", parents=[common],
                        help="effective-potential curves for a coupling list")
    sp.add_argument("--lambdas", default="0.5,1,2,10",
                    help="comma-separated couplings (default 0.5,1,2,10)")
    sp.add_argument("--x-max", type=float, default=30.0)
    sp.add_argument("--n-points", type=int, default=1001)
    sp.set_defaults(func=cmd_potential)

    sp = sub.add_parser("sweep", parents=[common],
                        help="steady-state observables across mu")
    sp.add_argument("--mu-min", type=float, default=0.05)
    sp.add_argument("--mu-max", type=float, default=3.0)
    sp.add_argument("--n-points", type=int, default=512)
    sp.add_argument("--spacing", choices=("linear", "log"), default="linear")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("spectrum", parents=[common],
                        help="excitation spectrum across mu (normal branch)")
    sp.add_argument("--mu-min", type=float, default=0.0)
    sp.add_argument("--mu-max", type=float, default=1.5)
    sp.add_argument("--n-points", type=int, default=301)
    sp.set_defaults(func=cmd_spectrum)

    for name, fn, hlp in (("groundstate", cmd_groundstate,
                           "imaginary-time membrane ground state"),
                          ("wigner", cmd_wigner,
                           "Wigner function of the membrane ground state")):
        sp = sub.add_parser(name, parents=[common], help=hlp)
        sp.add_argument("--n-points", type=int,
                        default=2048 if name == "groundstate" else 512)
        sp.add_argument("--half-domain", action="store_true",
                        help="solve on x > 0 with a wall at the origin")
        sp.add_argument("--max-steps", type=int, default=500_000,
                        help="imaginary-time step budget before giving up")
        if name == "wigner":
            sp.add_argument("--p-points", type=int, default=512,
                            help="minimum number of momentum samples")
        sp.set_defaults(func=fn)

    sp = sub.add_parser("fock", parents=[common],
                        help="exact operator checks on a truncated Fock space")
    sp.add_argument("--n-max-a", type=int, default=3)
    sp.add_argument("--n-max-b", type=int, default=3)
    sp.add_argument("--n-max-c", type=int, default=3)
    sp.add_argument("--budget", type=int, default=fc.DEFAULT_DIMENSION_BUDGET)
    sp.add_argument("--dump", choices=_FOCK_OPERATORS,
                    help="also dump one operator as CSV")
    sp.set_defaults(func=cmd_fock)

    for name, fn, hlp in (("lab", cmd_lab, "laboratory feasibility report"),
                          ("cat", cmd_cat, "cat-state sensitivity report")):
        sp = sub.add_parser(name, parents=[common], help=hlp)
        sp.add_argument("--g", type=float, default=None,
                        help="photon tunneling rate rad/s (default: from reflectivity)")
        sp.add_argument("--kappa", type=float, default=None,
                        help="cavity loss rate rad/s (default: omega)")
        sp.add_argument("--p-over-pc", type=float, default=1.1)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("dynamics", parents=[common],
                        help="classical trajectory from a small displacement")
    sp.add_argument("--t-max", type=float, default=200.0)
    sp.add_argument("--dt", type=float, default=None,
                    help="RK4 step (default: 1e-3/max(g, kappa, 1))")
    sp.add_argument("--stride", type=int, default=10,
                    help="record every n-th step")
    sp.add_argument("--x0", type=float, default=1e-3,
                    help="initial membrane displacement")
    sp.set_defaults(func=cmd_dynamics)
    return ap


def _emit_error(kind: str, message: str) -> None:
    json.dump({"error": {"type": kind, "message": message}}, sys.stderr)
    sys.stderr.write("\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        # argparse exits 2 on usage errors (it has printed usage already);
        # --help exits 0
        return 0 if err.code == 0 else 1
    try:
        if getattr(args, "threads", 1) < 1:
            raise ValidationError(f"--threads must be >= 1, got {args.threads}")
        return args.func(args)
    except ValidationError as err:
        _emit_error("ValidationError", str(err))
        return 1
    except ConvergenceError as err:
        _emit_error("ConvergenceError", str(err))
        return 2
    except OSError as err:
        _emit_error("OSError", str(err))
        return 1


if __name__ == "__main__":
    sys.exit(main())
