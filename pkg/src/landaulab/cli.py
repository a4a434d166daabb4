"""Command-line front end: verify / solve / decay.

Every run echoes its fully resolved configuration into the output directory
and writes only deterministic content (no timestamps), so reruns with the
same configuration, seed and thread count are bit-identical.

Exit codes: 0 pass, 1 verdict failure, 2 usage, 3 insufficient data,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from . import asymptotics as asym
from . import dist as distmod
from . import functionals as fun
from . import inequalities as ineq
from . import solver as solvermod
from .errors import (
    GridConfigError,
    InsufficientDataError,
    LandauLabError,
    NonFiniteFieldError,
    OverflowGuardError,
    ParameterDomainError,
    StepSizeError,
)
from .grid import build_grid

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_USAGE = 2
EXIT_INSUFFICIENT = 3
EXIT_NUMERIC = 4

CHECK_NAMES = ("entropy", "cercignani", "l3", "prop31", "prop32", "prop33",
               "bakry", "coercivity", "interp", "bfield")


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default="landau_out", help="output directory")
    parser.add_argument("--config", default=None,
                        help="key = value file; command-line flags override it")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (fallback: LANDAU_LAB_THREADS)")
    parser.add_argument("--N", type=int, default=32, dest="points")
    parser.add_argument("--L", type=float, default=7.0, dest="extent")
    parser.add_argument("--gamma", type=float, default=-3.0)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--count", type=int, default=20)
    parser.add_argument("--hbar", type=float, default=0.0,
                        help="entropy bound for the random corpus")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="landau-lab",
        description="desk-scale verification lab for soft-potential collision dynamics")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    p_verify = sub.add_parser("verify", help="run inequality checks")
    _common(p_verify)
    p_verify.add_argument("--check", action="append", default=None,
                          choices=CHECK_NAMES + ("all",),
                          help="check name (repeatable); default: all")
    p_verify.add_argument("--R", type=float, default=4.0,
                          help="tail radius for the cutoff entropy bound")

    p_solve = sub.add_parser("solve", help="integrate the collision dynamics")
    _common(p_solve)
    p_solve.add_argument("--init", default="bimax",
                         choices=("maxwellian", "bimax", "aniso"))
    p_solve.add_argument("--u0", type=float, default=1.0,
                         help="drift speed of the two-bump initial state")
    p_solve.add_argument("--temps", default="1.5,1.0,0.5",
                         help="axis temperatures of the anisotropic initial state")
    p_solve.add_argument("--tend", type=float, default=1.0)
    p_solve.add_argument("--dt", type=float, default=None,
                         help="fixed step; default adaptive")
    p_solve.add_argument("--dt-max", type=float, default=0.5, dest="dt_max")
    p_solve.add_argument("--stepper", default="euler", choices=("euler", "heun"))
    p_solve.add_argument("--stride", type=int, default=5)
    p_solve.add_argument("--no-projection", action="store_true")
    p_solve.add_argument("--track-ell", type=float, default=10.0, dest="track_ell")

    p_decay = sub.add_parser("decay", help="fit decay laws on a solve output")
    _common(p_decay)
    p_decay.add_argument("--traj", required=True,
                         help="directory holding diagnostics.csv from `solve`")
    p_decay.add_argument("--mode", default="algebraic",
                         choices=("algebraic", "stretched"))
    p_decay.add_argument("--ell", type=float, default=10.0)
    p_decay.add_argument("--s", type=float, default=0.5)
    subparsers.update(verify=p_verify, solve=p_solve, decay=p_decay)
    return parser, subparsers


def _apply_config_file(parser, subparsers, argv):
    ns, _ = parser.parse_known_args(argv)
    path = getattr(ns, "config", None)
    if not path:
        return argv
    valid = set()
    for action in subparsers[ns.command]._actions:
        valid.update(a.lstrip("-").replace("-", "_") for a in action.option_strings)
    overrides = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise GridConfigError(f"malformed config line: {raw.rstrip()}")
            key, val = (s.strip() for s in line.split("=", 1))
            key_norm = key.replace("-", "_")
            if key_norm not in valid:
                raise GridConfigError(f"unknown config key: {key}")
            overrides += [f"--{key_norm.replace('_', '-')}", val]
    # config first so explicit flags win
    return [argv[0]] + overrides + argv[1:]


def _setup_threads(ns) -> int:
    import numba

    threads = ns.threads
    if threads is None:
        env = os.environ.get("LANDAU_LAB_THREADS")
        threads = int(env) if env else numba.get_num_threads()
    numba.set_num_threads(threads)
    return threads


def _echo_config(ns, outdir, threads) -> None:
    os.makedirs(outdir, exist_ok=True)
    items = sorted(vars(ns).items())
    lines = [f"version = {__version__}", f"threads = {threads}"]
    lines += [f"{k} = {v}" for k, v in items if k != "config"]
    with open(os.path.join(outdir, "config_resolved.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _initial_state(ns, grid):
    if ns.init == "maxwellian":
        return distmod.maxwellian(grid)
    if ns.init == "bimax":
        u0 = ns.u0
        t = 1.0 - u0 * u0 / 3.0
        if t <= 0:
            raise GridConfigError(f"drift speed {u0} leaves no thermal energy")
        return distmod.normalize(distmod.gaussian_mixture(
            grid, [(0.5, (u0, 0.0, 0.0), t), (0.5, (-u0, 0.0, 0.0), t)]))
    temps = tuple(float(x) for x in ns.temps.split(","))
    if len(temps) != 3:
        raise GridConfigError(f"--temps needs three values, got {ns.temps}")
    return distmod.normalize(distmod.anisotropic_gaussian(grid, *temps))


def _cmd_verify(ns) -> int:
    checks = ns.check or ["all"]
    if "all" in checks:
        checks = list(CHECK_NAMES)
    grid = build_grid(ns.extent, ns.points)
    corpus = distmod.random_corpus(grid, ns.seed, ns.count, ns.hbar)
    verdicts = []
    for name in checks:
        if name == "entropy":
            verdicts.append(ineq.check_entropy_dissipation_bound(corpus, ns.gamma))
        elif name == "cercignani":
            for f in corpus[:5]:
                verdicts.append(ineq.check_cercignani(f, ns.R))
        elif name == "l3":
            verdicts.append(ineq.check_l3_regularity(corpus))
        elif name == "prop31":
            aniso = distmod.normalize(
                distmod.anisotropic_gaussian(grid, 1.5, 1.0, 0.5))
            verdicts.append(ineq.check_score_reconstruction(aniso))
        elif name == "prop32":
            for f in corpus[:10]:
                verdicts.append(ineq.check_fisher_pressure_bound(f))
        elif name == "prop33":
            verdicts.append(ineq.check_pressure_defect_bounds(corpus, ns.hbar))
        elif name == "bakry":
            verdicts.append(ineq.check_log_sobolev_hessian())
        elif name == "coercivity":
            verdicts.append(ineq.check_coercivity(
                corpus[:10], ell=4.0, gamma=min(ns.gamma, -1e-6), eta=0.5))
        elif name == "interp":
            for f in corpus[:5]:
                verdicts.append(ineq.check_entropy_interpolation(f, r=5.0 / 3.0,
                                                                 alpha=2.0))
            verdicts.append(ineq.check_entropy_interpolation_stretched(
                corpus[0], r=5.0 / 3.0, s=0.5, kappa=0.05, kappa1=0.1, kappa2=0.2))
        elif name == "bfield":
            verdicts.append(ineq.check_kernel_divergence(ns.gamma))
    outdir = ns.out
    ineq.write_verdicts(os.path.join(outdir, "verdicts.jsonl"), verdicts)
    table = ineq.summary_table(verdicts)
    with open(os.path.join(outdir, "summary.txt"), "w") as fh:
        fh.write(table + "\n")
    print(table)
    failed = [v for v in verdicts if not v.vacuous and not v.holds]
    return EXIT_VERDICT if failed else EXIT_OK


def _cmd_solve(ns) -> int:
    grid = build_grid(ns.extent, ns.points)
    f0 = _initial_state(ns, grid)
    cfg = solvermod.SolverConfig(
        gamma=ns.gamma, half_extent=ns.extent, points_per_axis=ns.points,
        t_end=ns.tend, dt=ns.dt, dt_max=ns.dt_max, stepper=ns.stepper,
        conservation_projection=not ns.no_projection,
        snapshot_stride=ns.stride, track_ell=ns.track_ell)
    traj = solvermod.solve(f0, cfg)
    outdir = ns.out
    with open(os.path.join(outdir, "diagnostics.csv"), "w") as fh:
        fh.write(traj.diagnostics_csv())
    for idx, (t, snap) in enumerate(traj.snapshots):
        distmod.save_snapshot(
            os.path.join(outdir, f"snap_{idx:06d}.lgrid"), snap, ns.gamma, t)
    print(f"steps: {len(traj.records) - 1}  snapshots: {len(traj.snapshots)}  "
          f"final relH: {traj.column('relH')[-1]:.6e}")
    return EXIT_OK


def _cmd_decay(ns) -> int:
    csv_path = os.path.join(ns.traj, "diagnostics.csv")
    if not os.path.exists(csv_path):
        raise GridConfigError(f"no diagnostics.csv under {ns.traj}")
    view = solvermod.load_diagnostics_csv(csv_path, track_ell=ns.ell)
    envelopes = asym.track_moments(view, orders=(5.0, ns.ell), gamma=ns.gamma)
    fit = asym.fit_decay(view.times, view.column("relH"), mode=ns.mode, s=ns.s)
    monitor = asym.monitor_dissipation_inequality(view, ns.ell)
    outdir = ns.out
    payload = {
        "mode": ns.mode,
        "exponent": fit.exponent,
        "amplitude": fit.amplitude,
        "envelope_amplitude": fit.envelope_amplitude,
        "residual": fit.residual,
        "schedule": {"ell": monitor.schedule.ell, "nu": monitor.schedule.nu,
                     "a": monitor.schedule.a, "b": monitor.schedule.b},
        "c1": monitor.c1,
        "c2": monitor.c2,
        "bound_dominates": monitor.dominated,
        "theory_exponent_sup": asym.decay_exponent_ell(ns.ell),
    }
    with open(os.path.join(outdir, "fits.json"), "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
    with open(os.path.join(outdir, "envelopes.json"), "w") as fh:
        json.dump([{"order": e.order, "intercept": e.intercept, "slope": e.slope,
                    "theory_slope_scale": e.theory_slope_scale}
                   for e in envelopes], fh, sort_keys=True, indent=1)
    lines = ["time,relH,gronwall_bound"]
    lines += [f"{t!r},{m!r},{b!r}" for t, m, b in
              zip(monitor.times, monitor.measured, monitor.bound)]
    with open(os.path.join(outdir, "monitor.csv"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(json.dumps(payload, sort_keys=True, indent=1))
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    try:
        argv = _apply_config_file(parser, subparsers, argv)
        ns = parser.parse_args(argv)
        threads = _setup_threads(ns)
        _echo_config(ns, ns.out, threads)
        if ns.command == "verify":
            return _cmd_verify(ns)
        if ns.command == "solve":
            return _cmd_solve(ns)
        return _cmd_decay(ns)
    except (InsufficientDataError,) as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except (OverflowGuardError, StepSizeError, NonFiniteFieldError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GridConfigError, ParameterDomainError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LandauLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
