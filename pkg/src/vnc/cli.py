"""``vnc`` command line: simulate, decay, verify, list.

Exit codes: 0 ok, 1 verification failure, 2 input or configuration error,
3 numerical failure during a run, 4 not enough data for a decay fit.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .csvio import read_csv, write_csv
from .dynamics import Law, RhsKind
from .errors import ConfigError, InsufficientData, VncError
from .model import State
from .simulation import fit_decay_rate, integrate

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_DATA = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which matches the input-error code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _vector(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty vector")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vnc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="integrate a system and write a trajectory CSV")
    source = sim.add_mutually_exclusive_group(required=True)
    source.add_argument("--system", help="built-in system name (see `vnc list`)")
    source.add_argument("--file", type=Path, help="YAML system definition")
    sim.add_argument("--dt", type=float)
    sim.add_argument("--t-final", type=float)
    sim.add_argument("--gain", type=float, help="stabilizing gain k")
    sim.add_argument("--law", choices=[law.value for law in Law], default=Law.STABILIZING.value)
    sim.add_argument("--q0", type=_vector, help="initial configuration, e.g. 1,1,3.14")
    sim.add_argument("--v0", type=_vector, help="initial velocity")
    sim.add_argument("--output", type=Path, help="CSV path (default: stdout)")
    sim.add_argument("--plots", type=Path, help="directory for figures and plot script")

    dec = sub.add_parser("decay", help="fit exponential decay rates of the constraint values")
    dec.add_argument("--input", type=Path, required=True)
    dec.add_argument("--window", type=float, nargs=2, metavar=("A", "B"))

    ver = sub.add_parser("verify", help="run the verification checks")
    ver.add_argument("--filter", help="only run checks whose name contains this text")

    sub.add_parser("list", help="list built-in systems")
    return parser


def _load(args):
    if args.system is not None:
        from .systems import get_system
        try:
            entry = get_system(args.system)
        except KeyError as err:
            raise ConfigError(err.args[0]) from None
        return entry.problem, entry.config
    from .sysfile import load_system
    if not args.file.is_file():
        raise ConfigError(f"no such file: {args.file}")
    definition = load_system(args.file)
    return definition.problem, definition.config


def cmd_simulate(args) -> int:
    (system, constraints, inputs), config = _load(args)
    gain = config.rhs_kind.gain if args.gain is None else args.gain
    law = Law(args.law)
    try:
        kind = RhsKind.stabilizing(gain) if law is Law.STABILIZING else RhsKind(law)
    except ValueError as err:
        raise ConfigError(str(err)) from None
    state = config.initial_state
    q0 = state.q if args.q0 is None else args.q0
    v0 = state.v if args.v0 is None else args.v0
    for label, vec in (("--q0", q0), ("--v0", v0)):
        if len(vec) != system.dim:
            raise ConfigError(f"{label} needs {system.dim} values, got {len(vec)}")
    config = config.replace(
        dt=config.dt if args.dt is None else args.dt,
        t_final=config.t_final if args.t_final is None else args.t_final,
        initial_state=State(q0, v0),
        rhs_kind=kind,
    )
    traj = integrate(system, constraints, inputs, config)

    if args.output is None:
        write_csv(traj, sys.stdout)
    else:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        write_csv(traj, args.output)
        print(f"wrote {len(traj)} samples to {args.output}", file=sys.stderr)
    if args.plots is not None:
        from .plotting import render_figures
        csv_name = args.output.name if args.output is not None else "trajectory.csv"
        paths = render_figures(traj, args.plots, csv_name)
        for path in paths.values():
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_decay(args) -> int:
    traj = read_csv(args.input)
    window = tuple(args.window) if args.window else None
    if window is not None and window[1] < window[0]:
        raise ConfigError(f"window {window[0]} {window[1]} is reversed")
    fit = fit_decay_rate(traj, window)
    print(f"{'constraint':<12}{'rate':>14}{'intercept':>14}{'residual':>14}{'samples':>9}")
    for b in range(len(fit.rates)):
        print(f"muhat_{b + 1:<6}{fit.rates[b]:>14.6f}{fit.intercepts[b]:>14.6f}"
              f"{fit.residuals[b]:>14.3e}{fit.n_samples[b]:>9d}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .checks import run_checks
    results = run_checks(args.filter)
    if not results:
        print(f"no checks match {args.filter!r}", file=sys.stderr)
        return EXIT_INPUT
    for result in results:
        print(result.line(), flush=True)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_list(args) -> int:
    from .systems import CATALOG, get_system
    for name in CATALOG:
        entry = get_system(name)
        print(f"{name:<22}n={entry.system.dim} m={entry.constraints.m} "
              f"coords={','.join(entry.system.coord_names)}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "decay": cmd_decay, "verify": cmd_verify, "list": cmd_list}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code
    try:
        with np.errstate(all="ignore"):
            return COMMANDS[args.command](args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except InsufficientData as err:
        print(f"error: insufficient data: {err}", file=sys.stderr)
        return EXIT_DATA
    except VncError as err:
        when = getattr(err, "t", None)
        suffix = f" (at t={when:g})" if when is not None else ""
        print(f"error: {type(err).__name__}: {err}{suffix}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
