"""Command-line entry point.

    geodissip run <config> [--plot]
    geodissip chern <config>
    geodissip estimate --field F --omega1 W1 --omega2 W2 --tau2 T --chern C [--n-atoms N]

Exit codes: 0 success, 1 invariant violation, 2 configuration error,
3 gap closure or unresolved topology.
"""

from __future__ import annotations

import argparse
import sys

from .config import build_config, load_config
from .errors import ConfigError, GapClosure, InvariantViolation, UnresolvedTopology
from .experiments import model_from, physical_estimate, run_experiment, write_csv
from .geometry import chern_number

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_TOPOLOGY = 0, 1, 2, 3


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    table = run_experiment(cfg)
    out = cfg.output_path
    write_csv(table, out)
    print(f"wrote {out} ({len(table.rows)} rows)")
    if args.plot or cfg.plot:
        from .plotting import plot_table

        for p in plot_table(cfg.experiment, table, out):
            print(f"wrote {p}")
    return EXIT_OK


def _cmd_chern(args) -> int:
    cfg = load_config(args.config, required=("omega1", "omega2"))
    c = chern_number(model_from(cfg), cfg.n_chern)
    print(c)
    return EXIT_OK


def _cmd_estimate(args) -> int:
    raw = dict(experiment="estimate", field_amplitude=args.field, omega1=args.omega1, omega2=args.omega2,
               tau2=args.tau2, chern=args.chern, n_atoms=args.n_atoms)
    build_config(raw)  # same validation as a config file
    r = physical_estimate(args.field, args.omega1, args.omega2, args.tau2, args.chern, args.n_atoms)
    print("convention      gamma        W_d [W]      dT/dt [K/s]")
    print(f"delta = |B|     {r.gamma:<12.4g} {r.w_d:<12.4g} {r.dT_dt:.4g}")
    print(f"delta = 2|B|    {r.gamma_alt:<12.4g} {r.w_d_alt:<12.4g} {r.dT_dt_alt:.4g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="geodissip", description="Geometric dissipation in driven two-level systems")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config")
    run.add_argument("--plot", action="store_true", help="also write PNG figures next to the CSV")
    run.set_defaults(func=_cmd_run)

    ch = sub.add_parser("chern", help="print the Chern number of the configured model")
    ch.add_argument("config")
    ch.set_defaults(func=_cmd_chern)

    est = sub.add_parser("estimate", help="heating rate of an atomic cloud in SI units")
    est.add_argument("--field", type=float, required=True, help="field amplitude |B| [rad/s]")
    est.add_argument("--omega1", type=float, required=True, help="[rad/s]")
    est.add_argument("--omega2", type=float, required=True, help="[rad/s]")
    est.add_argument("--tau2", type=float, required=True, help="transverse relaxation time [s]")
    est.add_argument("--chern", type=int, required=True)
    est.add_argument("--n-atoms", type=int, default=1)
    est.set_defaults(func=_cmd_estimate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GapClosure, UnresolvedTopology) as exc:
        print(f"topology error: {exc}", file=sys.stderr)
        return EXIT_TOPOLOGY
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
