"""Command line entry point: ``risfbl simulate`` and ``risfbl plot``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import harness
from .config import ConfigError, load_config

EXIT_OK, EXIT_CONFIG, EXIT_TRIAL = 0, 1, 2

# CLI name -> harness sweep, with default grids (power in W)
SWEEP_NAMES = {"alpha": "alpha", "n": "ris_elements", "power": "power", "rho": "csi_rho"}
DEFAULT_VALUES = {
    "alpha": [0.01, 0.2, 0.4, 0.6, 0.8, 0.99],
    "n": [16, 25, 64, 100],
    "power": [0.01, 0.05, 0.1, 0.3],
    "rho": [0.0, 0.05, 0.1, 0.2],
}

log = logging.getLogger("risfbl")


def _values(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="risfbl", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo sweep and write CSVs")
    sim.add_argument("--config", type=Path, help="JSON file with flat keys; defaults if omitted")
    sim.add_argument("--sweep", choices=sorted(SWEEP_NAMES), required=True)
    sim.add_argument("--values", type=_values, help="comma-separated sweep values (power in W)")
    sim.add_argument("--realizations", type=int, default=20)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", type=Path, required=True)
    sim.add_argument("--no-baseline", action="store_true", help="skip the random-phase variant")
    sim.add_argument("--exact-dispersion", action="store_true",
                     help="use the SINR-dependent dispersion inside the solvers too")
    sim.add_argument("--jobs", type=int, default=1, help="worker processes (0 = all CPUs)")
    sim.add_argument("--timings", action="store_true",
                     help="write measured runtimes (output is then no longer byte-reproducible)")
    sim.add_argument("--plot", action="store_true", help="also render a PNG next to the CSVs")

    plot = sub.add_parser("plot", help="render a PNG from a summary CSV")
    plot.add_argument("summary", type=Path)
    plot.add_argument("--sweep", choices=sorted(SWEEP_NAMES), required=True)
    plot.add_argument("--out", type=Path, help="output image (default: next to the CSV)")
    return parser


def _print_summary(summary, sweep: str) -> None:
    print(f"{sweep:>10} {'variant':>13} {'n':>4} {'L_fbl':>12} {'m_total':>10} {'iters':>6}")
    for e in summary:
        print(f"{e['sweep']:>10.4g} {e['variant']:>13} {e['n']:>4d} {e['L_fbl_mean']:>12.2f} "
              f"{e['m_total_mean']:>10.2f} {e['iters_mean']:>6.1f}")


def cmd_simulate(args) -> int:
    try:
        overrides = {"solver_dispersion": "exact"} if args.exact_dispersion else {}
        config = load_config(args.config, **overrides)
        if args.realizations < 1:
            raise ConfigError("realizations: must be >= 1")
        values = args.values if args.values else DEFAULT_VALUES[args.sweep]
        sweep = SWEEP_NAMES[args.sweep]
        for v in values:  # surface bad sweep values before any work is done
            harness.sweep_config(config, sweep, v)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    jobs = args.jobs if args.jobs > 0 else (os.cpu_count() or 1)
    args.out.mkdir(parents=True, exist_ok=True)
    log.info("sweep %s over %s, %d realizations, %d job(s)", sweep, values, args.realizations, jobs)
    records = harness.run_sweep(config, sweep, values, args.realizations, args.seed,
                                baseline=not args.no_baseline, jobs=jobs)

    paths = harness.output_paths(args.out, args.sweep)
    harness.write_csv(records, paths["trials"], timings=args.timings)
    summary = harness.aggregate(records)
    harness.write_aggregate_csv(summary, paths["summary"], timings=args.timings)
    failed = harness.write_failures(records, paths["failures"])
    if args.plot:
        from .plotting import plot_summary

        plot_summary(summary, sweep, paths["figure"])
    _print_summary(summary, args.sweep)
    if failed:
        print(f"{failed} trial(s) failed, see {paths['failures']}", file=sys.stderr)
        return EXIT_TRIAL
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import plot_summary

    summary = harness.read_aggregate_csv(args.summary)
    out = args.out if args.out else args.summary.with_suffix(".png")
    plot_summary(summary, SWEEP_NAMES[args.sweep], out)
    print(out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "simulate":
        return cmd_simulate(args)
    return cmd_plot(args)


if __name__ == "__main__":
    sys.exit(main())
