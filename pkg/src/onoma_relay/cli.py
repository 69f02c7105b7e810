"""Command line entry point: ``sweep``, ``validate`` and ``report``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .errors import ConfigError, MissingPair, NonConvergence, QuadratureFailure
from .scenario import Engine, OmegaInterpretation, parse_scenario, preset
from .sweep import compare_report, emit_csv, plot_script, read_csv, run_sweep
from .validation import validate

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONFIG = 3
EXIT_NUMERICAL = 4

log = logging.getLogger("onoma_relay")


def _scenario_from_args(args):
    scenario = preset(args.preset) if args.preset else parse_scenario(args.config)
    changes = {}
    if getattr(args, "engine", None):
        changes["engines"] = {
            "analytic": (Engine.ANALYTIC,),
            "mc": (Engine.MONTE_CARLO,),
            "both": (Engine.ANALYTIC, Engine.MONTE_CARLO),
        }[args.engine]
    mc_changes = {}
    if args.seed is not None:
        mc_changes["seed"] = args.seed
    if args.samples is not None:
        mc_changes["n_samples"] = args.samples
    if getattr(args, "chunk_size", None) is not None:
        mc_changes["chunk_size"] = args.chunk_size
    if mc_changes:
        try:
            changes["mc"] = dataclasses.replace(scenario.mc, **mc_changes)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if args.omega_squared:
        changes["omega_interpretation"] = OmegaInterpretation.SQUARED
    return scenario.replace(**changes)


def _add_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="fig4, fig8, fig9 or fig10")
    src.add_argument("--config", help="scenario config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int, help="Monte Carlo draws per point")
    p.add_argument("--omega-squared", action="store_true", help="read omega_* as amplitudes (mean power = omega^2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="onoma-relay", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="evaluate average rates over a parameter grid")
    _add_source(p)
    p.add_argument("--engine", choices=("analytic", "mc", "both"))
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--plot-script", help="also write a gnuplot script reading the CSV")
    p.add_argument("--workers", type=int, default=1, help="threads for Monte Carlo chunks")
    p.add_argument("--chunk-size", type=int)

    p = sub.add_parser("validate", help="run the self-check suite")
    _add_source(p)
    p.add_argument("--no-reference-targets", action="store_true", help="skip reference-value comparisons")

    p = sub.add_parser("report", help="summarize gains from a sweep CSV")
    p.add_argument("--in", dest="inp", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "sweep":
            return _sweep(args)
        if args.command == "validate":
            scenario = _scenario_from_args(args)
            report = validate(scenario, reference_targets=not args.no_reference_targets)
            sys.stdout.write(report.text())
            return EXIT_OK if report.ok else EXIT_VALIDATION
        rows = read_csv(args.inp)
        sys.stdout.write(compare_report(rows))
        return EXIT_OK
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingPair as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NonConvergence, QuadratureFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def _sweep(args) -> int:
    scenario = _scenario_from_args(args)
    log.info("sweeping %s: %d a2 x %d rho points", scenario.name, len(scenario.a2_grid), len(scenario.rho_db_grid))
    rows = run_sweep(scenario, workers=args.workers)
    if args.out:
        emit_csv(rows, args.out)
    else:
        emit_csv(rows, sys.stdout)
    if args.plot_script:
        with open(args.plot_script, "w", encoding="utf-8") as fh:
            fh.write(plot_script(args.out or "rates.csv", scenario))
    failed = [r for r in rows if r.failed]
    for r in failed:
        print(f"row failed (a2={r.a2}, rho_db={r.rho_db}, {r.scheme.value}/{r.engine.value}): {r.error}", file=sys.stderr)
    return EXIT_NUMERICAL if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
