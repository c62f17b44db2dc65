"""Command-line front end.

Subcommands: combinatorics, identities, mc, pathwise. Exit codes: 0 when
every gated row passes, 1 when an assertion-style row fails, 2 for usage
or configuration errors. Reports go to --out as CSV, or to stdout.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (ExperimentConfig, all_rows_pass, discrete_identity_details,
                      parse_config, rows_to_csv, run_combinatorics_suite,
                      run_mc_convergence, run_subordinator_pathwise, write_report)

PASS, FAIL, USAGE = 0, 1, 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stratolevy",
        description="Identity suites and Monte Carlo studies for multiple "
                    "stochastic integrals on dyadic grids.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("combinatorics",
                       help="exhaustive partition-lattice checks")
    p.add_argument("--max-n", type=int, default=5, metavar="K",
                   help="largest ground-set size to check (<= 7)")
    p.add_argument("--out", metavar="PATH", help="write the CSV report here")

    p = sub.add_parser("identities",
                       help="randomized exact identities for the discrete "
                            "integrals")
    p.add_argument("--trials", type=int, default=100, metavar="K")
    p.add_argument("--seed", type=int, default=2024, metavar="U64")
    p.add_argument("--out", metavar="PATH")

    for name, help_text in (("mc", "Monte Carlo convergence studies"),
                            ("pathwise", "subordinator jump-list integrals "
                                         "vs grid integrals")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--seed", type=int, metavar="U64",
                       help="override the seed from the config")
        p.add_argument("--out", metavar="PATH",
                       help="override the output path from the config")
    return parser


def _emit(rows, out_path: str | None) -> None:
    if out_path:
        write_report(rows, out_path)
    else:
        sys.stdout.write(rows_to_csv(rows))


def _load_config(args) -> ExperimentConfig:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            mapping = parse_config(fh.read())
    except OSError as exc:
        raise ValueError(f"cannot read config {args.config!r}: {exc}")
    if args.seed is not None:
        mapping["seed"] = str(args.seed)
    config = ExperimentConfig.from_mapping(mapping)
    if args.out is not None:
        config.out = args.out
    return config


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code not in (0, None) else int(exc.code or 0)

    try:
        if args.command == "combinatorics":
            rows = run_combinatorics_suite(args.max_n)
            _emit(rows, args.out)
        elif args.command == "identities":
            rows, failures = discrete_identity_details(args.trials, args.seed)
            _emit(rows, args.out)
            for name, trial_seed in failures:
                print(f"failing seed: {trial_seed} ({name})", file=sys.stderr)
        elif args.command == "mc":
            config = _load_config(args)
            if config.suite == "pathwise":
                raise ValueError("suite 'pathwise' belongs to the pathwise "
                                 "subcommand")
            rows = run_mc_convergence(config)
            _emit(rows, config.out)
        elif args.command == "pathwise":
            config = _load_config(args)
            if config.suite != "pathwise":
                raise ValueError("the pathwise subcommand needs suite = pathwise")
            rows = run_subordinator_pathwise(config)
            _emit(rows, config.out)
        else:  # pragma: no cover - argparse enforces the choices
            return USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE

    return PASS if all_rows_pass(rows) else FAIL


if __name__ == "__main__":
    raise SystemExit(main())
