"""Command line: ``kickedtop <subcommand> CONFIG [--key value ...]``.

Every config key is also accepted as a ``--key`` flag that overrides the
file. Exit codes: 0 success, 2 configuration error, 3 capacity error,
4 numerical-validation failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

from ..errors import CapacityError, ConfigError, DomainError, NumericalValidationError
from .config import COMMAND_KINDS, ExperimentConfig, load_config
from .experiments import run

EXIT_OK, EXIT_CONFIG, EXIT_CAPACITY, EXIT_NUMERICAL = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kickedtop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for command, kinds in COMMAND_KINDS.items():
        p = sub.add_parser(command, help=f"run {' / '.join(kinds)}")
        p.add_argument("config", nargs="?", help="config file; section defaults to the command")
        p.add_argument("--section", help="config section to read")
        for f in fields(ExperimentConfig):
            flag = "--" + f.name.replace("_", "-")
            p.add_argument(flag, dest="set_" + f.name, metavar="VALUE",
                           help=f"override {f.name}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k[4:]: v for k, v in vars(args).items()
                 if k.startswith("set_") and v is not None}
    try:
        cfg = load_config(args.config, command=args.command, section=args.section,
                          overrides=overrides)
        result = run(cfg)
        table = result[1] if isinstance(result, tuple) else result
        if cfg.plot:
            from .plotting import plot_table
            plot_table(table, cfg.kind, cfg.plot)
        if not cfg.output:
            sys.stdout.write(table.to_text())
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except NumericalValidationError as exc:
        print(f"numerical validation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
