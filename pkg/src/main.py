#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
ffbias command-line interface.

Subcommands wrap the analyses in :mod:`src.experiments`; reports go to
stdout (or ``--out``), logs and error messages go to stderr. Exit codes:
0 success, 1 resource or verification failure, 2 usage or config error.
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, NoReturn, Optional

from src.config import Plant
from src.errors import FFBiasError, UsageError
from src.experiments import COMMANDS, build_config
from src.logger import get_logger, set_level

logger = get_logger(__name__)


class _Parser(argparse.ArgumentParser):
    """Argument errors become :class:`UsageError` instead of ``sys.exit``."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# Flags: (flag, config key, argparse options)
# ---------------------------------------------------------------------------
_GLOBAL = [
    ("--config", None, {"help": "key = value experiment file"}),
    ("--field", "field", {"help": "p^m or p^m:n"}),
    ("--nvars", "nvars", {"type": int}),
    ("--seed", "seed", {"type": int}),
    ("--budget", "budget", {"type": int, "help": "max evaluations per sweep"}),
    ("--workers", "workers", {"type": int}),
    ("--out", "out", {"help": "report path, '-' for stdout"}),
]

_COMMON = [
    ("--poly", "poly", {"help": "polynomial in the canonical grammar"}),
    ("--degree", "degree", {"type": int, "help": "degree of random polynomials"}),
    ("--homogeneous", "homogeneous", {"action": "store_const", "const": True}),
    ("--n", "n", {"type": int, "help": "extension level"}),
    ("--nmax", "n_max", {"type": int}),
    ("--sing-nmax", "sing_n_max", {"type": int}),
    ("--t", "t", {"help": "fiber value in k_{t-ext}"}),
    ("--t-ext", "t_ext_degree", {"type": int}),
    ("--ext-degree", "extension_degree", {"type": int, "help": "witness field k_n"}),
    ("--search-budget", "search_budget", {"type": int}),
    ("--c", "c_values", {"type": int, "action": "append"}),
]

_EXTRA = {
    "compare": [("--poly2", "poly2", {})],
    "ensemble": [
        ("--size", "ensemble_size", {"type": int}),
        ("--plant", "plant", {"type": Plant, "choices": list(Plant)}),
        ("--plant-rank", "plant_rank", {"type": int}),
        ("--rank-threshold", "rank_threshold", {"type": int}),
        ("--aggregate-out", "aggregate_out", {}),
    ],
}

_HELP = {
    "census": "fiber sizes of F over k_n",
    "bias": "bias measures for n = 1..nmax",
    "rank": "rank interval of the top homogeneous part",
    "singular": "singular locus of X (or Y_t with --t)",
    "good": "c-goodness verdicts for each --c",
    "verify-lemma3": "fiber deviations against the c-good bound shape",
    "derived-bound": "check the bias bound 2/(c-2)",
    "ensemble": "seeded ensemble as CSV",
    "compare": "fiber deviations of two polynomials with the same top part",
    "regular-count": "point counts of {F~ = 0} against the c-regular shape",
}


def _add_flags(parser: argparse.ArgumentParser, flags: List[Any]) -> None:
    for flag, key, options in flags:
        dest = key or flag.lstrip("-").replace("-", "_")
        parser.add_argument(flag, dest=dest, default=argparse.SUPPRESS, **options)


def build_parser() -> argparse.ArgumentParser:
    """Global flags are accepted both before and after the subcommand."""
    shared = _Parser(add_help=False)
    _add_flags(shared, _GLOBAL)
    parser = _Parser(
        prog="ffbias", description=__doc__.strip().splitlines()[0], parents=[shared]
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)
    for name in COMMANDS:
        command = sub.add_parser(name, help=_HELP[name], parents=[shared])
        _add_flags(command, _COMMON + _EXTRA.get(name, []))
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    skip = {"command", "config", "verbose", "quiet"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            set_level(logging.DEBUG)
        elif args.quiet:
            set_level(logging.WARNING)
        config = build_config(getattr(args, "config", None), _overrides(args))
        COMMANDS[args.command](config)
    except FFBiasError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
