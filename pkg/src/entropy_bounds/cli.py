"""Command-line entry point: ``entropy-bounds <subcommand> CONFIG``.

Exit codes: 0 success, 2 bad config or selection, 3 model load failure,
4 an estimate came out invalid (CSV is still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments
from .errors import ConfigError, InvalidSelection, ModelLoadError
from .reporting import to_csv

EXIT_OK, EXIT_CONFIG, EXIT_MODEL, EXIT_INVALID = 0, 2, 3, 4

COMMANDS = {
    "run": (experiments.run_query, "evaluate one entropy or information query"),
    "experiment-mvn": (experiments.experiment_mvn, "Gaussian benchmark sweep over SIR sizes"),
    "experiment-rank": (experiments.experiment_rank, "rank candidates by conditional entropy"),
    "experiment-pair-grid": (experiments.experiment_pair_grid,
                             "information about a gain from pairs of measurements"),
    "baseline-compare": (experiments.baseline_compare, "interval estimates against a kNN estimator"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entropy-bounds")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="JSON configuration file")
        p.add_argument("--seed", type=int, default=None, help="override estimator.seed")
        p.add_argument("--output", default=None, help="CSV path (default: config \"output\" or stdout)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fn, _ = COMMANDS[args.command]
    path = Path(args.config)
    try:
        doc = json.loads(path.read_text())
        if not isinstance(doc, dict):
            raise ConfigError("config: top level must be an object")
        columns, rows, invalid = fn(doc, seed=args.seed, base_dir=path.parent)
    except (ConfigError, InvalidSelection, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelLoadError as exc:
        print(f"error: model: {exc}", file=sys.stderr)
        return EXIT_MODEL
    text = to_csv(columns, rows)
    output = args.output or doc.get("output")
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if invalid:
        print("error: an estimate is invalid (all weights zero)", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
