"""Command-line surface.

Subcommands map to pipeline stages plus `all`. Exit codes: 0 success,
1 usage error, 2 data error, 3 internal error.

    textnovelty all --config run.json
    textnovelty novelty --config run.json --threads 8
    textnovelty stats --config run.json --force
"""

from __future__ import annotations

import argparse
import sys
import traceback

from .errors import DataError
from .pipeline import STAGES, Pipeline, load_config

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

# CLI subcommand -> pipeline stages
COMMANDS = {
    "ingest": ["ingest"],
    "baseline": ["baseline"],
    "preprocess": ["preprocess"],
    "novelty": ["novelty"],
    "semdist": ["semdist"],
    "cite": ["cite"],
    "stats": ["stats"],
    "plotdata": ["plotdata"],
    "all": list(STAGES),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="textnovelty",
        description="Text novelty metrics and validation pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        p = sub.add_parser(command, help=f"run the {command} stage(s)")
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--output-dir", default=None,
                       help="override the configured output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for parallel passes")
        p.add_argument("--force", action="store_true",
                       help="rerun stages and overwrite mismatched artifacts")
        p.add_argument("--strict", action="store_true",
                       help="treat malformed corpus lines as fatal")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        config = load_config(
            args.config,
            output_dir=args.output_dir,
            threads=args.threads,
            strict_ingest=True if args.strict else None,
        )
        pipeline = Pipeline(config, force=args.force)
        executed = pipeline.run(COMMANDS[args.command])
        skipped = [s for s in COMMANDS[args.command] if s not in executed]
        for stage in executed:
            print(f"[textnovelty] ran {stage}")
        for stage in skipped:
            print(f"[textnovelty] {stage}: up to date")
        return EXIT_OK
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
