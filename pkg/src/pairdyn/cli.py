"""Command-line front end: simulate, merge, compare-oracle.

Exit codes: 0 success, 2 validation problem, 3 numerical failure.
The output root defaults to ./runs or the PAIRDYN_OUTPUT_ROOT environment
variable; each run writes its tables next to a reproducibility manifest.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import load_config
from .errors import PropagationError, ValidationError
from .runner import compare_oracle, merge, resolve_output_dir, simulate

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairdyn",
        description="Pair-production dynamics of a dissociating condensate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a config and write observable tables")
    sim.add_argument("config", type=Path)
    sim.add_argument("--threads", type=int, default=None)
    sim.add_argument("--row-start", type=int, default=None)
    sim.add_argument("--row-end", type=int, default=None)
    sim.add_argument("--output", type=Path, default=None)

    mrg = sub.add_parser("merge", help="merge shard files into full tables")
    mrg.add_argument("dir", type=Path, help="run directory containing shards/")
    mrg.add_argument("--config", type=Path, default=None,
                     help="config path (default: <dir>/config.yaml)")
    mrg.add_argument("--output", type=Path, default=None,
                     help="table output directory (default: <dir>)")

    cmp_ = sub.add_parser("compare-oracle", help="check a run against a closed form")
    cmp_.add_argument("config", type=Path)
    cmp_.add_argument(
        "--oracle",
        required=True,
        choices=["uniform", "golden_rule", "cl_asymptote"],
    )
    cmp_.add_argument("--threads", type=int, default=None)
    cmp_.add_argument("--output", type=Path, default=None)
    return parser


def _apply_overrides(config, args):
    if getattr(args, "threads", None) is not None:
        config.threads = args.threads
    row_start = getattr(args, "row_start", None)
    row_end = getattr(args, "row_end", None)
    if (row_start is None) != (row_end is None):
        raise ValidationError("--row-start and --row-end must be given together")
    if row_start is not None:
        if row_start < 0 or row_end <= row_start:
            raise ValidationError("need 0 <= --row-start < --row-end")
        config.shard = (row_start, row_end)
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            config = _apply_overrides(load_config(args.config), args)
            out = simulate(config, config_path=args.config, out_dir=args.output)
            print(f"wrote {out}")
        elif args.command == "merge":
            config_path = args.config or (args.dir / "config.yaml")
            if not Path(config_path).exists():
                raise ValidationError(f"merge: config not found at {config_path}")
            config = load_config(config_path)
            config.shard = None
            out = merge(config, args.dir / "shards", args.output or args.dir)
            print(f"wrote {out}")
        else:
            config = load_config(args.config)
            if args.threads is not None:
                config.threads = args.threads
            tolerances = (config.raw or {}).get("oracle_tolerances", {})
            report = compare_oracle(config, args.oracle, tolerances)
            text = json.dumps(report, sort_keys=True, indent=2)
            print(text)
            if args.output:
                Path(args.output).parent.mkdir(parents=True, exist_ok=True)
                Path(args.output).write_text(text + "\n")
            if not report.get("pass", False):
                print("oracle comparison FAILED", file=sys.stderr)
                return EXIT_NUMERICAL
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except PropagationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
