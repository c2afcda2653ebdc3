"""Command line entry point: run, sweep, check and rescale verbs."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from .config import PRESETS, build_initial_state, build_support, load_config, preset_config
from .errors import InvalidInputError
from .flow import check_admissibility
from .runner import rescale_lab, run_experiment, sweep


def _config_arg(value: str):
    if value in PRESETS:
        return preset_config(value)
    return load_config(value)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="arcflow",
        description="Area-preserving curve shortening outside a convex support curve.")
    parser.add_argument("--out-dir", default="out", help="output directory")
    parser.add_argument("--frames", action="store_true", help="emit SVG frames")
    parser.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run one experiment")
    p_run.add_argument("config", help=f"config JSON path or preset {sorted(PRESETS)}")

    p_sweep = sub.add_parser("sweep", help="run a parameter grid")
    p_sweep.add_argument("config", help="base config JSON path or preset name")
    p_sweep.add_argument("grid", help="grid JSON path: {dotted.path: [values]}")

    p_check = sub.add_parser("check", help="admissibility report only")
    p_check.add_argument("config", help="config JSON path or preset name")

    p_rescale = sub.add_parser("rescale", help="singularity lab on a trajectory")
    p_rescale.add_argument("trajectory", help="trajectory.jsonl from a run")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.verb == "run":
            config = _config_arg(args.config)
            run_experiment(config, args.out_dir, frames=args.frames, quiet=args.quiet)
        elif args.verb == "sweep":
            config = _config_arg(args.config)
            with open(args.grid) as fh:
                grid = json.load(fh)
            workers = int(os.environ.get("ARCFLOW_THREADS", "0")) or None
            rows = sweep(config.to_json_dict(), grid, args.out_dir, workers=workers)
            if not args.quiet:
                for row in rows:
                    print(row)
        elif args.verb == "check":
            config = _config_arg(args.config)
            sigma = build_support(config)
            state = build_initial_state(config, sigma)
            if not state.attached:
                raise InvalidInputError("admissibility applies to attached open curves")
            report = check_admissibility(state.curve, sigma, state.lift)
            doc = asdict(report)
            doc["admissible"] = report.admissible
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            with open(out / "admissibility.json", "w") as fh:
                json.dump({"config_hash": config.config_hash(), **doc}, fh,
                          indent=2, default=float)
            if not args.quiet:
                print(json.dumps(doc, indent=2, default=float))
            return 0 if report.admissible else 1
        elif args.verb == "rescale":
            summary = rescale_lab(args.trajectory, args.out_dir)
            if not args.quiet:
                print(json.dumps(summary, indent=2, default=float))
    except (InvalidInputError, OSError, json.JSONDecodeError) as exc:
        print(f"arcflow: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
