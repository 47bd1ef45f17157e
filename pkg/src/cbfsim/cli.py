"""Command line: ``cbfsim run <scenario>`` and ``cbfsim smoke``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from cbfsim.experiment import RunFailed, run_experiment
from cbfsim.mobility import ConfigError
from cbfsim.scenario import load_scenario


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="cbfsim", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)
    run = sub.add_parser("run", help="run a penetration x seed sweep and write CSVs")
    run.add_argument("scenario", type=Path)
    run.add_argument("--penetration", type=float, action="append", help="override the sweep (repeatable)")
    run.add_argument("--seed", type=int, action="append", help="override the seeds (repeatable)")
    run.add_argument("--density-scale", type=float)
    run.add_argument("--out", type=Path)
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--cache", type=Path, help="reuse finished runs from this directory")
    run.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("smoke", help="5-node line oracle scenario, both releases")
    args = ap.parse_args(argv)

    if args.cmd == "smoke":
        from cbfsim.smoke import run_smoke

        for rel, sched in run_smoke().items():
            print(rel, " ".join(f"node{n}@{t}us" for n, t in sched))
        return 0

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_scenario(args.scenario, create_output=False)
        if args.penetration:
            cfg.penetrations = args.penetration
        if args.seed:
            cfg.seeds = args.seed
        if args.density_scale is not None:
            cfg.highway.density_scale = args.density_scale
        if args.out is not None:
            cfg.output_dir = args.out
        cfg.validate()
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        files = run_experiment(cfg, jobs=args.jobs, cache_dir=args.cache)
    except (ConfigError, RunFailed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
