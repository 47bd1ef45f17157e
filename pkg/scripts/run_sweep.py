"""Fill the run cache for the default and half-density sweeps and print the summaries.

    python scripts/run_sweep.py                # both densities, cache in .cache/runs
    python scripts/run_sweep.py --scale 0.5    # fast variant only
"""

import argparse
import logging
from pathlib import Path

from cbfsim.experiment import summarize, run_sweep, write_csvs
from cbfsim.scenario import ScenarioConfig

ROOT = Path(__file__).resolve().parents[1]


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--scale", type=float, action="append", help="density scale (repeatable)")
    ap.add_argument("--cache", type=Path, default=ROOT / ".cache" / "runs")
    ap.add_argument("--out", type=Path, default=ROOT / "results")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    for scale in args.scale or [0.5, 1.0]:
        cfg = ScenarioConfig()
        cfg.highway.density_scale = scale
        results = run_sweep(cfg, jobs=args.jobs, cache_dir=args.cache)
        write_csvs(results, args.out / f"density-{scale:g}")
        rows, _ = summarize(results)
        print(f"density scale {scale:g}")
        for r in rows:
            print(f"  p={r.penetration:.2f} tx/msg={r.mean_tx:9.1f} pdr={r.mean_pdr:.4f} ratio={r.ratio_vs_0pct or 0:.2f}")


if __name__ == "__main__":
    main()
