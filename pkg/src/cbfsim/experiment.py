"""Penetration x seed sweeps and CSV emission."""

from __future__ import annotations

import csv
import hashlib
import logging
import pickle
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from cbfsim.metrics import compute_pdr, compute_tx_count, pdr_distance_bins
from cbfsim.network import RunResult, run_once
from cbfsim.scenario import ScenarioConfig

log = logging.getLogger(__name__)

CSV_FILES = ("transmissions.csv", "pdr.csv", "pdr_distance.csv", "summary.csv")


class RunFailed(RuntimeError):
    def __init__(self, penetration: float, seed: int, cause: BaseException):
        super().__init__(f"run failed at penetration={penetration} seed={seed}: {cause!r}")
        self.penetration = penetration
        self.seed = seed


@dataclass
class SweepSummary:
    penetration: float
    mean_tx: float
    mean_pdr: float
    ratio_vs_0pct: float | None


# front-end modules that cannot change a run's outcome
_NOT_MODEL = {"__init__.py", "__main__.py", "cli.py", "experiment.py", "smoke.py"}


def _fingerprint(cfg: ScenarioConfig) -> str:
    """Config + simulator source, so cached runs never outlive a code change."""
    h = hashlib.sha256()
    d = asdict(cfg)
    d.pop("output_dir", None)
    d.pop("seeds", None)
    d.pop("penetrations", None)
    h.update(repr(sorted(d.items())).encode())
    for src in sorted(Path(__file__).parent.glob("*.py")):
        if src.name not in _NOT_MODEL:
            h.update(src.read_bytes())
    return h.hexdigest()[:16]


def _run(args) -> RunResult:
    cfg, p, seed, cache = args
    path = None
    if cache is not None:
        path = Path(cache) / f"{_fingerprint(cfg)}-p{p:.4f}-s{seed}.pkl"
        if path.exists():
            with open(path, "rb") as fh:
                return pickle.load(fh)
    try:
        res = run_once(cfg, p, seed)
    except Exception as exc:  # surfaced with the offending point
        raise RunFailed(p, seed, exc) from exc
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "wb") as fh:
            pickle.dump(res, fh)
        tmp.replace(path)
    return res


def run_sweep(cfg: ScenarioConfig, jobs: int = 1, cache_dir: str | Path | None = None) -> list[RunResult]:
    points = [(cfg, p, seed, cache_dir) for p in cfg.penetrations for seed in cfg.seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run, points))
    else:
        results = []
        for pt in points:
            res = _run(pt)
            log.info(
                "penetration=%.2f seed=%d tx/msg=%.1f wall=%.0fs",
                res.penetration,
                res.seed,
                np.mean([r.tx_count for r in res.reports]) if res.reports else float("nan"),
                res.wall_s,
            )
            results.append(res)
    return results


def summarize(results: list[RunResult]) -> tuple[list[SweepSummary], dict[float, dict[int, float]]]:
    by_p: dict[float, list[RunResult]] = defaultdict(list)
    for r in results:
        by_p[r.penetration].append(r)
    rows = []
    bins = {}
    for p in sorted(by_p):
        reports = [m for r in by_p[p] for m in r.reports]
        mean_tx = float(np.mean([compute_tx_count(m) for m in reports]))
        mean_pdr = float(np.mean([compute_pdr(m) for m in reports]))
        rows.append(SweepSummary(p, mean_tx, mean_pdr, None))
        bins[p] = pdr_distance_bins(reports)
    base = next((r.mean_tx for r in rows if r.penetration == 0.0), None)
    for r in rows:
        if base is not None and r.mean_tx > 0:
            r.ratio_vs_0pct = base / r.mean_tx
    return rows, bins


def write_csvs(results: list[RunResult], out: str | Path) -> list[SweepSummary]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    ordered = sorted(results, key=lambda r: (r.penetration, r.seed))
    with open(out / "transmissions.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["penetration", "seed", "message", "tx_count"])
        for r in ordered:
            for m in r.reports:
                w.writerow([f"{r.penetration:.2f}", r.seed, m.message[1], compute_tx_count(m)])
    with open(out / "pdr.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["penetration", "seed", "message", "pdr"])
        for r in ordered:
            for m in r.reports:
                w.writerow([f"{r.penetration:.2f}", r.seed, m.message[1], f"{compute_pdr(m):.6f}"])
    rows, bins = summarize(results)
    with open(out / "pdr_distance.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["penetration", "distance_bin_m", "mean_pdr"])
        for p in sorted(bins):
            for b, v in bins[p].items():
                w.writerow([f"{p:.2f}", b, f"{v:.6f}"])
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["penetration", "mean_tx", "mean_pdr", "ratio_vs_0pct"])
        for r in rows:
            ratio = "" if r.ratio_vs_0pct is None else f"{r.ratio_vs_0pct:.4f}"
            w.writerow([f"{r.penetration:.2f}", f"{r.mean_tx:.4f}", f"{r.mean_pdr:.6f}", ratio])
    return rows


def run_experiment(cfg: ScenarioConfig, jobs: int = 1, cache_dir: str | Path | None = None) -> list[Path]:
    results = run_sweep(cfg, jobs, cache_dir)
    write_csvs(results, cfg.output_dir)
    return [Path(cfg.output_dir) / f for f in CSV_FILES]
