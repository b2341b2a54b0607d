"""Sketch-size sweep comparing the SVD baseline with plain and sketched alternating minimization."""
from __future__ import annotations

import csv
import logging
import statistics
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..matrix_core import WlraProblem
from ..sketch import SketchSpec
from ..wlra import AmConfig, alternating_minimization, svd_baseline
from .datasets import ProfileKind, WeightProfile, gen_synthetic, gen_weights

__all__ = ["BenchConfig", "BenchReport", "run_benchmark", "write_bench_csv", "ALGORITHMS"]

log = logging.getLogger(__name__)

ALGORITHMS = ("svd", "am", "am_sketched")


@dataclass(frozen=True)
class BenchConfig:
    n: int = 1000
    d: int = 200
    k: int = 20
    lam: float = 1.0
    sd_target: float = 2.0
    profile: str = "dense"
    iterations: int = 25
    sketch_sizes: tuple = (4, 8, 12, 16, 20)
    algorithms: tuple = ALGORITHMS
    sketch_kind: str = "countsketch"
    seed: int = 0
    repeats: int = 3
    parallel: bool = False
    # sketched AM fits rank min(k, t) instead of k
    rank_follows_sketch: bool = False

    def __post_init__(self):
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms {sorted(unknown)}")
        if self.repeats < 1:
            raise ValueError("repeats must be positive")
        object.__setattr__(self, "sketch_sizes", tuple(int(t) for t in self.sketch_sizes))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))


@dataclass
class BenchReport:
    config: dict
    records: list = field(default_factory=list)
    aggregates: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def record(self, algorithm, t):
        for r in self.records:
            if r["algorithm"] == algorithm and r["t"] == t:
                return r
        raise KeyError((algorithm, t))


def _cell_seeds(cfg: BenchConfig, index: int):
    base = np.random.SeedSequence([cfg.seed, index]).generate_state(5, np.uint64)
    return [int(x) for x in base]


def _timed(fn, repeats):
    """Result of the last call and the median wall-clock over ``repeats`` calls."""
    times = []
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, statistics.median(times)


def _run_cell(cfg: BenchConfig, index: int, t: int):
    data_seed, weight_seed, init_seed, su_seed, sv_seed = _cell_seeds(cfg, index)
    A = gen_synthetic(cfg.n, cfg.d, cfg.sd_target, cfg.lam, data_seed)
    W = gen_weights(cfg.n, cfg.d, WeightProfile(ProfileKind(cfg.profile)), weight_seed)
    problem = WlraProblem(A, W, cfg.k, cfg.lam)
    common = {"t": t, "data_seed": data_seed, "weight_seed": weight_seed, "init_seed": init_seed}
    records = []

    def add(algorithm, fn, **extra):
        rec = {"algorithm": algorithm, **common, **extra}
        try:
            rec.update(fn())
            rec["error"] = None
        except Exception as exc:  # recorded per row, the sweep continues
            log.warning("cell t=%d %s failed: %s", t, algorithm, exc)
            rec.update(final_objective=None, objective_trace=[], seconds=None,
                       error="".join(traceback.format_exception_only(type(exc), exc)).strip())
        records.append(rec)

    def svd():
        F, secs = _timed(lambda: svd_baseline(problem.A, cfg.k).with_objective(problem), cfg.repeats)
        return {"final_objective": F.objective, "objective_trace": [F.objective], "seconds": secs}

    def am(sketched):
        def go():
            rank = min(cfg.k, t) if (sketched and cfg.rank_follows_sketch) else cfg.k
            prob = problem if rank == cfg.k else WlraProblem(A, W, rank, cfg.lam)
            am_cfg = AmConfig(
                iterations=cfg.iterations,
                sketch_u=SketchSpec(cfg.sketch_kind, t, su_seed) if sketched else None,
                sketch_v=SketchSpec(cfg.sketch_kind, t, sv_seed) if sketched else None,
                init_seed=init_seed,
                track_sd=False,
            )
            runs = [alternating_minimization(prob, am_cfg) for _ in range(cfg.repeats)]
            F, rep = runs[-1]
            return {
                "final_objective": F.objective,
                "objective_trace": rep.objective_trace,
                "seconds": statistics.median(r.total_seconds for _, r in runs),
                "regularization_share": rep.regularization_share,
                "rank": rank,
            }
        return go

    if "svd" in cfg.algorithms:
        add("svd", svd)
    if "am" in cfg.algorithms:
        add("am", am(False))
    if "am_sketched" in cfg.algorithms:
        add("am_sketched", am(True), sketch_kind=cfg.sketch_kind,
            sketch_seeds=[su_seed, sv_seed])
    return records


def _aggregate(cfg: BenchConfig, t: int, records):
    by = {r["algorithm"]: r for r in records}
    row = {"t": t}

    def obj(name):
        r = by.get(name)
        return None if r is None else r.get("final_objective")

    am, sk, sv = obj("am"), obj("am_sketched"), obj("svd")
    row["objective_ratio"] = sk / am if am and sk is not None else None
    row["am_beats_svd"] = am < sv if am is not None and sv is not None else None
    row["am_sketched_beats_svd"] = sk < sv if sk is not None and sv is not None else None
    if cfg.parallel:
        row["speedup"] = None  # concurrent cells make timings incomparable
    else:
        ta = by.get("am", {}).get("seconds")
        ts = by.get("am_sketched", {}).get("seconds")
        row["speedup"] = ta / ts if ta and ts else None
    return row


def run_benchmark(cfg: BenchConfig) -> BenchReport:
    """Run every algorithm for every sketch size ``t``.

    Each ``t`` gets its own data matrix, weights and seeds, all derived from
    ``cfg.seed``.  Timings are medians over ``cfg.repeats`` runs.
    """
    report = BenchReport(config=asdict(cfg))
    cells = list(enumerate(cfg.sketch_sizes))
    if cfg.parallel:
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(lambda it: _run_cell(cfg, *it), cells))
    else:
        results = [_run_cell(cfg, i, t) for i, t in cells]
    for (_, t), recs in zip(cells, results):
        report.records.extend(recs)
        report.aggregates.append(_aggregate(cfg, t, recs))
    return report


def write_bench_csv(report: BenchReport, path) -> None:
    """One flat row per (algorithm, t) for external plotting."""
    cols = ["algorithm", "t", "final_objective", "seconds", "regularization_share", "error"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
        w.writeheader()
        for r in report.records:
            w.writerow({c: r.get(c) for c in cols})
