"""Acceptance criteria, one test each, with a PASS/FAIL line printed per criterion.

Run ``pytest tests/test_acceptance.py -s`` to see the lines, or execute this
file directly for a summary without pytest.
"""
import hashlib
import sys
import time

import numpy as np
import pytest

from regwlra.harness.bench import BenchConfig, run_benchmark
from regwlra.harness.verify import (
    verify_product_tail,
    verify_preconditioner,
    verify_rank_reduce,
    verify_richardson,
    verify_rounding,
    verify_shared_sketch,
)
from regwlra.sketch import recommended_sketch_size
from regwlra.wlra import round_weight_factors

_cache = {}
LINES = []  # echoed in the terminal summary by conftest.py


def report(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    print(line, flush=True)
    LINES.append(line)
    return line


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def _bench_config():
    return BenchConfig(n=1000, d=200, k=20, lam=1.0, sd_target=2.0, profile="dense",
                       iterations=25, sketch_sizes=(4, 8, 12, 16, 20), seed=0)


def _bench():
    if "bench" not in _cache:
        _cache["bench"] = timed(run_benchmark, _bench_config())
    return _cache["bench"]


def _shared_sketch():
    if "c1" not in _cache:
        _cache["c1"] = timed(verify_shared_sketch, n=200, d=30, k=10, sd=3.0, epsilon=0.5,
                             trials=50, seed=0)
    return _cache["c1"]


def rounding_digest(seed=0):
    """Hash of every rounded weight matrix on the criterion-4 instance stream."""
    rng = np.random.default_rng(seed)
    h = hashlib.sha256()
    for eps in (0.05, 0.1, 0.3):
        for _ in range(100):
            n, d, r = rng.integers(2, 30), rng.integers(2, 30), rng.integers(1, 5)
            Y = rng.lognormal(0.0, 2.0, (n, r)) * (rng.random((n, r)) > 0.15)
            Z = rng.lognormal(0.0, 2.0, (r, d)) * (rng.random((r, d)) > 0.15)
            h.update(round_weight_factors(Y, Z, eps).Wp.tobytes())
    return h.hexdigest()


def test_criterion_1_shared_sketch_ridge():
    res, secs = _shared_sketch()
    neg, neg_secs = timed(verify_shared_sketch, n=200, d=30, k=10, sd=3.0, epsilon=0.5,
                          trials=50, seed=0, ell=2)
    expected_ell = recommended_sketch_size(res["max_sd"], 0.5)
    ok = (res["median_ratio"] <= 1.5 and res["pass_fraction"] >= 0.6 and res["ell"] == expected_ell
          and abs(res["max_sd"] - 3.0) < 1e-6 and neg["median_ratio"] > 1.5 and secs + neg_secs < 60)
    report(1, ok, f"ell={res['ell']} median={res['median_ratio']:.4f} "
                  f"frac<=2={res['pass_fraction']:.2f} neg(ell=2) median={neg['median_ratio']:.3f} "
                  f"time={secs + neg_secs:.1f}s")
    assert ok


def test_criterion_2_sizing_by_statistical_dimension():
    res, secs = timed(verify_shared_sketch, n=200, d=30, k=40, sd=2.0, epsilon=0.5, trials=50, seed=0)
    ok = res["passed"] and res["ell"] < 40 and abs(res["max_sd"] - 2.0) < 1e-6 and secs < 60
    report(2, ok, f"k=40 ell={res['ell']} median={res['median_ratio']:.4f} "
                  f"frac<=2={res['pass_fraction']:.2f} time={secs:.1f}s")
    assert ok


def test_criterion_3_matrix_product_tail():
    res, secs = timed(verify_product_tail, n=100, m=20, trials=500, eps_hat=0.1)
    ok = res["failure_frequency"] <= 0.2 and secs < 60
    report(3, ok, f"ell={res['ell']} gamma={res['gamma']} c={res['c']} "
                  f"failure_freq={res['failure_frequency']:.3f} (limit 0.2) time={secs:.1f}s")
    assert ok


def test_criterion_4_rounding_sandwich():
    res, secs = timed(verify_rounding, instances=100, epsilons=(0.05, 0.1, 0.3))
    ok = res["failures"] == 0 and res["instances"] == 300 and secs < 10
    report(4, ok, f"{res['instances']} instances, {res['failures']} violations, time={secs:.2f}s")
    assert ok


def test_criterion_5_richardson():
    res, secs = timed(verify_richardson, pairs=50, etas=(0.1, 0.5, 1.0), eps=1e-6)
    ok = res["passed"] and res["runs"] == 150 and secs < 30
    report(5, ok, f"{res['runs']} runs, worst rel err={res['worst_relative_error']:.2e}, "
                  f"one-step err={res['one_step_relative_error']:.1e}, time={secs:.2f}s")
    assert ok


def test_criterion_6_preconditioner():
    res, secs = timed(verify_preconditioner, n=200, k=20, weight_ratio=10.0, eps=1e-6)
    ok = res["relative_error"] <= 1e-6 and res["iterations"] <= res["iteration_bound"] and secs < 30
    report(6, ok, f"rel err={res['relative_error']:.2e} after {res['iterations']} "
                  f"of {res['iteration_bound']} allowed steps, time={secs:.2f}s")
    assert ok


def test_criterion_7_rank_reduction():
    res, secs = timed(verify_rank_reduce, n=40, d=20, r=2, k=15, sd=2.0, epsilon=0.5)
    ok = res["ratio_to_opt_proxy"] <= 1.5 and res["k_prime"] < 15 and secs < 60
    report(7, ok, f"k'={res['k_prime']} ratio to OPT proxy={res['ratio_to_opt_proxy']:.4f} "
                  f"time={secs:.1f}s")
    assert ok


def test_criterion_8_desk_scale_sweep():
    rep, secs = _bench()
    errors = [r for r in rep.records if r["error"] is not None]
    beats = all(a["am_beats_svd"] and a["am_sketched_beats_svd"] for a in rep.aggregates)
    ratios = {a["t"]: a["objective_ratio"] for a in rep.aggregates}
    speed4 = next(a["speedup"] for a in rep.aggregates if a["t"] == 4)
    ok = not errors and beats and max(ratios.values()) <= 1.5 and speed4 > 1.2 and secs < 300
    report(8, ok, f"beats svd={beats} max ratio={max(ratios.values()):.3f} "
                  f"speedup@t=4={speed4:.2f} time={secs:.1f}s")
    assert ok


def test_criterion_9_determinism():
    first1, _ = _shared_sketch()
    again1 = verify_shared_sketch(n=200, d=30, k=10, sd=3.0, epsilon=0.5, trials=50, seed=0)
    same1 = first1["ratios"] == again1["ratios"]
    same4 = rounding_digest() == rounding_digest()
    first8, _ = _bench()
    again8 = run_benchmark(_bench_config())
    key = lambda rep: [(r["algorithm"], r["t"], r["final_objective"], r["objective_trace"])
                       for r in rep.records]
    same8 = key(first8) == key(again8)
    ok = same1 and same4 and same8
    report(9, ok, f"criterion1 identical={same1} criterion4 identical={same4} "
                  f"criterion8 identical={same8}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
