"""Empirical checks of the structural claims, one function per suite.

Every check returns a JSON-ready dict with a boolean ``passed`` and the
statistics it observed.  Thresholds live in the keyword defaults so the
CLI and the acceptance tests run the same thing.
"""
from __future__ import annotations

import math
import warnings

import numpy as np

from ..matrix_core import (
    Factorization,
    WlraProblem,
    objective_col_form,
    objective_row_form,
    stable_rank,
    statistical_dimension,
    weighted_objective,
)
from ..ridge import (
    RichardsonConfig,
    batch_objective_ratio,
    build_preconditioner,
    richardson_iteration_bound,
    richardson_solve,
)
from ..sketch import (
    DEFAULT_SIZE_CONSTANT,
    SketchSpec,
    amm_error,
    amm_threshold,
    recommended_sketch_size,
    sample_sketch,
)
from ..wlra import (
    AmConfig,
    alternating_minimization,
    estimate_sd,
    rank_reduced_factorization,
    round_weight_factors,
)
from .datasets import gen_synthetic, random_orthonormal, ridge_ensemble

__all__ = [
    "SUITES",
    "ALIASES",
    "verify_suite",
    "verify_shared_sketch",
    "verify_product_tail",
    "verify_sketch",
    "verify_rounding",
    "verify_richardson",
    "verify_preconditioner",
    "verify_rank_reduce",
    "verify_objective_forms",
    "opt_proxy",
]


def verify_shared_sketch(n=200, d=30, k=10, sd=3.0, epsilon=0.5, trials=50, seed=0,
                     ell=None, kind="gaussian", lam=None, c=DEFAULT_SIZE_CONSTANT):
    """One shared sketch for ``d`` ridge problems; pass iff the median cost
    ratio is at most ``1 + epsilon`` and at least 60% of seeds stay within
    ``1 + 2 epsilon``."""
    problems, lam = ridge_ensemble(n, d, k, sd, seed=seed, lam=lam)
    s = max(_sd(p) for p in problems)
    if ell is None:
        ell = recommended_sketch_size(s, epsilon, c=c)
    ratios = np.array([
        batch_objective_ratio(problems, sample_sketch(SketchSpec(kind, ell, seed * 100_003 + t), n))
        for t in range(trials)
    ])
    median = float(np.median(ratios))
    frac = float(np.mean(ratios <= 1 + 2 * epsilon))
    return {
        "suite": "shared_sketch",
        "passed": bool(median <= 1 + epsilon and frac >= 0.6),
        "median_ratio": median,
        "pass_fraction": frac,
        "min_ratio": float(ratios.min()),
        "ell": int(ell),
        "k": k,
        "lambda": lam,
        "max_sd": s,
        "ratios": ratios.tolist(),
    }


def _sd(p):
    return statistical_dimension(p.M, p.lam)


def verify_product_tail(n=100, m=20, trials=500, eps_hat=0.1, gamma=0.5, c=DEFAULT_SIZE_CONSTANT,
                   seed=0, kind="gaussian"):
    """Tail of approximate matrix multiplication with ``K = sr(A) + sr(B)`` and
    ``ell = ceil(c (K + ln(1/eps_hat)) / gamma^2)``; pass iff the failure
    frequency is at most ``2 eps_hat``."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, m))
    B = rng.standard_normal((n, m)) @ np.diag(np.linspace(1.0, 0.1, m))
    K = stable_rank(A) + stable_rank(B)
    ell = math.ceil(c * (K + math.log(1 / eps_hat)) / gamma**2)
    thresh = amm_threshold(A, B, gamma, K)
    errors = np.array([
        amm_error(sample_sketch(SketchSpec(kind, ell, seed * 100_003 + t), n), A, B)
        for t in range(trials)
    ])
    freq = float(np.mean(errors > thresh))
    return {
        "suite": "product_tail",
        "passed": bool(freq <= 2 * eps_hat),
        "failure_frequency": freq,
        "nominal": eps_hat,
        "ell": ell,
        "K": K,
        "gamma": gamma,
        "c": c,
        "threshold": thresh,
        "median_error": float(np.median(errors)),
    }


def verify_sketch(kind="gaussian", rows=50, trials=1000, seed=0, n=64):
    """Unbiasedness and norm-distortion tails of one sketch distribution."""
    x = np.random.default_rng(seed).standard_normal(n)
    x /= np.linalg.norm(x)
    sq = np.array([
        float(np.sum((sample_sketch(SketchSpec(kind, rows, seed * 100_003 + t), n) @ x) ** 2))
        for t in range(trials)
    ])
    mean = float(sq.mean())
    tails = {str(delta): float(np.mean(np.abs(sq - 1) > delta)) for delta in (0.1, 0.25, 0.5, 1.0)}
    return {
        "suite": "sketch",
        "kind": kind,
        "rows": rows,
        "trials": trials,
        "passed": bool(abs(mean - 1) <= 0.05),
        "mean_squared_norm": mean,
        "tail_frequencies": tails,
    }


def verify_rounding(instances=100, epsilons=(0.05, 0.1, 0.3), seed=0):
    """Exact elementwise sandwich on random nonnegative factorizations."""
    rng = np.random.default_rng(seed)
    failures = 0
    checked = 0
    for eps in epsilons:
        for _ in range(instances):
            n, d, r = rng.integers(2, 30), rng.integers(2, 30), rng.integers(1, 5)
            Y = rng.lognormal(0.0, 2.0, (n, r)) * (rng.random((n, r)) > 0.15)
            Z = rng.lognormal(0.0, 2.0, (r, d)) * (rng.random((r, d)) > 0.15)
            W = Y @ Z
            try:
                rw = round_weight_factors(Y, Z, eps)
            except RuntimeError:
                failures += 1
                continue
            lo = (1 - eps) ** 2 * W
            hi = (1 + eps) ** 2 * W
            if not (np.all(lo <= rw.Wp) and np.all(rw.Wp <= hi)):
                failures += 1
            checked += 1
    return {"suite": "rounding", "passed": failures == 0, "instances": checked + failures,
            "failures": failures}


def _psd_pair(rng, dim, eta):
    """``A`` SPD and ``B = A^{1/2} C A^{1/2}`` with ``spec(C)`` in ``[eta, 1]``."""
    Q = random_orthonormal(rng, dim, dim)
    a = 10.0 ** rng.uniform(-2, 2, dim)
    A = (Q * a) @ Q.T
    root = (Q * np.sqrt(a)) @ Q.T
    P = random_orthonormal(rng, dim, dim)
    cvals = rng.uniform(eta, 1.0, dim)
    cvals[0], cvals[-1] = eta, 1.0
    B = root @ ((P * cvals) @ P.T) @ root
    return 0.5 * (A + A.T), 0.5 * (B + B.T)


def verify_richardson(pairs=50, etas=(0.1, 0.5, 1.0), dim=12, eps=1e-6, seed=0):
    """Relative error ``eps`` within ``ceil(C log(c_B/eps)/eta)`` steps on random pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    failures = 0
    max_used = 0
    for eta in etas:
        for _ in range(pairs):
            A, B = _psd_pair(rng, dim, eta)
            b = rng.standard_normal(dim)
            x_star = np.linalg.solve(A, b)
            ev = np.linalg.eigvalsh(B)
            bound = richardson_iteration_bound(ev[-1] / ev[0], eps, eta)
            res = richardson_solve(A, B, b, RichardsonConfig(eta=eta, max_iters=bound, tau=1e-300))
            err = np.linalg.norm(res.x - x_star) / np.linalg.norm(x_star)
            worst = max(worst, float(err))
            max_used = max(max_used, res.iterations)
            failures += err > eps
    A, _ = _psd_pair(rng, dim, 1.0)
    b = rng.standard_normal(dim)
    one = richardson_solve(A, A, b, RichardsonConfig(eta=1.0, max_iters=1, tau=1e-300))
    x_star = np.linalg.solve(A, b)
    one_step_err = float(np.linalg.norm(one.x - x_star) / np.linalg.norm(x_star))
    return {
        "suite": "richardson",
        "passed": bool(failures == 0 and one_step_err <= 1e-10),
        "runs": pairs * len(etas),
        "failures": int(failures),
        "worst_relative_error": worst,
        "max_iterations": max_used,
        "one_step_relative_error": one_step_err,
    }


def verify_preconditioner(n=200, k=20, ell=40, weight_ratio=10.0, lam=1.0, eps=1e-6, seed=0):
    """Richardson with the weight-oblivious preconditioner on ``Q^T Q + lam I``,
    ``Q = S D_w U`` for an ``n x k`` factor ``U``."""
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((n, k))
    l_W, u_W = 1.0 / weight_ratio, 1.0
    w = rng.uniform(l_W, u_W, n)
    w[0], w[1] = l_W, u_W
    S = sample_sketch(SketchSpec("gaussian", ell, seed), n)
    Q = S @ (w[:, None] * U)
    A = Q.T @ Q + lam * np.eye(k)
    b = Q.T @ (S @ (w * rng.standard_normal(n)))
    pc = build_preconditioner(U.T, S.T, l_W, u_W, n, lam)
    ev = np.linalg.eigvalsh(pc.B)
    bound = richardson_iteration_bound(ev[-1] / ev[0], eps, pc.eta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = richardson_solve(A, pc.B, b, RichardsonConfig(eta=pc.eta, max_iters=bound, tau=1e-300))
    x_star = np.linalg.solve(A, b)
    err = float(np.linalg.norm(res.x - x_star) / np.linalg.norm(x_star))
    return {
        "suite": "preconditioner",
        "passed": bool(err <= eps),
        "relative_error": err,
        "eta": pc.eta,
        "iteration_bound": bound,
        "iterations": res.iterations,
        "containment_probe_ok": res.containment_ok,
    }


def opt_proxy(problem: WlraProblem, iterations=100, restarts=5, seed=0):
    """Best of ``restarts`` unsketched AM runs; a stand-in for the unknown optimum."""
    best = None
    for r in range(restarts):
        F, _ = alternating_minimization(
            problem, AmConfig(iterations=iterations, init_seed=seed + r, track_sd=False))
        if best is None or F.objective < best.objective:
            best = F
    return best


def verify_rank_reduce(n=40, d=20, r=2, k=15, sd=2.0, epsilon=0.5, lam=1.0, c=1.0, seed=0,
                       proxy_iterations=100, restarts=5):
    """Rank ``k' < k`` factorization from the right projection versus the OPT proxy.

    ``c`` sizes ``S''`` so that ``r * ell < k`` and the reduction is not vacuous.
    """
    rng = np.random.default_rng(seed)
    A = gen_synthetic(n, d, sd, lam, seed)
    W = rng.uniform(0.1, 1.0, (n, r)) @ rng.uniform(0.1, 1.0, (r, d))
    problem = WlraProblem(A, W, k, lam, epsilon)
    best = opt_proxy(problem, proxy_iterations, restarts, seed)
    s = estimate_sd(problem, best.U, best.V, samples=max(n, d))
    ell = recommended_sketch_size(s, epsilon, c=c)
    Spp = sample_sketch(SketchSpec("gaussian", ell, seed), n)
    F, V_tilde, rr = rank_reduced_factorization(problem, best.U, Spp)
    sketched_pair = weighted_objective(problem, Factorization(best.U, V_tilde))
    ratio = F.objective / best.objective
    return {
        "suite": "rank_reduce",
        "passed": bool(ratio <= 1 + epsilon and rr.k_prime < k),
        "ratio_to_opt_proxy": ratio,
        "sketched_pair_ratio": sketched_pair / best.objective,
        "opt_proxy": best.objective,
        "reduced_objective": F.objective,
        "k": k,
        "k_prime": rr.k_prime,
        "ell": ell,
        "estimated_sd": s,
    }


def verify_objective_forms(instances=20, seed=0, rtol=1e-9):
    """Elementwise, row-decomposed and column-decomposed objectives agree."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        d = int(rng.integers(2, 20))
        n = int(rng.integers(d, 21))
        k = int(rng.integers(1, d + 1))
        p = WlraProblem(rng.standard_normal((n, d)), rng.random((n, d)), k, float(rng.uniform(0, 2)))
        F = Factorization(rng.standard_normal((n, k)), rng.standard_normal((k, d)))
        vals = [weighted_objective(p, F), objective_row_form(p, F), objective_col_form(p, F)]
        worst = max(worst, (max(vals) - min(vals)) / max(vals))
    return {"suite": "objective_forms", "passed": bool(worst <= rtol), "instances": instances,
            "worst_relative_gap": worst}


SUITES = {
    "shared_sketch": verify_shared_sketch,
    "product_tail": verify_product_tail,
    "sketch": verify_sketch,
    "rounding": verify_rounding,
    "richardson": verify_richardson,
    "preconditioner": verify_preconditioner,
    "rank_reduce": verify_rank_reduce,
    "objective_forms": verify_objective_forms,
}


# names accepted by earlier command lines
ALIASES = {"theorem31": "shared_sketch", "lemma25": "product_tail"}


def verify_suite(which: str, **params) -> dict:
    try:
        fn = SUITES[ALIASES.get(which, which)]
    except KeyError:
        raise ValueError(f"unknown suite {which!r}; choose from {sorted(SUITES)}") from None
    return fn(**params)
